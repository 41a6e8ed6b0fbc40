//! Acquisition of compressed effectual tables, one parameter at a time.

use serde::{Deserialize, Serialize};

use super::{ElicitationError, LegalRange};
use crate::effectual::{validate_synergy_with, SynergySpec, DEFAULT_SYNERGY_ORDER_CAP};
use crate::event::{format_subset, EventId};

const BISECTION_STEPS: usize = 80;
/// Below this a synergy or necessity term counts as unbounded.
const SEARCH_FLOOR: f64 = -1e9;

/// A single adjustable number of a [`SynergySpec`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Parameter {
    Base { cause: EventId },
    Synergy { subset: Vec<EventId> },
    Necessity { cause: EventId },
}

impl Parameter {
    fn describe(&self) -> String {
        match self {
            Parameter::Base { cause } => format!("base {cause}"),
            Parameter::Synergy { subset } => format!("synergy {}", format_subset(subset)),
            Parameter::Necessity { cause } => format!("necessity {cause}"),
        }
    }
}

/// Builds a [`SynergySpec`] while keeping every intermediate spec valid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectualElicitation {
    spec: SynergySpec,
    order_cap: usize,
}

impl EffectualElicitation {
    /// Starts from a noisy-OR spec with every base probability at zero.
    pub fn new(target: EventId, parents: &[EventId]) -> Self {
        EffectualElicitation {
            spec: SynergySpec {
                target,
                parents: parents.to_vec(),
                base: parents.iter().map(|p| (p.clone(), 0.0)).collect(),
                synergy: Vec::new(),
                necessity: Default::default(),
            },
            order_cap: DEFAULT_SYNERGY_ORDER_CAP,
        }
    }

    pub fn from_spec(spec: SynergySpec) -> Self {
        EffectualElicitation {
            spec,
            order_cap: DEFAULT_SYNERGY_ORDER_CAP,
        }
    }

    pub fn spec(&self) -> &SynergySpec {
        &self.spec
    }

    fn get(&self, param: &Parameter) -> f64 {
        match param {
            Parameter::Base { cause } => self.spec.base.get(cause).copied().unwrap_or(0.0),
            Parameter::Synergy { subset } => self.spec.synergy_value(subset),
            Parameter::Necessity { cause } => self.spec.necessity.get(cause).copied().unwrap_or(0.0),
        }
    }

    fn with(&self, param: &Parameter, v: f64) -> SynergySpec {
        let mut spec = self.spec.clone();
        match param {
            Parameter::Base { cause } => {
                spec.base.insert(cause.clone(), v);
            }
            Parameter::Synergy { subset } => spec.set_synergy(subset.clone(), v),
            Parameter::Necessity { cause } => {
                spec.necessity.insert(cause.clone(), v);
            }
        }
        spec
    }

    fn valid(&self, param: &Parameter, v: f64) -> bool {
        validate_synergy_with(&self.with(param, v), self.order_cap).is_empty()
    }

    fn check_param(&self, param: &Parameter) -> Result<(), ElicitationError> {
        let known = |c: &EventId| self.spec.parents.contains(c);
        let ok = match param {
            Parameter::Base { cause } | Parameter::Necessity { cause } => known(cause),
            Parameter::Synergy { subset } => {
                subset.len() >= 2 && subset.len() <= self.order_cap && subset.iter().all(known)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(ElicitationError::InvalidParameter(param.describe()))
        }
    }

    /// Values `param` may take with every other parameter held fixed.
    ///
    /// Ends are found by bisection from a valid point. An unbounded lower
    /// end is reported as `-inf`.
    pub fn range(&self, param: &Parameter) -> Result<LegalRange, ElicitationError> {
        self.check_param(param)?;
        let floor = match param {
            Parameter::Base { .. } => 0.0,
            _ => SEARCH_FLOOR,
        };
        let anchor = [self.get(param), 0.0, 0.5, 1.0, -1.0]
            .into_iter()
            .find(|&v| v >= floor && self.valid(param, v))
            .ok_or_else(|| ElicitationError::InvalidParameter(format!("{} has no valid value", param.describe())))?;

        let hi = if self.valid(param, 1.0) {
            1.0
        } else {
            self.edge(param, anchor, 1.0)
        };
        let lo = if self.valid(param, floor) {
            if floor == SEARCH_FLOOR {
                f64::NEG_INFINITY
            } else {
                floor
            }
        } else {
            // step outward until invalid, then bisect
            let mut probe = anchor - 1.0;
            let mut inside = anchor;
            while probe > floor && self.valid(param, probe) {
                inside = probe;
                probe = anchor - 2.0 * (anchor - probe);
            }
            self.edge(param, inside, probe.max(floor))
        };
        Ok(LegalRange { lo, hi })
    }

    /// Boundary between a valid `inside` and an invalid `outside`.
    fn edge(&self, param: &Parameter, mut inside: f64, mut outside: f64) -> f64 {
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (inside + outside);
            if mid == inside || mid == outside {
                break;
            }
            if self.valid(param, mid) {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        inside
    }

    /// Sets `param` to `value` if the result stays valid.
    pub fn set(&mut self, param: &Parameter, value: f64) -> Result<(), ElicitationError> {
        self.check_param(param)?;
        if !self.valid(param, value) {
            let range = self.range(param)?;
            return Err(ElicitationError::OutOfRange { value, range });
        }
        self.spec = self.with(param, value);
        Ok(())
    }

    pub fn finish(self) -> SynergySpec {
        self.spec
    }
}
