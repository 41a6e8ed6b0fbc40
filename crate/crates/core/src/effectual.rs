//! Causal-independence formulas and the compressed effectual parameterization.
//!
//! A [`SynergySpec`] describes the probability that a target event occurs given
//! which of its candidate causes occurred, using one base probability per
//! cause, optional synergy terms for groups of co-occurring causes and optional
//! necessity terms for causes that did not occur:
//!
//! ```text
//! pr(x | E occurred, Ē absent) = [1 - Π_{e ⊆ E, e ≠ ∅} (1 - sy*(x/e))] · Π_{ē ∈ Ē} (1 - ne(x/ē))
//! ```
//!
//! where `sy*(x/e)` is the base probability for single causes and the synergy
//! term for larger groups. With all synergy and necessity terms at zero this
//! is the noisy-OR.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::event::{mask_members, EventId};
use crate::model::{CausalModel, NodeKind, TableRow};

/// Largest synergy group accepted by default.
pub const DEFAULT_SYNERGY_ORDER_CAP: usize = 3;

/// Validation enumerates every context, so the parent count is bounded.
pub const MAX_SYNERGY_PARENTS: usize = 20;

const TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("unknown cause `{0}`")]
    UnknownCause(EventId),
    #[error("probability {value} for `{cause}` is outside [0,1]")]
    OutOfRange { cause: EventId, value: f64 },
    #[error("invalid synergy spec: {}", first_violation(.0))]
    InvalidSpec(Vec<SynergyViolation>),
    #[error("`{0}` is not a simple event")]
    NotSimple(EventId),
    #[error("`{process}` is not a direct cause of `{event}`")]
    NotParent { process: EventId, event: EventId },
    #[error("unknown event `{0}`")]
    UnknownEvent(EventId),
    #[error("shape mismatch: {0}")]
    Shape(String),
}

fn first_violation(v: &[SynergyViolation]) -> String {
    match v.first() {
        Some(first) if v.len() > 1 => format!("{first} (and {} more)", v.len() - 1),
        Some(first) => first.to_string(),
        None => "no violations".to_string(),
    }
}

/// `1 - Π_{e ∈ occurred} (1 - base[e])`.
pub fn noisy_or(base: &BTreeMap<EventId, f64>, occurred: &[EventId]) -> Result<f64, AlgebraError> {
    let mut fail = 1.0;
    for cause in occurred {
        let p = *base
            .get(cause)
            .ok_or_else(|| AlgebraError::UnknownCause(cause.clone()))?;
        if !(0.0..=1.0).contains(&p) {
            return Err(AlgebraError::OutOfRange {
                cause: cause.clone(),
                value: p,
            });
        }
        fail *= 1.0 - p;
    }
    Ok(1.0 - fail)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynergyTerm {
    pub subset: Vec<EventId>,
    pub sy: f64,
}

/// Compressed effectual table for one target event.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynergySpec {
    pub target: EventId,
    pub parents: Vec<EventId>,
    pub base: BTreeMap<EventId, f64>,
    #[serde(default)]
    pub synergy: Vec<SynergyTerm>,
    #[serde(default)]
    pub necessity: BTreeMap<EventId, f64>,
}

impl SynergySpec {
    /// A pure noisy-OR spec: no synergy, no necessity.
    pub fn noisy_or(target: impl Into<EventId>, base: &[(&str, f64)]) -> Self {
        SynergySpec {
            target: target.into(),
            parents: base.iter().map(|(c, _)| EventId::from(*c)).collect(),
            base: base.iter().map(|(c, p)| (EventId::from(*c), *p)).collect(),
            synergy: Vec::new(),
            necessity: BTreeMap::new(),
        }
    }

    pub fn with_synergy(mut self, subset: &[&str], sy: f64) -> Self {
        self.set_synergy(subset.iter().map(|s| EventId::from(*s)).collect(), sy);
        self
    }

    pub fn with_necessity(mut self, cause: &str, ne: f64) -> Self {
        self.necessity.insert(cause.into(), ne);
        self
    }

    /// Replaces the synergy term for `subset` (order-insensitive), adding it if absent.
    pub fn set_synergy(&mut self, mut subset: Vec<EventId>, sy: f64) {
        subset.sort();
        for term in &mut self.synergy {
            let mut existing = term.subset.clone();
            existing.sort();
            if existing == subset {
                term.sy = sy;
                return;
            }
        }
        self.synergy.push(SynergyTerm { subset, sy });
    }

    pub fn synergy_value(&self, subset: &[EventId]) -> f64 {
        let wanted: BTreeSet<&EventId> = subset.iter().collect();
        self.synergy
            .iter()
            .find(|t| t.subset.iter().collect::<BTreeSet<_>>() == wanted)
            .map_or(0.0, |t| t.sy)
    }
}

/// Which constraint a synergy spec breaks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SynergyRule {
    /// Bad ids or missing base values.
    Malformed,
    /// A base probability outside `[0,1]`.
    BaseOutOfRange,
    /// Some `sy*` above one.
    SynergyAboveOne,
    /// `Π (1 - sy*)` over the subsets of an occurred set leaves `[0,1]`.
    OccurredProductOutOfRange,
    /// Some necessity value above one.
    NecessityAboveOne,
    /// `Π (1 - ne)` over an absent set leaves `[0,1]`.
    AbsentProductOutOfRange,
    /// The evaluated probability for some context leaves `[0,1]`.
    OutputOutOfRange,
    /// A synergy group larger than the configured cap.
    OrderCap,
}

impl fmt::Display for SynergyRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SynergyRule::Malformed => "Malformed",
            SynergyRule::BaseOutOfRange => "BaseOutOfRange",
            SynergyRule::SynergyAboveOne => "SynergyAboveOne",
            SynergyRule::OccurredProductOutOfRange => "OccurredProductOutOfRange",
            SynergyRule::NecessityAboveOne => "NecessityAboveOne",
            SynergyRule::AbsentProductOutOfRange => "AbsentProductOutOfRange",
            SynergyRule::OutputOutOfRange => "OutputOutOfRange",
            SynergyRule::OrderCap => "OrderCap",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynergyViolation {
    pub rule: SynergyRule,
    /// The cause subset (or context) at which the rule fails.
    pub subset: Vec<EventId>,
    pub value: f64,
    pub message: String,
}

impl fmt::Display for SynergyViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} at {{{}}}: {}",
            self.rule,
            crate::event::format_subset(&self.subset).trim_matches(|c| c == '{' || c == '}'),
            self.message
        )
    }
}

/// Spec with every id resolved to a bit position in a fixed parent order.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct CompiledSynergy {
    base: Vec<f64>,
    terms: Vec<(u64, f64)>,
    necessity: Vec<f64>,
}

impl CompiledSynergy {
    /// Resolves ids against `order`. Assumes the spec is well-formed.
    pub(crate) fn compile(spec: &SynergySpec, order: &[EventId]) -> Self {
        let pos = |id: &EventId| order.iter().position(|o| o == id);
        let base = order
            .iter()
            .map(|id| spec.base.get(id).copied().unwrap_or(0.0))
            .collect();
        let necessity = order
            .iter()
            .map(|id| spec.necessity.get(id).copied().unwrap_or(0.0))
            .collect();
        let terms = spec
            .synergy
            .iter()
            .filter_map(|t| {
                let mut mask = 0u64;
                for id in &t.subset {
                    mask |= 1 << pos(id)?;
                }
                Some((mask, t.sy))
            })
            .collect();
        CompiledSynergy {
            base,
            terms,
            necessity,
        }
    }

    pub(crate) fn arity(&self) -> usize {
        self.base.len()
    }

    /// `Π_{e ⊆ occurred, e ≠ ∅} (1 - sy*(e))`.
    fn occurred_product(&self, occurred: u64) -> f64 {
        let mut prod = 1.0;
        for (i, b) in self.base.iter().enumerate() {
            if occurred >> i & 1 == 1 {
                prod *= 1.0 - b;
            }
        }
        for &(mask, sy) in &self.terms {
            if mask & occurred == mask {
                prod *= 1.0 - sy;
            }
        }
        prod
    }

    fn absent_product(&self, absent: u64) -> f64 {
        let mut prod = 1.0;
        for (i, ne) in self.necessity.iter().enumerate() {
            if absent >> i & 1 == 1 {
                prod *= 1.0 - ne;
            }
        }
        prod
    }

    pub(crate) fn eval(&self, occurred: u64) -> f64 {
        let full = (1u64 << self.arity()) - 1;
        (1.0 - self.occurred_product(occurred)) * self.absent_product(full & !occurred)
    }
}

pub fn validate_synergy(spec: &SynergySpec) -> Vec<SynergyViolation> {
    validate_synergy_with(spec, DEFAULT_SYNERGY_ORDER_CAP)
}

/// Checks a spec; an empty result means every context evaluates to a probability.
pub fn validate_synergy_with(spec: &SynergySpec, order_cap: usize) -> Vec<SynergyViolation> {
    let mut out = Vec::new();
    let malformed = |subset: Vec<EventId>, message: String| SynergyViolation {
        rule: SynergyRule::Malformed,
        subset,
        value: f64::NAN,
        message,
    };

    let parents: BTreeSet<&EventId> = spec.parents.iter().collect();
    if parents.len() != spec.parents.len() {
        out.push(malformed(spec.parents.clone(), "duplicate parent".into()));
    }
    if parents.contains(&spec.target) {
        out.push(malformed(vec![spec.target.clone()], "target listed as its own parent".into()));
    }
    if spec.parents.len() > MAX_SYNERGY_PARENTS {
        out.push(malformed(
            Vec::new(),
            format!("{} parents exceeds the limit of {MAX_SYNERGY_PARENTS}", spec.parents.len()),
        ));
    }
    for p in &spec.parents {
        if !spec.base.contains_key(p) {
            out.push(malformed(vec![p.clone()], "missing base probability".into()));
        }
    }
    for id in spec.base.keys().chain(spec.necessity.keys()) {
        if !parents.contains(id) {
            out.push(malformed(vec![id.clone()], "not a parent of the target".into()));
        }
    }
    let mut seen_terms = BTreeSet::new();
    for term in &spec.synergy {
        let set: BTreeSet<&EventId> = term.subset.iter().collect();
        if set.len() < 2 || set.len() != term.subset.len() {
            out.push(malformed(term.subset.clone(), "synergy groups need two or more distinct causes".into()));
        }
        if let Some(unknown) = term.subset.iter().find(|id| !parents.contains(id)) {
            out.push(malformed(term.subset.clone(), format!("`{unknown}` is not a parent")));
        }
        if !seen_terms.insert(set) {
            out.push(malformed(term.subset.clone(), "duplicate synergy group".into()));
        }
        if term.subset.len() > order_cap {
            out.push(SynergyViolation {
                rule: SynergyRule::OrderCap,
                subset: term.subset.clone(),
                value: term.sy,
                message: format!("group size {} exceeds cap {order_cap}", term.subset.len()),
            });
        }
    }
    if !out.is_empty() {
        return out;
    }

    for (cause, &p) in &spec.base {
        if !(0.0..=1.0).contains(&p) {
            out.push(SynergyViolation {
                rule: if p > 1.0 {
                    SynergyRule::SynergyAboveOne
                } else {
                    SynergyRule::BaseOutOfRange
                },
                subset: vec![cause.clone()],
                value: p,
                message: format!("base probability {p} outside [0,1]"),
            });
        }
    }
    for term in &spec.synergy {
        if !term.sy.is_finite() || term.sy > 1.0 {
            out.push(SynergyViolation {
                rule: SynergyRule::SynergyAboveOne,
                subset: sorted(&term.subset),
                value: term.sy,
                message: format!("synergy {} exceeds 1", term.sy),
            });
        }
    }
    for (cause, &ne) in &spec.necessity {
        if !ne.is_finite() || ne > 1.0 {
            out.push(SynergyViolation {
                rule: SynergyRule::NecessityAboveOne,
                subset: vec![cause.clone()],
                value: ne,
                message: format!("necessity {ne} exceeds 1"),
            });
        }
    }

    let order = &spec.parents;
    let compiled = CompiledSynergy::compile(spec, order);
    let n = order.len();
    let in_unit = |v: f64| (-TOL..=1.0 + TOL).contains(&v);
    for mask in 0u64..(1u64 << n) {
        let ids = || mask_members(order, mask).cloned().collect::<Vec<_>>();
        let occ = compiled.occurred_product(mask);
        if !in_unit(occ) {
            out.push(SynergyViolation {
                rule: SynergyRule::OccurredProductOutOfRange,
                subset: sorted(&ids()),
                value: occ,
                message: format!("failure product {occ} for this occurred set is outside [0,1]"),
            });
        }
        let abs = compiled.absent_product(mask);
        if !in_unit(abs) {
            out.push(SynergyViolation {
                rule: SynergyRule::AbsentProductOutOfRange,
                subset: sorted(&ids()),
                value: abs,
                message: format!("necessity product {abs} for this absent set is outside [0,1]"),
            });
        }
        let v = compiled.eval(mask);
        if !in_unit(v) {
            out.push(SynergyViolation {
                rule: SynergyRule::OutputOutOfRange,
                subset: sorted(&ids()),
                value: v,
                message: format!("probability {v} for this occurred set is outside [0,1]"),
            });
        }
    }
    out
}

fn sorted(ids: &[EventId]) -> Vec<EventId> {
    let mut v = ids.to_vec();
    v.sort();
    v
}

fn occurred_mask(spec: &SynergySpec, occurred: &[EventId]) -> Result<u64, AlgebraError> {
    let mut mask = 0u64;
    for id in occurred {
        let i = spec
            .parents
            .iter()
            .position(|p| p == id)
            .ok_or_else(|| AlgebraError::UnknownCause(id.clone()))?;
        mask |= 1 << i;
    }
    Ok(mask)
}

/// Probability of the target when exactly `occurred` among the parents occurred.
pub fn eval_synergy(spec: &SynergySpec, occurred: &[EventId]) -> Result<f64, AlgebraError> {
    let violations = validate_synergy(spec);
    if !violations.is_empty() {
        return Err(AlgebraError::InvalidSpec(violations));
    }
    let mask = occurred_mask(spec, occurred)?;
    Ok(CompiledSynergy::compile(spec, &spec.parents)
        .eval(mask)
        .clamp(0.0, 1.0))
}

/// Expands a spec into one explicit row per occurred-subset of its parents.
///
/// Rows are listed in binary-counting order over `spec.parents`; each subset
/// is sorted by id.
pub fn expand_synergy(spec: &SynergySpec) -> Result<Vec<TableRow>, AlgebraError> {
    let violations = validate_synergy(spec);
    if !violations.is_empty() {
        return Err(AlgebraError::InvalidSpec(violations));
    }
    let compiled = CompiledSynergy::compile(spec, &spec.parents);
    Ok((0u64..(1u64 << spec.parents.len()))
        .map(|mask| TableRow {
            subset: sorted(&mask_members(&spec.parents, mask).cloned().collect::<Vec<_>>()),
            p: compiled.eval(mask).clamp(0.0, 1.0),
        })
        .collect())
}

/// Probability that simple event `s` occurs when exactly `occurred_causes`
/// among its direct causes occurred, assuming causes act independently:
/// `1 - Π_a (1 - p̃r(s/a))`, with `p̃r(s/a)` the marginal chance that `a`
/// causes `s`.
pub fn single_effect_prob(
    model: &CausalModel,
    s: &EventId,
    occurred_causes: &[EventId],
) -> Result<f64, AlgebraError> {
    let si = model
        .index_of(s)
        .ok_or_else(|| AlgebraError::UnknownEvent(s.clone()))?;
    if model.kind(si) != NodeKind::Simple {
        return Err(AlgebraError::NotSimple(s.clone()));
    }
    let mut fail = 1.0;
    for a in occurred_causes {
        let ai = model
            .index_of(a)
            .ok_or_else(|| AlgebraError::UnknownEvent(a.clone()))?;
        if !model.causes_of(si).contains(&ai) {
            return Err(AlgebraError::NotParent {
                process: a.clone(),
                event: s.clone(),
            });
        }
        fail *= 1.0 - model.causal_marginal(ai, si);
    }
    Ok(1.0 - fail)
}

/// Causal-table marginals for the two-cause fragment where `a` causes `{x, y}`
/// and `b` causes only `y`.
///
/// [`CoOccurrenceShape::independent_failure_estimate`] evaluates `pr(a∧x∧y)`
/// by treating "a causes both" and "a causes only x while b causes y" as
/// independent failures. Those two outcomes of `a`'s causal table are
/// mutually exclusive, so the estimate undercounts the engine's value by
/// `pr(ab) · p̃r(xy/a) · p̃r(xȳ/a) · p̃r(y/b)`. It is kept as a comparison
/// value only; [`CoOccurrenceShape::union_value`] is what the inference engine computes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoOccurrenceShape {
    /// `p̃r(xy/a)`
    pub a_causes_xy: f64,
    /// `p̃r(xȳ/a)`
    pub a_causes_x_only: f64,
    /// `p̃r(y/b)`
    pub b_causes_y: f64,
}

impl CoOccurrenceShape {
    pub fn from_model(
        model: &CausalModel,
        a: &EventId,
        b: &EventId,
        x: &EventId,
        y: &EventId,
    ) -> Result<Self, AlgebraError> {
        let idx = |id: &EventId| {
            model
                .index_of(id)
                .ok_or_else(|| AlgebraError::UnknownEvent(id.clone()))
        };
        let (ai, bi, xi, yi) = (idx(a)?, idx(b)?, idx(x)?, idx(y)?);
        let same = |got: &[usize], mut want: Vec<usize>| {
            let mut g = got.to_vec();
            g.sort_unstable();
            want.sort_unstable();
            g == want
        };
        if model.kind(ai) != NodeKind::Process || model.kind(bi) != NodeKind::Process {
            return Err(AlgebraError::Shape("a and b must be processes".into()));
        }
        if !same(model.effects_of(ai), vec![xi, yi]) {
            return Err(AlgebraError::Shape(format!("`{a}` must cause exactly {{{x},{y}}}")));
        }
        if !same(model.effects_of(bi), vec![yi]) {
            return Err(AlgebraError::Shape(format!("`{b}` must cause exactly {{{y}}}")));
        }
        if !same(model.causes_of(xi), vec![ai]) || !same(model.causes_of(yi), vec![ai, bi]) {
            return Err(AlgebraError::Shape(format!(
                "`{x}` must be caused only by `{a}` and `{y}` only by `{a}` and `{b}`"
            )));
        }
        let a_table = model.causal_rows(ai);
        let row = |want: &[&EventId]| {
            a_table
                .iter()
                .find(|r| r.subset.len() == want.len() && want.iter().all(|w| r.subset.contains(w)))
                .map_or(0.0, |r| r.p)
        };
        Ok(CoOccurrenceShape {
            a_causes_xy: row(&[x, y]),
            a_causes_x_only: row(&[x]),
            b_causes_y: model.causal_marginal(bi, yi),
        })
    }

    /// Independent-failure estimate of `pr(a∧x∧y)`.
    pub fn independent_failure_estimate(&self, pr_ab: f64, pr_a_not_b: f64) -> f64 {
        let both = 1.0 - (1.0 - self.a_causes_xy) * (1.0 - self.a_causes_x_only * self.b_causes_y);
        both * pr_ab + self.a_causes_xy * pr_a_not_b
    }

    /// `pr(a∧x∧y)` under union semantics.
    pub fn union_value(&self, pr_ab: f64, pr_a_not_b: f64) -> f64 {
        pr_ab * (self.a_causes_xy + self.a_causes_x_only * self.b_causes_y)
            + pr_a_not_b * self.a_causes_xy
    }

    /// `union_value - independent_failure_estimate`.
    pub fn discrepancy(&self, pr_ab: f64) -> f64 {
        pr_ab * self.a_causes_xy * self.a_causes_x_only * self.b_causes_y
    }
}
