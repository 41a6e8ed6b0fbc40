//! Brute-force enumeration, written against the document form only so that it
//! shares no code path with the level sweep.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{InferenceConfig, InferenceError, JointDistribution};
use crate::effectual::expand_synergy;
use crate::event::EventId;
use crate::model::{CausalModel, NodeKind, TableRow};

type Rows = Vec<(BTreeSet<usize>, f64)>;

struct Enumerator {
    /// Processes in an order where every trigger's causes come first.
    order: Vec<usize>,
    triggers: Vec<Vec<usize>>,
    effectual: Vec<Rows>,
    causal: Vec<Rows>,
    branches: u64,
    cap: u64,
    out: BTreeMap<Vec<bool>, f64>,
}

impl Enumerator {
    fn visit(&mut self, k: usize, state: &mut Vec<bool>, mass: f64) -> Result<(), InferenceError> {
        if mass == 0.0 {
            return Ok(());
        }
        let Some(&p) = self.order.get(k) else {
            self.branches += 1;
            if self.branches > self.cap {
                return Err(InferenceError::ModelTooLarge {
                    live: state.len(),
                    cap: state.len().min(64),
                });
            }
            *self.out.entry(state.clone()).or_insert(0.0) += mass;
            return Ok(());
        };
        let present: BTreeSet<usize> = self.triggers[p].iter().copied().filter(|&s| state[s]).collect();
        let e = self.effectual[p]
            .iter()
            .find(|(subset, _)| *subset == present)
            .map(|&(_, v)| v)
            .expect("validated tables cover every trigger subset");

        self.visit(k + 1, state, mass * (1.0 - e))?;

        state[p] = true;
        let rows = self.causal[p].clone();
        for (subset, w) in rows {
            let newly: Vec<usize> = subset.iter().copied().filter(|&s| !state[s]).collect();
            for &s in &newly {
                state[s] = true;
            }
            self.visit(k + 1, state, mass * e * w)?;
            for &s in &newly {
                state[s] = false;
            }
        }
        state[p] = false;
        Ok(())
    }
}

fn rows_of(index: &HashMap<EventId, usize>, rows: &[TableRow]) -> Rows {
    rows.iter()
        .map(|r| (r.subset.iter().map(|id| index[id]).collect(), r.p))
        .collect()
}

/// Enumerates every stochastic choice of the model and accumulates the mass
/// of each resulting atom. Exponential; meant for checking other engines on
/// small models.
pub fn brute_force_oracle(model: &CausalModel) -> Result<JointDistribution, InferenceError> {
    brute_force_oracle_with(model, &InferenceConfig::default())
}

pub fn brute_force_oracle_with(model: &CausalModel, config: &InferenceConfig) -> Result<JointDistribution, InferenceError> {
    let doc = model.to_doc();
    let n = doc.events.len();
    let index: HashMap<EventId, usize> = doc.events.iter().enumerate().map(|(i, e)| (e.id.clone(), i)).collect();
    let omega = index[&doc.omega];

    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut triggers: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut effects: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (p, s) in &doc.causes {
        parents[index[s]].push(index[p]);
        effects[index[p]].push(index[s]);
    }
    for (s, p) in &doc.triggers {
        parents[index[p]].push(index[s]);
        triggers[index[p]].push(index[s]);
    }

    // depth-first topological order
    let mut seen = vec![false; n];
    let mut order = Vec::new();
    fn place(i: usize, parents: &[Vec<usize>], seen: &mut [bool], order: &mut Vec<usize>) {
        if seen[i] {
            return;
        }
        seen[i] = true;
        for &q in &parents[i] {
            place(q, parents, seen, order);
        }
        order.push(i);
    }
    for i in 0..n {
        place(i, &parents, &mut seen, &mut order);
    }
    order.retain(|&i| doc.events[i].kind == NodeKind::Process);

    let mut effectual: Vec<Rows> = vec![Vec::new(); n];
    let mut causal: Vec<Rows> = vec![Vec::new(); n];
    for (id, rows) in &doc.effectual {
        effectual[index[id]] = rows_of(&index, rows);
    }
    for spec in &doc.synergy {
        let rows = expand_synergy(spec).map_err(|e| InferenceError::InvalidQuery(e.to_string()))?;
        effectual[index[&spec.target]] = rows_of(&index, &rows);
    }
    if effectual[omega].is_empty() {
        effectual[omega] = vec![(BTreeSet::new(), 1.0)];
    }
    for (id, rows) in &doc.causal {
        causal[index[id]] = rows_of(&index, rows);
    }
    for &p in &order {
        if causal[p].is_empty() && effects[p].is_empty() {
            causal[p] = vec![(BTreeSet::new(), 1.0)];
        }
    }

    let mut en = Enumerator {
        order,
        triggers,
        effectual,
        causal,
        branches: 0,
        cap: config.max_oracle_branches,
        out: BTreeMap::new(),
    };
    let mut state = vec![false; n];
    en.visit(0, &mut state, 1.0)?;

    let shown: Vec<usize> = (0..n).filter(|&i| !doc.events[i].id.is_reserved()).collect();
    let domain: Vec<EventId> = shown.iter().map(|&i| doc.events[i].id.clone()).collect();
    JointDistribution::from_atoms(
        domain,
        en.out.into_iter().map(|(state, m)| {
            let set = shown.iter().filter(|&&i| state[i]).map(|&i| doc.events[i].id.clone()).collect();
            (set, m)
        }),
    )
}
