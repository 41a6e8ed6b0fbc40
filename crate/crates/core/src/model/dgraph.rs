use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::causal_model::CausalModel;
use super::doc::{DocBuilder, TableRow};
use crate::event::{format_subset, mask_members, EventId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ImportError {
    #[error("variable `{id}` has {arity} states; only binary variables can be imported")]
    NonBinary { id: EventId, arity: u32 },
    #[error("invalid net: {0}")]
    Invalid(String),
}

/// One CPT row: probability the variable is true given exactly the listed
/// parents are true.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CptRow {
    pub given: Vec<EventId>,
    pub p: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetVariable {
    pub id: EventId,
    #[serde(default = "binary")]
    pub arity: u32,
    #[serde(default)]
    pub parents: Vec<EventId>,
    pub cpt: Vec<CptRow>,
}

fn binary() -> u32 {
    2
}

/// A binary Bayes net with CPT rows keyed by parent-true subsets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteBayesNet {
    pub variables: Vec<NetVariable>,
}

impl DiscreteBayesNet {
    pub fn from_json(text: &str) -> Result<Self, ImportError> {
        serde_json::from_str(text).map_err(|e| ImportError::Invalid(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("nets always serialize")
    }

    pub fn edge_count(&self) -> usize {
        self.variables.iter().map(|v| v.parents.len()).sum()
    }

    /// Checks that every variable is binary and the net is well formed.
    pub fn validate(&self) -> Result<(), ImportError> {
        let mut pos = HashMap::new();
        for (i, v) in self.variables.iter().enumerate() {
            if v.arity != 2 {
                return Err(ImportError::NonBinary {
                    id: v.id.clone(),
                    arity: v.arity,
                });
            }
            if !v.id.is_well_formed() || v.id.is_reserved() {
                return Err(ImportError::Invalid(format!("bad variable id `{}`", v.id)));
            }
            if pos.insert(&v.id, i).is_some() {
                return Err(ImportError::Invalid(format!("variable `{}` declared twice", v.id)));
            }
        }
        for v in &self.variables {
            let parents: BTreeSet<&EventId> = v.parents.iter().collect();
            if parents.len() != v.parents.len() {
                return Err(ImportError::Invalid(format!("`{}` lists a parent twice", v.id)));
            }
            if let Some(p) = v.parents.iter().find(|p| !pos.contains_key(p)) {
                return Err(ImportError::Invalid(format!("`{}` has unknown parent `{p}`", v.id)));
            }
            let mut keys = BTreeSet::new();
            for row in &v.cpt {
                let key: BTreeSet<&EventId> = row.given.iter().collect();
                if key.iter().any(|g| !parents.contains(g)) {
                    return Err(ImportError::Invalid(format!(
                        "`{}` CPT row {{{}}} names a non-parent",
                        v.id,
                        format_subset(&row.given)
                    )));
                }
                if !row.p.is_finite() || !(0.0..=1.0).contains(&row.p) {
                    return Err(ImportError::Invalid(format!("`{}` CPT value {} outside [0,1]", v.id, row.p)));
                }
                if !keys.insert(key) {
                    return Err(ImportError::Invalid(format!("`{}` repeats a CPT row", v.id)));
                }
            }
            if keys.len() != 1 << v.parents.len() {
                return Err(ImportError::Invalid(format!(
                    "`{}` CPT has {} of {} rows",
                    v.id,
                    keys.len(),
                    1 << v.parents.len()
                )));
            }
        }
        self.topological_order().map(|_| ())
    }

    fn topological_order(&self) -> Result<Vec<usize>, ImportError> {
        let pos: HashMap<&EventId, usize> = self.variables.iter().enumerate().map(|(i, v)| (&v.id, i)).collect();
        let mut order = Vec::new();
        let mut state = vec![0u8; self.variables.len()];
        fn visit(
            i: usize,
            net: &DiscreteBayesNet,
            pos: &HashMap<&EventId, usize>,
            state: &mut [u8],
            order: &mut Vec<usize>,
        ) -> Result<(), ImportError> {
            match state[i] {
                2 => return Ok(()),
                1 => return Err(ImportError::Invalid(format!("cycle through `{}`", net.variables[i].id))),
                _ => {}
            }
            state[i] = 1;
            for p in &net.variables[i].parents {
                visit(pos[p], net, pos, state, order)?;
            }
            state[i] = 2;
            order.push(i);
            Ok(())
        }
        for i in 0..self.variables.len() {
            visit(i, self, &pos, &mut state, &mut order)?;
        }
        Ok(order)
    }

    fn cpt_value(&self, var: usize, true_parents: &BTreeSet<&EventId>) -> f64 {
        self.variables[var]
            .cpt
            .iter()
            .find(|r| r.given.len() == true_parents.len() && r.given.iter().all(|g| true_parents.contains(g)))
            .map_or(0.0, |r| r.p)
    }

    /// Joint probability of every assignment, by direct enumeration.
    /// Keys are the sets of true variables.
    pub fn enumerate_joint(&self) -> Result<BTreeMap<BTreeSet<EventId>, f64>, ImportError> {
        self.validate()?;
        let n = self.variables.len();
        if n > 20 {
            return Err(ImportError::Invalid(format!("{n} variables is too many to enumerate")));
        }
        let mut out = BTreeMap::new();
        for mask in 0u64..(1 << n) {
            let truth: BTreeSet<&EventId> = mask_members(&self.variables, mask).map(|v| &v.id).collect();
            let mut prob = 1.0;
            for (i, v) in self.variables.iter().enumerate() {
                let parents_true: BTreeSet<&EventId> = v.parents.iter().filter(|p| truth.contains(p)).collect();
                let p = self.cpt_value(i, &parents_true);
                prob *= if mask >> i & 1 == 1 { p } else { 1.0 - p };
            }
            if prob > 0.0 {
                out.insert(truth.into_iter().cloned().collect(), prob);
            }
        }
        Ok(out)
    }
}

/// Name of the simple event inserted on the net edge `from -> to`.
pub fn edge_event(from: &EventId, to: &EventId) -> EventId {
    EventId::new(format!("s[{from}->{to}]"))
}

/// Name of the root-caused trigger of a parentless variable.
pub fn prior_event(var: &EventId) -> EventId {
    EventId::new(format!("t[{var}]"))
}

/// Converts a binary Bayes net into an equivalent causal model.
///
/// Every variable becomes a process. Every net edge `u -> v` becomes a simple
/// event `s[u->v]` caused by `u` and triggering `v`; each process causes all
/// of its out-edge events with probability one. Effectual tables are the
/// CPTs, with a trigger subset standing for the set of true parents.
/// Parentless variables get a trigger `t[v]` caused by the root, whose causal
/// table is the product of their priors.
pub fn import_dgraph(net: &DiscreteBayesNet) -> Result<CausalModel, ImportError> {
    net.validate()?;
    let ids: BTreeSet<&EventId> = net.variables.iter().map(|v| &v.id).collect();
    let mut omega = String::from("omega");
    while ids.contains(&EventId::new(omega.clone())) {
        omega.push('_');
    }

    let mut b = DocBuilder::new(&omega);
    let roots: Vec<&NetVariable> = net.variables.iter().filter(|v| v.parents.is_empty()).collect();
    for v in &net.variables {
        b = b.process(v.id.as_str());
    }
    for v in &roots {
        let t = prior_event(&v.id);
        b = b.simple(t.as_str()).causes(&omega, t.as_str()).triggers(t.as_str(), v.id.as_str());
    }
    for v in &net.variables {
        for u in &v.parents {
            let s = edge_event(u, &v.id);
            b = b
                .simple(s.as_str())
                .causes(u.as_str(), s.as_str())
                .triggers(s.as_str(), v.id.as_str());
        }
    }
    let mut doc = b.build();

    // Root prior: product of the independent root priors.
    let prior: Vec<(EventId, f64)> = roots.iter().map(|v| (prior_event(&v.id), v.cpt[0].p)).collect();
    let mut rows = Vec::with_capacity(1 << prior.len());
    for mask in 0u64..(1 << prior.len()) {
        let mut p = 1.0;
        let mut subset = Vec::new();
        for (i, (t, q)) in prior.iter().enumerate() {
            if mask >> i & 1 == 1 {
                p *= q;
                subset.push(t.clone());
            } else {
                p *= 1.0 - q;
            }
        }
        subset.sort();
        rows.push(TableRow { subset, p });
    }
    doc.causal.insert(doc.omega.clone(), rows);

    for v in &net.variables {
        let effectual = if v.parents.is_empty() {
            vec![
                TableRow {
                    subset: vec![],
                    p: 0.0,
                },
                TableRow {
                    subset: vec![prior_event(&v.id)],
                    p: 1.0,
                },
            ]
        } else {
            v.cpt
                .iter()
                .map(|row| {
                    let mut subset: Vec<EventId> = row.given.iter().map(|g| edge_event(g, &v.id)).collect();
                    subset.sort();
                    TableRow { subset, p: row.p }
                })
                .collect()
        };
        doc.effectual.insert(v.id.clone(), effectual);

        let mut out: Vec<EventId> = net
            .variables
            .iter()
            .filter(|w| w.parents.contains(&v.id))
            .map(|w| edge_event(&v.id, &w.id))
            .collect();
        if !out.is_empty() {
            out.sort();
            let all = (1usize << out.len()) - 1;
            let causal = (0..=all as u64)
                .map(|mask| TableRow {
                    subset: mask_members(&out, mask).cloned().collect(),
                    p: if mask as usize == all { 1.0 } else { 0.0 },
                })
                .collect();
            doc.causal.insert(v.id.clone(), causal);
        }
    }

    CausalModel::from_doc(&doc).map_err(|e| ImportError::Invalid(e.to_string()))
}
