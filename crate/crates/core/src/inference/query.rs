use serde::{Deserialize, Serialize};

use super::{joint_with_elimination_with, relevant_subgraph, InferenceConfig, InferenceError};
use crate::event::EventId;
use crate::model::CausalModel;

/// Conjunctive target under conjunctive evidence.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    #[serde(default)]
    pub targets: Vec<EventId>,
    #[serde(default)]
    pub evidence_true: Vec<EventId>,
    #[serde(default)]
    pub evidence_false: Vec<EventId>,
}

impl Query {
    pub fn new(targets: &[&str], evidence_true: &[&str], evidence_false: &[&str]) -> Self {
        let ids = |v: &[&str]| v.iter().map(|s| EventId::from(*s)).collect();
        Query {
            targets: ids(targets),
            evidence_true: ids(evidence_true),
            evidence_false: ids(evidence_false),
        }
    }

    /// Every id the query mentions, without duplicates, in first-seen order.
    pub fn ids(&self) -> Vec<&EventId> {
        let mut out: Vec<&EventId> = Vec::new();
        for id in self.targets.iter().chain(&self.evidence_true).chain(&self.evidence_false) {
            if !out.contains(&id) {
                out.push(id);
            }
        }
        out
    }

    pub fn check(&self, model: &CausalModel) -> Result<(), InferenceError> {
        for id in self.ids() {
            if model.index_of(id).is_none() {
                return Err(InferenceError::UnknownEvent(id.clone()));
            }
        }
        for id in &self.evidence_false {
            if self.targets.contains(id) || self.evidence_true.contains(id) {
                return Err(InferenceError::InvalidQuery(format!("`{id}` is required both true and false")));
            }
        }
        Ok(())
    }
}

/// `pr(targets | evidence)` by exact computation on the relevant submodel.
pub fn query(model: &CausalModel, q: &Query) -> Result<f64, InferenceError> {
    query_with(model, q, &InferenceConfig::default())
}

pub fn query_with(model: &CausalModel, q: &Query, config: &InferenceConfig) -> Result<f64, InferenceError> {
    q.check(model)?;
    let sub = relevant_subgraph(model, q)?;
    let keep: Vec<EventId> = q.ids().into_iter().cloned().collect();
    let (jd, _) = joint_with_elimination_with(&sub, &keep, config)?;
    let evidence = jd.prob(&q.evidence_true, &q.evidence_false)?;
    if evidence <= 0.0 {
        return Err(InferenceError::ZeroEvidence);
    }
    let mut both = q.targets.clone();
    both.extend(q.evidence_true.iter().cloned());
    let joint = jd.prob(&both, &q.evidence_false)?;
    Ok((joint / evidence).clamp(0.0, 1.0))
}
