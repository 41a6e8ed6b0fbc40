use std::collections::BTreeSet;

use super::{InferenceError, Query};
use crate::event::EventId;
use crate::model::{CausalModel, NodeKind};

/// Submodel sufficient to answer `q`.
///
/// Keeps the root plus the ancestors of every query and evidence event. A
/// kept process keeps all of its effects so its causal table stays whole.
/// Anything else only lies downstream of kept events without being observed,
/// and summing it out leaves the kept marginal unchanged.
pub fn relevant_subgraph(model: &CausalModel, q: &Query) -> Result<CausalModel, InferenceError> {
    let mut keep = vec![false; model.len()];
    let mut stack = vec![model.omega()];
    for id in q.ids() {
        stack.push(model.index_of(id).ok_or_else(|| InferenceError::UnknownEvent(id.clone()))?);
    }
    while let Some(i) = stack.pop() {
        if std::mem::replace(&mut keep[i], true) {
            continue;
        }
        match model.kind(i) {
            NodeKind::Process => stack.extend_from_slice(model.triggers_of(i)),
            NodeKind::Simple => stack.extend_from_slice(model.causes_of(i)),
        }
    }
    for p in model.processes().filter(|&p| keep[p]).collect::<Vec<_>>() {
        for &s in model.effects_of(p) {
            keep[s] = true;
        }
    }
    if keep.iter().all(|&k| k) {
        return Ok(model.clone());
    }

    let ids: BTreeSet<&EventId> = (0..model.len()).filter(|&i| keep[i]).map(|i| model.id(i)).collect();
    let mut doc = model.to_doc();
    doc.events.retain(|e| ids.contains(&e.id));
    doc.causes.retain(|(p, s)| ids.contains(p) && ids.contains(s));
    doc.triggers.retain(|(s, p)| ids.contains(s) && ids.contains(p));
    doc.effectual.retain(|p, _| ids.contains(p));
    doc.causal.retain(|p, _| ids.contains(p));
    doc.synergy.retain(|spec| ids.contains(&spec.target));
    Ok(CausalModel::from_doc_with(&doc, true).expect("ancestral closure of a valid model is valid"))
}
