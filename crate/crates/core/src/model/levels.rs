use std::collections::BTreeMap;

use super::causal_model::CausalModel;
use super::doc::NodeKind;
use crate::event::EventId;

/// Longest-path distance of every event from the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelAssignment {
    levels: Vec<usize>,
    ids: Vec<EventId>,
    depth: usize,
}

impl LevelAssignment {
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Level by event index.
    pub fn level(&self, i: usize) -> usize {
        self.levels[i]
    }

    pub fn level_of(&self, id: &EventId) -> Option<usize> {
        self.ids.iter().position(|e| e == id).map(|i| self.levels[i])
    }

    pub fn as_map(&self) -> BTreeMap<EventId, usize> {
        self.ids.iter().cloned().zip(self.levels.iter().copied()).collect()
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }
}

/// Outgoing edges of `i`, whatever its kind.
pub(crate) fn children(model: &CausalModel, i: usize) -> &[usize] {
    match model.kind(i) {
        NodeKind::Process => model.effects_of(i),
        NodeKind::Simple => model.triggered_by(i),
    }
}

pub(crate) fn parents(model: &CausalModel, i: usize) -> &[usize] {
    match model.kind(i) {
        NodeKind::Process => model.triggers_of(i),
        NodeKind::Simple => model.causes_of(i),
    }
}

/// Kahn order; ties broken by event index.
pub(crate) fn topological_order(model: &CausalModel) -> Vec<usize> {
    let n = model.len();
    let mut indegree: Vec<usize> = (0..n).map(|i| parents(model, i).len()).collect();
    let mut ready: std::collections::BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = ready.pop_first() {
        order.push(i);
        for &c in children(model, i) {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.insert(c);
            }
        }
    }
    debug_assert_eq!(order.len(), n, "validated models are acyclic");
    order
}

pub fn assign_levels(model: &CausalModel) -> LevelAssignment {
    let mut levels = vec![0usize; model.len()];
    for i in topological_order(model) {
        for &c in children(model, i) {
            levels[c] = levels[c].max(levels[i] + 1);
        }
    }
    LevelAssignment {
        depth: levels.iter().copied().max().unwrap_or(0),
        ids: model.events().iter().map(|e| e.id.clone()).collect(),
        levels,
    }
}
