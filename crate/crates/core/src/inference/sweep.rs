//! Exact joint computation by level sweep.
//!
//! Processes are visited level by level (the root is the level-0 process).
//! At each level every process is first split on whether it occurs, using its
//! effectual value at the exact set of triggers present in the atom; then
//! every occurred process redistributes its atoms over the subsets of its
//! effects with the causal-table weights, merging by set union. Processes
//! that did not occur pass their atoms through unchanged. Applying occurred
//! processes one after another with `+=` accumulation is what makes distinct
//! causes act independently on a shared effect.
//!
//! With elimination enabled, an event outside the kept set is summed out at
//! the end of the level at which its last dependent was placed.

use std::collections::BTreeMap;

use super::{InferenceConfig, InferenceError, JointDistribution};
use crate::event::EventId;
use crate::model::{assign_levels, CausalModel, NodeKind};

/// Instrumentation from one sweep.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SweepStats {
    pub peak_live_events: usize,
    pub peak_atoms: usize,
    /// Atoms whose mass came out below zero and were reset to zero.
    pub clamped: usize,
}

struct Sweep<'m> {
    model: &'m CausalModel,
    slot: Vec<Option<u32>>,
    free: Vec<u32>,
    live: usize,
    cap: usize,
    atoms: BTreeMap<u64, f64>,
    stats: SweepStats,
}

impl<'m> Sweep<'m> {
    fn new(model: &'m CausalModel, cap: usize) -> Self {
        let cap = cap.min(64);
        Sweep {
            model,
            slot: vec![None; model.len()],
            free: (0..64).rev().collect(),
            live: 0,
            cap,
            atoms: BTreeMap::from([(0u64, 1.0)]),
            stats: SweepStats::default(),
        }
    }

    fn bit(&self, e: usize) -> u64 {
        1u64 << self.slot[e].expect("event is live")
    }

    fn introduce(&mut self, e: usize) -> Result<(), InferenceError> {
        if self.slot[e].is_some() {
            return Ok(());
        }
        if self.live + 1 > self.cap {
            return Err(InferenceError::ModelTooLarge {
                live: self.live + 1,
                cap: self.cap,
            });
        }
        self.slot[e] = self.free.pop();
        self.live += 1;
        self.stats.peak_live_events = self.stats.peak_live_events.max(self.live);
        Ok(())
    }

    fn eliminate(&mut self, e: usize) {
        let Some(s) = self.slot[e].take() else { return };
        let clear = !(1u64 << s);
        let mut merged = BTreeMap::new();
        for (&j, &m) in &self.atoms {
            *merged.entry(j & clear).or_insert(0.0) += m;
        }
        self.atoms = merged;
        self.free.push(s);
        self.free.sort_unstable_by(|a, b| b.cmp(a));
        self.live -= 1;
    }

    fn record(&mut self) {
        self.stats.peak_atoms = self.stats.peak_atoms.max(self.atoms.len());
    }

    fn push(&mut self, next: &mut BTreeMap<u64, f64>, j: u64, m: f64) {
        if m > 0.0 {
            *next.entry(j).or_insert(0.0) += m;
        } else if m < 0.0 {
            self.stats.clamped += 1;
        }
    }

    /// Splits every atom on whether `p` occurs.
    fn occurrence(&mut self, p: usize) -> Result<(), InferenceError> {
        self.introduce(p)?;
        let pbit = self.bit(p);
        let triggers: Vec<u64> = self.model.triggers_of(p).iter().map(|&s| self.bit(s)).collect();
        let mut next = BTreeMap::new();
        for (j, m) in std::mem::take(&mut self.atoms) {
            let present = triggers
                .iter()
                .enumerate()
                .fold(0u64, |acc, (i, &b)| if j & b != 0 { acc | 1 << i } else { acc });
            let e = self.model.effectual_prob(p, present);
            self.push(&mut next, j | pbit, m * e);
            self.push(&mut next, j, m * (1.0 - e));
        }
        self.atoms = next;
        self.record();
        Ok(())
    }

    /// Redistributes atoms in which `p` occurred over its caused subsets.
    fn causation(&mut self, p: usize) -> Result<(), InferenceError> {
        for &s in self.model.effects_of(p) {
            self.introduce(s)?;
        }
        let pbit = self.bit(p);
        let effect_bits: Vec<u64> = self.model.effects_of(p).iter().map(|&s| self.bit(s)).collect();
        let table = self.model.causal_table(p);
        let caused: Vec<(u64, f64)> = table
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(k, &w)| {
                let bits = effect_bits
                    .iter()
                    .enumerate()
                    .fold(0u64, |acc, (i, &b)| if k >> i & 1 == 1 { acc | b } else { acc });
                (bits, w)
            })
            .collect();
        let mut next = BTreeMap::new();
        for (j, m) in std::mem::take(&mut self.atoms) {
            if j & pbit == 0 {
                self.push(&mut next, j, m);
                continue;
            }
            for &(bits, w) in &caused {
                self.push(&mut next, j | bits, m * w);
            }
        }
        self.atoms = next;
        self.record();
        Ok(())
    }

    /// Re-keys the live atoms onto `domain` (every domain event must be live).
    fn finish(self, domain: Vec<EventId>, positions: &[usize]) -> (JointDistribution, SweepStats) {
        let bits: Vec<u64> = positions.iter().map(|&e| self.bit(e)).collect();
        let mut atoms = BTreeMap::new();
        for (&j, &m) in &self.atoms {
            let key = bits
                .iter()
                .enumerate()
                .fold(0u64, |acc, (i, &b)| if j & b != 0 { acc | 1 << i } else { acc });
            *atoms.entry(key).or_insert(0.0) += m;
        }
        (JointDistribution::from_parts(domain, atoms), self.stats)
    }
}

fn run(
    model: &CausalModel,
    keep: &[usize],
    eliminate_early: bool,
    config: &InferenceConfig,
) -> Result<(JointDistribution, SweepStats), InferenceError> {
    let levels = assign_levels(model);
    let mut by_level: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for p in model.processes() {
        by_level.entry(levels.level(p)).or_default().push(p);
    }
    let kept: Vec<bool> = (0..model.len()).map(|i| keep.contains(&i)).collect();

    // Level after which nothing reads the event any more.
    let retire_level: Vec<usize> = (0..model.len())
        .map(|e| match model.kind(e) {
            NodeKind::Process => levels.level(e),
            NodeKind::Simple => model
                .causes_of(e)
                .iter()
                .chain(model.triggered_by(e))
                .map(|&p| levels.level(p))
                .max()
                .unwrap_or(0),
        })
        .collect();

    let mut sweep = Sweep::new(model, config.max_live_events);
    for (&level, processes) in &by_level {
        for &p in processes {
            sweep.occurrence(p)?;
        }
        for &p in processes {
            sweep.causation(p)?;
        }
        if eliminate_early {
            for e in 0..model.len() {
                if !kept[e] && sweep.slot[e].is_some() && retire_level[e] <= level {
                    sweep.eliminate(e);
                }
            }
            sweep.record();
        }
    }
    for (e, _) in kept.iter().enumerate().filter(|(_, &k)| !k) {
        sweep.eliminate(e);
    }
    let domain = keep.iter().map(|&e| model.id(e).clone()).collect();
    Ok(sweep.finish(domain, keep))
}

/// Joint distribution over every event except inserted pass-through nodes.
pub fn joint_distribution(model: &CausalModel) -> Result<JointDistribution, InferenceError> {
    joint_distribution_with(model, &InferenceConfig::default()).map(|(jd, _)| jd)
}

pub fn joint_distribution_with(
    model: &CausalModel,
    config: &InferenceConfig,
) -> Result<(JointDistribution, SweepStats), InferenceError> {
    let keep: Vec<usize> = (0..model.len()).filter(|&i| !model.id(i).is_reserved()).collect();
    run(model, &keep, false, config)
}

/// Marginal joint over `keep`, summing events out as soon as they retire.
pub fn joint_with_elimination(model: &CausalModel, keep: &[EventId]) -> Result<JointDistribution, InferenceError> {
    joint_with_elimination_with(model, keep, &InferenceConfig::default()).map(|(jd, _)| jd)
}

pub fn joint_with_elimination_with(
    model: &CausalModel,
    keep: &[EventId],
    config: &InferenceConfig,
) -> Result<(JointDistribution, SweepStats), InferenceError> {
    let mut idx = Vec::with_capacity(keep.len());
    for id in keep {
        let i = model
            .index_of(id)
            .ok_or_else(|| InferenceError::UnknownEvent(id.clone()))?;
        if !idx.contains(&i) {
            idx.push(i);
        }
    }
    run(model, &idx, true, config)
}
