use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{InferenceError, Query};
use crate::event::EventId;
use crate::model::{assign_levels, CausalModel};

/// Events that occurred in one forward sample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleOutcome {
    pub occurred: BTreeSet<EventId>,
}

impl SampleOutcome {
    pub fn contains(&self, id: &str) -> bool {
        self.occurred.contains(id)
    }
}

/// Rejection-sampling estimate of a query.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub estimate: f64,
    pub std_error: f64,
    /// Samples consistent with the evidence.
    pub accepted: usize,
    pub drawn: usize,
}

struct Sampler<'m> {
    model: &'m CausalModel,
    order: Vec<usize>,
}

impl<'m> Sampler<'m> {
    fn new(model: &'m CausalModel) -> Self {
        let levels = assign_levels(model);
        let mut order: Vec<usize> = model.processes().collect();
        order.sort_by_key(|&p| (levels.level(p), p));
        Sampler { model, order }
    }

    fn draw(&self, rng: &mut ChaCha8Rng, state: &mut [bool]) {
        state.fill(false);
        for &p in &self.order {
            let present = self
                .model
                .triggers_of(p)
                .iter()
                .enumerate()
                .fold(0u64, |acc, (i, &s)| if state[s] { acc | 1 << i } else { acc });
            if rng.random::<f64>() >= self.model.effectual_prob(p, present) {
                continue;
            }
            state[p] = true;
            let table = self.model.causal_table(p);
            let u: f64 = rng.random();
            let mut acc = 0.0;
            // falls back to the last nonzero row when rounding leaves u above the total
            let mut chosen = table.iter().rposition(|&w| w > 0.0).unwrap_or(0);
            for (k, &w) in table.iter().enumerate() {
                acc += w;
                if u < acc {
                    chosen = k;
                    break;
                }
            }
            for (i, &s) in self.model.effects_of(p).iter().enumerate() {
                if chosen >> i & 1 == 1 {
                    state[s] = true;
                }
            }
        }
    }
}

/// Draws one joint outcome by running every process forward in level order.
pub fn forward_sample(model: &CausalModel, seed: u64) -> SampleOutcome {
    let sampler = Sampler::new(model);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = vec![false; model.len()];
    sampler.draw(&mut rng, &mut state);
    SampleOutcome {
        occurred: (0..model.len())
            .filter(|&i| state[i] && !model.id(i).is_reserved())
            .map(|i| model.id(i).clone())
            .collect(),
    }
}

/// Draws `n` samples and reports the target frequency among those that agree
/// with the evidence.
pub fn estimate_query(model: &CausalModel, q: &Query, n: usize, seed: u64) -> Result<Estimate, InferenceError> {
    if n == 0 {
        return Err(InferenceError::InvalidSampleCount);
    }
    q.check(model)?;
    let idx = |ids: &[EventId]| -> Vec<usize> { ids.iter().map(|id| model.index_of(id).expect("checked")).collect() };
    let (targets, yes, no) = (idx(&q.targets), idx(&q.evidence_true), idx(&q.evidence_false));

    let sampler = Sampler::new(model);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = vec![false; model.len()];
    let (mut accepted, mut hits) = (0usize, 0usize);
    for _ in 0..n {
        sampler.draw(&mut rng, &mut state);
        if yes.iter().all(|&i| state[i]) && no.iter().all(|&i| !state[i]) {
            accepted += 1;
            if targets.iter().all(|&i| state[i]) {
                hits += 1;
            }
        }
    }
    if accepted == 0 {
        return Err(InferenceError::NoAcceptedSamples);
    }
    let p = hits as f64 / accepted as f64;
    Ok(Estimate {
        estimate: p,
        std_error: (p * (1.0 - p) / accepted as f64).sqrt(),
        accepted,
        drawn: n,
    })
}
