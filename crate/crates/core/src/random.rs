//! Random valid models and nets, for property tests and benchmarks.

use rand::seq::IteratorRandom;
use rand::Rng;

use crate::effectual::{validate_synergy, SynergySpec};
use crate::event::{mask_members, EventId};
use crate::model::{CausalModel, CptRow, DiscreteBayesNet, DocBuilder, ModelDoc, NetVariable, TableRow};

#[derive(Clone, Debug)]
pub struct RandomModelConfig {
    /// Upper bound on events, the root included.
    pub max_events: usize,
    pub max_triggers: usize,
    pub max_effects: usize,
    /// Make every causal table a product of independent per-effect chances.
    pub product_form: bool,
    /// Chance that a process with several triggers gets a compressed table.
    pub synergy_chance: f64,
}

impl Default for RandomModelConfig {
    fn default() -> Self {
        RandomModelConfig {
            max_events: 10,
            max_triggers: 3,
            max_effects: 2,
            product_form: false,
            synergy_chance: 0.3,
        }
    }
}

/// A probability that is exactly 0 or 1 now and then.
fn prob<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    match rng.random_range(0..10) {
        0 => 0.0,
        1 => 1.0,
        _ => rng.random(),
    }
}

/// Random distribution over `k` outcomes, with some outcomes given no mass.
pub fn random_distribution<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    loop {
        let w: Vec<f64> = (0..k)
            .map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random::<f64>() })
            .collect();
        let total: f64 = w.iter().sum();
        if total > 1e-3 {
            return w.into_iter().map(|v| v / total).collect();
        }
    }
}

fn rows(domain: &[String], values: &[f64]) -> Vec<TableRow> {
    let ids: Vec<EventId> = domain.iter().map(|s| EventId::new(s.as_str())).collect();
    table_rows(&ids, values)
}

fn product_table<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    let chance: Vec<f64> = (0..k).map(|_| prob(rng)).collect();
    (0..1usize << k)
        .map(|mask| {
            chance
                .iter()
                .enumerate()
                .map(|(i, &c)| if mask >> i & 1 == 1 { c } else { 1.0 - c })
                .product()
        })
        .collect()
}

fn random_synergy<R: Rng + ?Sized>(rng: &mut R, target: &str, parents: &[String]) -> SynergySpec {
    let base: Vec<(&str, f64)> = parents.iter().map(|p| (p.as_str(), rng.random::<f64>())).collect();
    let mut spec = SynergySpec::noisy_or(target, &base);
    for i in 0..parents.len() {
        for j in i + 1..parents.len() {
            if rng.random_bool(0.5) {
                let sy = rng.random_range(-1.0..1.0);
                let trial = spec.clone().with_synergy(&[&parents[i], &parents[j]], sy);
                if validate_synergy(&trial).is_empty() {
                    spec = trial;
                }
            }
        }
        if rng.random_bool(0.3) {
            let trial = spec.clone().with_necessity(&parents[i], rng.random());
            if validate_synergy(&trial).is_empty() {
                spec = trial;
            }
        }
    }
    spec
}

/// Random valid model document.
///
/// The root causes one to three uncaused events under a random joint. Each
/// further process is triggered by existing simple events and causes fresh
/// events or events that nothing reads yet, so several processes often share
/// an effect.
pub fn random_model_doc<R: Rng + ?Sized>(rng: &mut R, config: &RandomModelConfig) -> ModelDoc {
    let max_events = config.max_events.max(3);
    let mut b = DocBuilder::new("omega");
    let mut simple: Vec<String> = Vec::new();
    let mut read: Vec<bool> = Vec::new();
    let mut count = 1;

    let roots = rng.random_range(1..=3usize.min(max_events - 2));
    for i in 0..roots {
        let id = format!("u{i}");
        b = b.simple(&id).causes("omega", &id);
        simple.push(id);
        read.push(false);
        count += 1;
    }
    let prior = if config.product_form {
        product_table(rng, roots)
    } else {
        random_distribution(rng, 1 << roots)
    };
    let omega_rows = rows(&simple, &prior);
    b = b.causal_rows("omega", omega_rows);

    let mut p = 0;
    while count + 2 <= max_events {
        let name = format!("p{p}");
        p += 1;
        let k = rng.random_range(1..=config.max_triggers.min(simple.len()));
        let mut chosen: Vec<usize> = (0..simple.len()).choose_multiple(rng, k);
        chosen.sort();
        let triggers: Vec<String> = chosen.iter().map(|&i| simple[i].clone()).collect();
        b = b.process(&name);
        count += 1;
        for (&i, t) in chosen.iter().zip(&triggers) {
            b = b.triggers(t, &name);
            read[i] = true;
        }
        if triggers.len() >= 2 && rng.random_bool(config.synergy_chance) {
            b = b.synergy(random_synergy(rng, &name, &triggers));
        } else {
            let values: Vec<f64> = (0..1usize << triggers.len()).map(|_| prob(rng)).collect();
            b = b.effectual_rows(&name, rows(&triggers, &values));
        }

        let room = max_events - count;
        let wanted = rng.random_range(1..=config.max_effects.min(room).max(1));
        let mut effects: Vec<String> = Vec::new();
        for _ in 0..wanted {
            let unread: Vec<usize> = (0..simple.len()).filter(|&i| !read[i] && !effects.contains(&simple[i])).collect();
            if !unread.is_empty() && rng.random_bool(0.4) {
                let i = unread[rng.random_range(0..unread.len())];
                effects.push(simple[i].clone());
            } else if count < max_events {
                let id = format!("s{}", simple.len());
                b = b.simple(&id);
                simple.push(id.clone());
                read.push(false);
                count += 1;
                effects.push(id);
            }
        }
        for e in &effects {
            b = b.causes(&name, e);
        }
        let table = if config.product_form {
            product_table(rng, effects.len())
        } else {
            random_distribution(rng, 1 << effects.len())
        };
        b = b.causal_rows(&name, rows(&effects, &table));
    }
    b.build()
}

pub fn random_model<R: Rng + ?Sized>(rng: &mut R, config: &RandomModelConfig) -> CausalModel {
    CausalModel::from_doc(&random_model_doc(rng, config)).expect("generator emits valid models")
}

/// Random binary net over `n` variables `v0..`, each with up to `max_parents`
/// parents among the earlier variables.
pub fn random_net<R: Rng + ?Sized>(rng: &mut R, n: usize, max_parents: usize) -> DiscreteBayesNet {
    let mut variables = Vec::with_capacity(n);
    for i in 0..n {
        let k = rng.random_range(0..=max_parents.min(i));
        let mut parents: Vec<usize> = (0..i).choose_multiple(rng, k);
        parents.sort();
        let parents: Vec<EventId> = parents.into_iter().map(|j| EventId::new(format!("v{j}"))).collect();
        let cpt = (0u64..1 << parents.len())
            .map(|mask| CptRow {
                given: mask_members(&parents, mask).cloned().collect(),
                p: prob(rng),
            })
            .collect();
        variables.push(NetVariable {
            id: EventId::new(format!("v{i}")),
            arity: 2,
            parents,
            cpt,
        });
    }
    DiscreteBayesNet { variables }
}

/// Random distribution over the `2^n` atoms of `n` events, every atom positive.
pub fn random_joint<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..1usize << n).map(|_| 0.05 + rng.random::<f64>()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|v| v / total).collect()
}

#[doc(hidden)]
pub fn table_rows(domain: &[EventId], values: &[f64]) -> Vec<TableRow> {
    values
        .iter()
        .enumerate()
        .map(|(mask, &p)| {
            let mut subset: Vec<EventId> = mask_members(domain, mask as u64).cloned().collect();
            subset.sort();
            TableRow { subset, p }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_models_are_valid_and_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let doc = random_model_doc(&mut rng, &RandomModelConfig::default());
            assert!(doc.events.len() <= 10);
            let v = crate::model::validate_model(&doc);
            assert!(v.is_empty(), "{v:?}\n{}", doc.to_json());
        }
    }

    #[test]
    fn generated_nets_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            random_net(&mut rng, 5, 3).validate().unwrap();
        }
    }
}
