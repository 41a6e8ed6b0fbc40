use std::collections::{BTreeMap, BTreeSet};

use crate::event::{format_subset, mask_members, EventId};

use super::InferenceError;

/// Sparse joint distribution over a domain of at most 64 binary events.
///
/// An atom is the set of events that occur; every other domain event does
/// not. Atoms are keyed by bitmask over `domain`; zero-mass atoms are absent.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    domain: Vec<EventId>,
    atoms: BTreeMap<u64, f64>,
}

impl JointDistribution {
    pub(crate) fn from_parts(domain: Vec<EventId>, atoms: BTreeMap<u64, f64>) -> Self {
        debug_assert!(domain.len() <= 64);
        JointDistribution { domain, atoms }
    }

    /// Builds a distribution from explicit `(occurred set, mass)` pairs.
    pub fn from_atoms<I>(domain: Vec<EventId>, atoms: I) -> Result<Self, InferenceError>
    where
        I: IntoIterator<Item = (Vec<EventId>, f64)>,
    {
        if domain.len() > 64 {
            return Err(InferenceError::ModelTooLarge {
                live: domain.len(),
                cap: 64,
            });
        }
        let mut map = BTreeMap::new();
        for (set, mass) in atoms {
            let mut mask = 0u64;
            for id in &set {
                let i = domain
                    .iter()
                    .position(|d| d == id)
                    .ok_or_else(|| InferenceError::UnknownEvent(id.clone()))?;
                mask |= 1 << i;
            }
            if mass != 0.0 {
                *map.entry(mask).or_insert(0.0) += mass;
            }
        }
        Ok(JointDistribution { domain, atoms: map })
    }

    pub fn domain(&self) -> &[EventId] {
        &self.domain
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    /// Atoms as `(occurred events in domain order, mass)`.
    pub fn atoms(&self) -> impl Iterator<Item = (Vec<&EventId>, f64)> + '_ {
        self.atoms
            .iter()
            .map(|(&mask, &m)| (mask_members(&self.domain, mask).collect(), m))
    }

    pub fn total(&self) -> f64 {
        self.atoms.values().sum()
    }

    fn mask_of(&self, ids: &[EventId]) -> Result<u64, InferenceError> {
        ids.iter().try_fold(0u64, |acc, id| {
            let i = self
                .domain
                .iter()
                .position(|d| d == id)
                .ok_or_else(|| InferenceError::UnknownEvent(id.clone()))?;
            Ok(acc | 1 << i)
        })
    }

    /// Mass of the atom in which exactly `occurred` occur.
    pub fn mass_of(&self, occurred: &[EventId]) -> Result<f64, InferenceError> {
        let mask = self.mask_of(occurred)?;
        Ok(self.atoms.get(&mask).copied().unwrap_or(0.0))
    }

    /// Probability that every event in `true_ids` occurs and none in `false_ids` does.
    pub fn prob(&self, true_ids: &[EventId], false_ids: &[EventId]) -> Result<f64, InferenceError> {
        let t = self.mask_of(true_ids)?;
        let f = self.mask_of(false_ids)?;
        Ok(self
            .atoms
            .iter()
            .filter(|(&m, _)| m & t == t && m & f == 0)
            .map(|(_, &p)| p)
            .sum())
    }

    /// Marginal onto `keep`, whose order becomes the new domain order.
    pub fn marginal(&self, keep: &[EventId]) -> Result<JointDistribution, InferenceError> {
        let positions: Vec<usize> = keep
            .iter()
            .map(|id| {
                self.domain
                    .iter()
                    .position(|d| d == id)
                    .ok_or_else(|| InferenceError::UnknownEvent(id.clone()))
            })
            .collect::<Result<_, _>>()?;
        let mut atoms = BTreeMap::new();
        for (&mask, &m) in &self.atoms {
            let projected = positions
                .iter()
                .enumerate()
                .fold(0u64, |acc, (new, &old)| acc | (mask >> old & 1) << new);
            *atoms.entry(projected).or_insert(0.0) += m;
        }
        Ok(JointDistribution {
            domain: keep.to_vec(),
            atoms,
        })
    }

    /// Atoms keyed by sorted occurred set.
    pub fn to_map(&self) -> BTreeMap<Vec<EventId>, f64> {
        self.atoms
            .iter()
            .map(|(&mask, &m)| {
                let mut set: Vec<EventId> = mask_members(&self.domain, mask).cloned().collect();
                set.sort();
                (set, m)
            })
            .collect()
    }

    /// Largest per-atom difference. Both distributions must range over the
    /// same set of events, in any order.
    pub fn linf_distance(&self, other: &JointDistribution) -> Result<f64, InferenceError> {
        let a: BTreeSet<&EventId> = self.domain.iter().collect();
        let b: BTreeSet<&EventId> = other.domain.iter().collect();
        if a != b {
            return Err(InferenceError::InvalidQuery(format!(
                "domains differ: {{{}}} vs {{{}}}",
                format_subset(a.iter().copied()),
                format_subset(b.iter().copied())
            )));
        }
        let x = self.to_map();
        let y = other.to_map();
        let keys: BTreeSet<&Vec<EventId>> = x.keys().chain(y.keys()).collect();
        Ok(keys
            .into_iter()
            .map(|k| (x.get(k).copied().unwrap_or(0.0) - y.get(k).copied().unwrap_or(0.0)).abs())
            .fold(0.0, f64::max))
    }

    /// `subset-ids<TAB>mass` lines sorted lexicographically, ids within a
    /// subset sorted and comma-separated, `{}` for the empty set.
    pub fn dump(&self) -> String {
        let mut lines: Vec<String> = self
            .to_map()
            .into_iter()
            .map(|(set, m)| format!("{}\t{}", format_subset(&set), m))
            .collect();
        lines.sort();
        let mut out = lines.join("\n");
        out.push('\n');
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[&str]) -> Vec<EventId> {
        v.iter().map(|s| EventId::from(*s)).collect()
    }

    #[test]
    fn marginal_and_prob() {
        let jd = JointDistribution::from_atoms(
            ids(&["a", "b"]),
            vec![(ids(&["a", "b"]), 0.25), (ids(&["a"]), 0.25), (ids(&[]), 0.5)],
        )
        .unwrap();
        assert_eq!(jd.prob(&ids(&["a"]), &[]).unwrap(), 0.5);
        assert_eq!(jd.prob(&ids(&["a"]), &ids(&["b"])).unwrap(), 0.25);
        let m = jd.marginal(&ids(&["b"])).unwrap();
        assert_eq!(m.mass_of(&ids(&["b"])).unwrap(), 0.25);
        assert_eq!(m.mass_of(&[]).unwrap(), 0.75);
        assert_eq!(m.dump(), "b\t0.25\n{}\t0.75\n");
    }

    #[test]
    fn distance_ignores_domain_order() {
        let x = JointDistribution::from_atoms(ids(&["a", "b"]), vec![(ids(&["a"]), 1.0)]).unwrap();
        let y = JointDistribution::from_atoms(ids(&["b", "a"]), vec![(ids(&["a"]), 0.75), (ids(&[]), 0.25)]).unwrap();
        assert_eq!(x.linf_distance(&y).unwrap(), 0.25);
    }
}
