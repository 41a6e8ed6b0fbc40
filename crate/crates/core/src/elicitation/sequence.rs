use serde::{Deserialize, Serialize};

use super::ElicitationError;
use crate::event::{format_subset, mask_members, EventId};

/// Order in which the nonempty marginals over a set of effects are asked for.
///
/// Subsets are bitmasks over `events`: bit `i` stands for `events[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "SequenceRepr", try_from = "SequenceRepr")]
pub struct MarginalSequence {
    events: Vec<EventId>,
    subsets: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct SequenceRepr {
    events: Vec<EventId>,
    subsets: Vec<Vec<EventId>>,
}

impl From<MarginalSequence> for SequenceRepr {
    fn from(s: MarginalSequence) -> Self {
        let subsets = (0..s.len()).map(|i| s.subset(i).into_iter().cloned().collect()).collect();
        SequenceRepr {
            events: s.events,
            subsets,
        }
    }
}

impl TryFrom<SequenceRepr> for MarginalSequence {
    type Error = ElicitationError;

    fn try_from(r: SequenceRepr) -> Result<Self, Self::Error> {
        MarginalSequence::from_subsets(r.events, &r.subsets)
    }
}

impl MarginalSequence {
    /// Adds each event in turn, followed by its joins with every nonempty
    /// subset of the earlier events in binary-counting order. For `a, b, c, d`
    /// this gives `a, b, ab, c, ac, bc, abc, d, ad, bd, abd, cd, acd, bcd, abcd`.
    pub fn standard(events: Vec<EventId>) -> Self {
        let mut subsets = Vec::with_capacity((1usize << events.len()).saturating_sub(1));
        for i in 0..events.len() {
            for earlier in 0u32..(1 << i) {
                subsets.push(1 << i | earlier);
            }
        }
        MarginalSequence { events, subsets }
    }

    /// Builds a sequence from explicit subsets without checking legality.
    pub fn from_subsets(events: Vec<EventId>, subsets: &[Vec<EventId>]) -> Result<Self, ElicitationError> {
        if events.len() > 31 {
            return Err(ElicitationError::TooManyEffects {
                n: events.len(),
                cap: 31,
            });
        }
        let masks = subsets
            .iter()
            .map(|s| {
                s.iter().try_fold(0u32, |acc, id| {
                    let i = events
                        .iter()
                        .position(|e| e == id)
                        .ok_or_else(|| ElicitationError::UnknownEvent(id.clone()))?;
                    Ok(acc | 1 << i)
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(MarginalSequence {
            events,
            subsets: masks,
        })
    }

    /// Parses subsets written as comma-separated ids.
    pub fn parse(events: Vec<EventId>, subsets: &[&str]) -> Result<Self, ElicitationError> {
        let sets: Vec<Vec<EventId>> = subsets.iter().map(|s| crate::event::parse_subset(s)).collect();
        Self::from_subsets(events, &sets)
    }

    pub fn events(&self) -> &[EventId] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    pub fn mask(&self, i: usize) -> u32 {
        self.subsets[i]
    }

    pub fn masks(&self) -> &[u32] {
        &self.subsets
    }

    pub fn subset(&self, i: usize) -> Vec<&EventId> {
        mask_members(&self.events, self.subsets[i] as u64).collect()
    }

    pub fn label(&self, i: usize) -> String {
        let mut ids = self.subset(i);
        ids.sort();
        format_subset(ids)
    }

    pub fn position_of(&self, mask: u32) -> Option<usize> {
        self.subsets.iter().position(|&m| m == mask)
    }

    /// Mask of `ids` over this sequence's events.
    pub fn mask_of(&self, ids: &[EventId]) -> Result<u32, ElicitationError> {
        ids.iter().try_fold(0u32, |acc, id| {
            let i = self
                .events
                .iter()
                .position(|e| e == id)
                .ok_or_else(|| ElicitationError::UnknownEvent(id.clone()))?;
            Ok(acc | 1 << i)
        })
    }

    /// Why the order is not legal, if it is not.
    pub fn legality_problem(&self) -> Option<String> {
        let n = self.events.len();
        let full = (1u64 << n) - 1;
        if self.subsets.len() as u64 != full {
            return Some(format!("expected {full} subsets, found {}", self.subsets.len()));
        }
        let mut seen = vec![false; 1 << n];
        for (i, &m) in self.subsets.iter().enumerate() {
            if m == 0 {
                return Some("the empty set is not a marginal".into());
            }
            if std::mem::replace(&mut seen[m as usize], true) {
                return Some(format!("{{{}}} appears twice", self.label(i)));
            }
            // every proper nonempty subset must already be present
            let mut sub = (m - 1) & m;
            while sub != 0 {
                if !seen[sub as usize] {
                    let missing = format_subset(mask_members(&self.events, sub as u64));
                    return Some(format!("{{{}}} comes before its subset {{{missing}}}", self.label(i)));
                }
                sub = (sub - 1) & m;
            }
        }
        None
    }

    pub fn is_legal(&self) -> bool {
        self.legality_problem().is_none()
    }
}

/// Whether every nonempty subset appears exactly once and after all of its
/// own nonempty proper subsets.
pub fn is_legal_order(seq: &MarginalSequence) -> bool {
    seq.is_legal()
}
