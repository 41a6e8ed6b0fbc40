use serde::{Deserialize, Serialize};

use super::maxent::{max_entropy, MarginalConstraint};
use super::{ElicitationError, MarginalSequence};
use crate::event::{format_subset, mask_members, parse_subset, EventId};
use crate::lp::{maximize, minimize, LpOutcome};
use crate::model::TableRow;

/// Largest effect set a session accepts; the range program has `2^n` variables.
pub const MAX_SESSION_EFFECTS: usize = 12;
/// Slack allowed when checking a value against its legal range.
pub const COMMIT_TOLERANCE: f64 = 1e-9;

/// Values the next marginal may take without contradicting earlier ones.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LegalRange {
    pub lo: f64,
    pub hi: f64,
}

impl LegalRange {
    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo - COMMIT_TOLERANCE && v <= self.hi + COMMIT_TOLERANCE
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "lowercase")]
pub enum EntryState {
    Pending,
    Committed { value: f64 },
    Defaulted,
}

/// One audit-log record. The log is only ever appended to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub position: usize,
    pub subset: Vec<EventId>,
    pub range: LegalRange,
    #[serde(flatten)]
    pub action: Action,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    Commit { value: f64 },
    CommitConditional { head: Vec<EventId>, given: Vec<EventId>, conditional: f64, value: f64 },
    Default,
    Complete,
}

/// A committed or defaulted marginal, in sequence order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintRecord {
    pub subset: Vec<EventId>,
    /// `None` when the entry was defaulted.
    pub value: Option<f64>,
}

impl ConstraintRecord {
    pub fn is_default(&self) -> bool {
        self.value.is_none()
    }
}

/// Turn-based acquisition of one process's causal table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElicitationSession {
    process: EventId,
    sequence: MarginalSequence,
    position: usize,
    entries: Vec<EntryState>,
    log: Vec<LogEntry>,
    completed: bool,
}

/// Opens a session for the causal table of `process` over `effects`.
pub fn start_session(process: EventId, effects: &[EventId], seq: MarginalSequence) -> Result<ElicitationSession, ElicitationError> {
    ElicitationSession::start(process, effects, seq)
}

impl ElicitationSession {
    pub fn start(process: EventId, effects: &[EventId], seq: MarginalSequence) -> Result<Self, ElicitationError> {
        if effects.len() > MAX_SESSION_EFFECTS {
            return Err(ElicitationError::TooManyEffects {
                n: effects.len(),
                cap: MAX_SESSION_EFFECTS,
            });
        }
        let mut want: Vec<&EventId> = effects.iter().collect();
        let mut have: Vec<&EventId> = seq.events().iter().collect();
        want.sort();
        have.sort();
        if want != have {
            return Err(ElicitationError::IllegalOrder(format!(
                "sequence ranges over {{{}}} but the effects are {{{}}}",
                format_subset(have),
                format_subset(want)
            )));
        }
        if let Some(problem) = seq.legality_problem() {
            return Err(ElicitationError::IllegalOrder(problem));
        }
        Ok(ElicitationSession {
            process,
            entries: vec![EntryState::Pending; seq.len()],
            sequence: seq,
            position: 0,
            log: Vec::new(),
            completed: false,
        })
    }

    /// Session over `effects` in the standard order.
    pub fn standard(process: EventId, effects: &[EventId]) -> Result<Self, ElicitationError> {
        Self::start(process, effects, MarginalSequence::standard(effects.to_vec()))
    }

    pub fn process(&self) -> &EventId {
        &self.process
    }

    pub fn sequence(&self) -> &MarginalSequence {
        &self.sequence
    }

    pub fn effects(&self) -> &[EventId] {
        self.sequence.events()
    }

    pub fn position(&self) -> usize {
        self.position
    }

    pub fn entries(&self) -> &[EntryState] {
        &self.entries
    }

    pub fn log(&self) -> &[LogEntry] {
        &self.log
    }

    pub fn is_finished(&self) -> bool {
        self.position >= self.sequence.len()
    }

    pub fn is_completed(&self) -> bool {
        self.completed
    }

    /// The subset whose marginal is asked for next, sorted by id.
    pub fn current(&self) -> Option<Vec<EventId>> {
        (!self.is_finished()).then(|| self.members(self.sequence.mask(self.position)))
    }

    fn members(&self, mask: u32) -> Vec<EventId> {
        let mut v: Vec<EventId> = mask_members(self.sequence.events(), mask as u64).cloned().collect();
        v.sort();
        v
    }

    fn committed(&self) -> Vec<MarginalConstraint> {
        self.entries
            .iter()
            .enumerate()
            .filter_map(|(i, e)| match e {
                EntryState::Committed { value } => Some(MarginalConstraint {
                    mask: self.sequence.mask(i),
                    value: *value,
                }),
                _ => None,
            })
            .collect()
    }

    fn check_open(&self) -> Result<(), ElicitationError> {
        if self.completed {
            return Err(ElicitationError::Completed);
        }
        if self.is_finished() {
            return Err(ElicitationError::Finished);
        }
        Ok(())
    }

    /// Exact bounds on the marginal of `mask` given every commitment so far.
    pub fn range_of(&self, mask: u32) -> Result<LegalRange, ElicitationError> {
        let atoms = 1usize << self.sequence.events().len();
        let row = |m: u32| -> Vec<f64> { (0..atoms).map(|k| if k as u32 & m == m { 1.0 } else { 0.0 }).collect() };
        let mut a = vec![row(0)];
        let mut b = vec![1.0];
        for c in self.committed() {
            a.push(row(c.mask));
            b.push(c.value);
        }
        let obj = row(mask);
        match (minimize(&obj, &a, &b), maximize(&obj, &a, &b)) {
            (LpOutcome::Optimal { value: lo, .. }, LpOutcome::Optimal { value: hi, .. }) => {
                let lo = lo.clamp(0.0, 1.0);
                Ok(LegalRange { lo, hi: hi.clamp(lo, 1.0) })
            }
            _ => Err(ElicitationError::Incoherent),
        }
    }

    /// Legal range for the current subset.
    pub fn next_range(&self) -> Result<LegalRange, ElicitationError> {
        self.check_open()?;
        self.range_of(self.sequence.mask(self.position))
    }

    pub fn commit(&mut self, value: f64) -> Result<(), ElicitationError> {
        self.commit_with(value, None)
    }

    fn commit_with(&mut self, value: f64, conditional: Option<(Vec<EventId>, Vec<EventId>, f64)>) -> Result<(), ElicitationError> {
        let range = self.next_range()?;
        if !value.is_finite() || !range.contains(value) {
            return Err(ElicitationError::OutOfRange { value, range });
        }
        let subset = self.current().expect("session is open");
        let action = match conditional {
            None => Action::Commit { value },
            Some((head, given, conditional)) => Action::CommitConditional {
                head,
                given,
                conditional,
                value,
            },
        };
        self.entries[self.position] = EntryState::Committed { value };
        self.log.push(LogEntry {
            position: self.position,
            subset,
            range,
            action,
        });
        self.position += 1;
        Ok(())
    }

    /// Commits the current marginal through `pr(head / given) = value`, where
    /// `head ∪ given` is the current subset and `pr(given)` is already committed.
    pub fn commit_conditional(&mut self, head: &[EventId], given: &[EventId], value: f64) -> Result<(), ElicitationError> {
        self.check_open()?;
        let current = self.sequence.mask(self.position);
        let h = self.sequence.mask_of(head)?;
        let g = self.sequence.mask_of(given)?;
        if h == 0 || g == 0 || h & g != 0 || h | g != current {
            return Err(ElicitationError::InvalidConditional(format!(
                "`{}|{}` does not split {{{}}}",
                format_subset(head),
                format_subset(given),
                format_subset(&self.members(current))
            )));
        }
        let at = self.sequence.position_of(g).expect("legal sequences hold every subset");
        let denominator = match self.entries[at] {
            EntryState::Committed { value } => value,
            _ => return Err(ElicitationError::NotCommitted(format_subset(&self.members(g)))),
        };
        if denominator <= 0.0 {
            return Err(ElicitationError::UndefinedConditional(format_subset(&self.members(g))));
        }
        if !(0.0..=1.0).contains(&value) {
            let range = self.next_range()?;
            return Err(ElicitationError::OutOfRange {
                value: value * denominator,
                range,
            });
        }
        self.commit_with(
            value * denominator,
            Some((self.members(h), self.members(g), value)),
        )
    }

    /// Accepts `head|given value`, `default`, or a bare value.
    pub fn apply_text(&mut self, line: &str) -> Result<(), ElicitationError> {
        let line = line.trim();
        if line == "default" {
            return self.default_current();
        }
        let parse = |s: &str| -> Result<f64, ElicitationError> {
            s.trim()
                .parse::<f64>()
                .map_err(|_| ElicitationError::InvalidConditional(format!("`{s}` is not a number")))
        };
        match line.split_once(char::is_whitespace) {
            Some((form, value)) if form.contains('|') => {
                let (head, given) = form.split_once('|').expect("checked");
                self.commit_conditional(&parse_subset(head), &parse_subset(given), parse(value)?)
            }
            _ => self.commit(parse(line)?),
        }
    }

    /// Skips the current marginal, leaving it to the completion.
    pub fn default_current(&mut self) -> Result<(), ElicitationError> {
        self.check_open()?;
        let mask = self.sequence.mask(self.position);
        if mask.count_ones() == 1 {
            return Err(ElicitationError::SingletonDefault(format_subset(&self.members(mask))));
        }
        let range = self.next_range()?;
        self.entries[self.position] = EntryState::Defaulted;
        self.log.push(LogEntry {
            position: self.position,
            subset: self.members(mask),
            range,
            action: Action::Default,
        });
        self.position += 1;
        Ok(())
    }

    /// Committed and defaulted entries so far, in sequence order.
    pub fn constraints(&self) -> Vec<ConstraintRecord> {
        self.entries
            .iter()
            .enumerate()
            .filter_map(|(i, e)| {
                let subset = self.members(self.sequence.mask(i));
                match *e {
                    EntryState::Pending => None,
                    EntryState::Committed { value } => Some(ConstraintRecord {
                        subset,
                        value: Some(value),
                    }),
                    EntryState::Defaulted => Some(ConstraintRecord { subset, value: None }),
                }
            })
            .collect()
    }

    /// Maximum-entropy distribution over exact caused subsets, indexed by
    /// mask over [`ElicitationSession::effects`].
    pub fn fit(&self) -> Result<Vec<f64>, ElicitationError> {
        if !self.is_finished() {
            return Err(ElicitationError::NotFinished {
                remaining: self.sequence.len() - self.position,
            });
        }
        max_entropy(self.sequence.events().len(), &self.committed())
    }

    /// Fits the table and closes the session.
    pub fn complete(&mut self) -> Result<Vec<TableRow>, ElicitationError> {
        if self.completed {
            return Err(ElicitationError::Completed);
        }
        let x = self.fit()?;
        self.completed = true;
        self.log.push(LogEntry {
            position: self.position,
            subset: Vec::new(),
            range: LegalRange { lo: 1.0, hi: 1.0 },
            action: Action::Complete,
        });
        Ok(x.iter()
            .enumerate()
            .map(|(k, &p)| TableRow {
                subset: self.members(k as u32),
                p,
            })
            .collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sessions serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, ElicitationError> {
        let s: ElicitationSession = serde_json::from_str(text).map_err(|e| ElicitationError::Persist(e.to_string()))?;
        if s.entries.len() != s.sequence.len() || s.position > s.sequence.len() || !s.sequence.is_legal() {
            return Err(ElicitationError::Persist("inconsistent session state".into()));
        }
        Ok(s)
    }
}

/// Committed pairs and default flags, in sequence order.
pub fn session_to_constraints(session: &ElicitationSession) -> Vec<ConstraintRecord> {
    session.constraints()
}
