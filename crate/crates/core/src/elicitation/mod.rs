//! Knowledge acquisition for causal and effectual tables.

use thiserror::Error;

use crate::event::EventId;

mod effectual;
mod maxent;
mod sequence;
mod session;

pub use effectual::{EffectualElicitation, Parameter};
pub use maxent::{max_entropy, residual, MarginalConstraint, IPF_MAX_ITERATIONS, IPF_TOLERANCE};
pub use sequence::{is_legal_order, MarginalSequence};
pub use session::{
    session_to_constraints, start_session, Action, ConstraintRecord, ElicitationSession, EntryState, LegalRange, LogEntry,
    COMMIT_TOLERANCE, MAX_SESSION_EFFECTS,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ElicitationError {
    #[error("illegal order: {0}")]
    IllegalOrder(String),
    #[error("{n} effects exceed the session limit of {cap}")]
    TooManyEffects { n: usize, cap: usize },
    #[error("unknown event `{0}`")]
    UnknownEvent(EventId),
    #[error("{value} is outside the legal range [{}, {}]", .range.lo, .range.hi)]
    OutOfRange { value: f64, range: LegalRange },
    #[error("conditioning event {{{0}}} has probability zero")]
    UndefinedConditional(String),
    #[error("{{{0}}} has not been committed")]
    NotCommitted(String),
    #[error("invalid conditional: {0}")]
    InvalidConditional(String),
    #[error("singleton {{{0}}} cannot be defaulted")]
    SingletonDefault(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("every entry has been answered")]
    Finished,
    #[error("{remaining} entries are still pending")]
    NotFinished { remaining: usize },
    #[error("session is already completed")]
    Completed,
    #[error("committed values are mutually inconsistent")]
    Incoherent,
    #[error("fitting did not converge (residual {residual:e})")]
    NonConvergence { residual: f64 },
    #[error("cannot restore session: {0}")]
    Persist(String),
}
