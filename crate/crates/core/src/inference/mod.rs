//! Exact and sampled inference over causal models.

use thiserror::Error;

use crate::event::EventId;

mod dist;
mod oracle;
mod query;
mod relevance;
mod sample;
mod sweep;

pub use dist::JointDistribution;
pub use oracle::{brute_force_oracle, brute_force_oracle_with};
pub use query::{query, query_with, Query};
pub use relevance::relevant_subgraph;
pub use sample::{estimate_query, forward_sample, Estimate, SampleOutcome};
pub use sweep::{joint_distribution, joint_distribution_with, joint_with_elimination, joint_with_elimination_with, SweepStats};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InferenceError {
    #[error("{live} live events exceed the cap of {cap}; use elimination or sampling")]
    ModelTooLarge { live: usize, cap: usize },
    #[error("unknown event `{0}`")]
    UnknownEvent(EventId),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("evidence has probability zero")]
    ZeroEvidence,
    #[error("no sample matched the evidence")]
    NoAcceptedSamples,
    #[error("sample count must be at least 1")]
    InvalidSampleCount,
}

/// Size limits for exact computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InferenceConfig {
    /// Events held in the working joint at once. At most 64.
    pub max_live_events: usize,
    /// Stochastic branches the brute-force oracle may enumerate.
    pub max_oracle_branches: u64,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        InferenceConfig {
            max_live_events: 20,
            max_oracle_branches: 1 << 22,
        }
    }
}
