//! Causal models built from process events and simple events.
//!
//! A model is a bipartite acyclic graph: processes cause simple events, and
//! simple events trigger processes. Each process carries an *effectual* table
//! (chance it occurs given exactly which triggers occurred) and a *causal*
//! table (distribution over which subset of its effects it causes when it
//! occurs). Distinct causes of a simple event act independently: the event
//! occurs iff it is in the union of the subsets its occurred causes produce.
//!
//! * [`model`]: documents and their checks, plus Bayes-net import
//! * [`effectual`]: compressed effectual tables
//! * [`inference`]: the level sweep and its oracle
//! * [`elicitation`]: turn-based table entry
//! * [`lp`]: dense two-phase simplex used for legal ranges

pub mod effectual;
pub mod elicitation;
pub mod event;
pub mod inference;
pub mod lp;
pub mod model;
pub mod random;

pub use event::EventId;
pub use model::{CausalModel, ModelDoc, NodeKind};
