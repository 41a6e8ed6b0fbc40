//! Causal models and their structural transforms.

mod causal_model;
mod dgraph;
mod doc;
pub mod fixtures;
pub(crate) mod levels;
mod normalize;
mod validate;

pub use causal_model::{build_model, validate_model, CausalModel, EffectualTable, ModelError};
pub use dgraph::{edge_event, import_dgraph, prior_event, CptRow, DiscreteBayesNet, ImportError, NetVariable};
pub use doc::{DocBuilder, EventDecl, ModelDoc, NodeKind, TableRow};
pub use levels::{assign_levels, LevelAssignment};
pub use normalize::normalize_structure;
pub use validate::{validate_doc, Rule, Violation, NORMALIZATION_TOL};
