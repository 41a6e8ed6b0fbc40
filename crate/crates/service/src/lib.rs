//! HTTP facade over causalkit models and elicitation sessions.
//!
//! Routes (JSON throughout, errors as `{code, message, details}`):
//!
//! | method | path | |
//! |---|---|---|
//! | `GET`, `POST` | `/models` | list, create |
//! | `GET`, `DELETE` | `/models/{id}` | envelope `{id, version, document}` |
//! | `POST` | `/models/{id}/query` | exact or sampled probability |
//! | `POST` | `/models/{id}/sessions` | start eliciting one process |
//! | `GET` | `/sessions/{id}` | session state with its log |
//! | `GET` | `/sessions/{id}/range` | legal range of the current subset |
//! | `POST` | `/sessions/{id}/commit` | value, optionally conditional |
//! | `POST` | `/sessions/{id}/default` | leave the current subset to the fit |
//! | `POST` | `/sessions/{id}/complete` | install the fitted table as a new model version |
//! | `POST` | `/synergy/expand` | explicit table preview |

mod error;
mod routes;
pub mod store;

use std::path::Path;
use std::sync::Arc;

use axum::Router;

pub use error::ApiError;
pub use routes::router;
use store::{ModelStore, SessionStore, StoreError};

pub struct AppState {
    pub models: ModelStore,
    pub sessions: SessionStore,
}

impl AppState {
    /// Opens (or creates) stores under `root`.
    pub fn open(root: &Path) -> Result<Arc<Self>, StoreError> {
        Ok(Arc::new(AppState {
            models: ModelStore::open(root.join("models"))?,
            sessions: SessionStore::open(root.join("sessions"))?,
        }))
    }
}

/// The full application with state attached.
pub fn app(state: Arc<AppState>) -> Router {
    router().with_state(state)
}
