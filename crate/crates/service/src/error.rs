use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use causalkit::elicitation::ElicitationError;
use causalkit::inference::InferenceError;
use causalkit::model::{ModelError, Violation};
use serde_json::{json, Value};

use crate::store::StoreError;

/// Error body sent as `{code, message, details}`.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub details: Value,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            details: Value::Null,
        }
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.details = details;
        self
    }

    pub fn bad_json(e: serde_json::Error) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "MalformedRequest", e.to_string())
    }

    pub fn not_found(what: &str, id: &str) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "NotFound", format!("no {what} `{id}`"))
    }

    pub fn invalid_model(violations: Vec<Violation>) -> Self {
        let message = violations
            .first()
            .map(ToString::to_string)
            .unwrap_or_else(|| "invalid model".into());
        ApiError::new(StatusCode::BAD_REQUEST, "InvalidModel", message).with_details(json!({ "violations": violations }))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "code": self.code, "message": self.message, "details": self.details });
        (self.status, Json(body)).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        tracing::error!(error = %e, "store failure");
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "StoreError", e.to_string())
    }
}

impl From<ModelError> for ApiError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Invalid(v) => ApiError::invalid_model(v),
            ModelError::Parse(m) => ApiError::new(StatusCode::BAD_REQUEST, "MalformedRequest", m),
            other => ApiError::new(StatusCode::BAD_REQUEST, "ModelError", other.to_string()),
        }
    }
}

impl From<InferenceError> for ApiError {
    fn from(e: InferenceError) -> Self {
        let message = e.to_string();
        match e {
            InferenceError::ModelTooLarge { live, cap } => {
                ApiError::new(StatusCode::PAYLOAD_TOO_LARGE, "ModelTooLarge", message)
                    .with_details(json!({ "live": live, "cap": cap, "suggest": "sample" }))
            }
            InferenceError::ZeroEvidence => ApiError::new(StatusCode::CONFLICT, "ZeroEvidence", message),
            InferenceError::NoAcceptedSamples => ApiError::new(StatusCode::CONFLICT, "NoAcceptedSamples", message),
            InferenceError::UnknownEvent(id) => {
                ApiError::new(StatusCode::BAD_REQUEST, "UnknownEvent", message).with_details(json!({ "id": id }))
            }
            InferenceError::InvalidQuery(_) => ApiError::new(StatusCode::BAD_REQUEST, "InvalidQuery", message),
            InferenceError::InvalidSampleCount => ApiError::new(StatusCode::BAD_REQUEST, "InvalidSampleCount", message),
        }
    }
}

impl From<ElicitationError> for ApiError {
    fn from(e: ElicitationError) -> Self {
        use ElicitationError as E;
        let message = e.to_string();
        let (status, code) = match &e {
            E::OutOfRange { value, range } => {
                return ApiError::new(StatusCode::CONFLICT, "OutOfRange", message)
                    .with_details(json!({ "value": value, "range": range }));
            }
            E::Completed => (StatusCode::GONE, "Completed"),
            E::SingletonDefault(_) => (StatusCode::CONFLICT, "SingletonDefault"),
            E::Finished => (StatusCode::CONFLICT, "Finished"),
            E::NotFinished { .. } => (StatusCode::CONFLICT, "NotFinished"),
            E::Incoherent => (StatusCode::CONFLICT, "Incoherent"),
            E::NonConvergence { .. } => (StatusCode::CONFLICT, "NonConvergence"),
            E::UndefinedConditional(_) => (StatusCode::CONFLICT, "UndefinedConditional"),
            E::NotCommitted(_) => (StatusCode::CONFLICT, "NotCommitted"),
            E::TooManyEffects { .. } => (StatusCode::PAYLOAD_TOO_LARGE, "TooManyEffects"),
            E::IllegalOrder(_) => (StatusCode::BAD_REQUEST, "IllegalOrder"),
            E::UnknownEvent(_) => (StatusCode::BAD_REQUEST, "UnknownEvent"),
            E::InvalidConditional(_) => (StatusCode::BAD_REQUEST, "InvalidConditional"),
            E::InvalidParameter(_) => (StatusCode::BAD_REQUEST, "InvalidParameter"),
            E::Persist(_) => (StatusCode::INTERNAL_SERVER_ERROR, "StoreError"),
        };
        ApiError::new(status, code, message)
    }
}
