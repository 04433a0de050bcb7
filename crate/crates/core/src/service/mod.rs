//! File-backed study store and the HTTP API over it.

pub mod http;
pub mod store;

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::analysis::AnalysisError;
use crate::generator::GeneratorError;
use crate::metrics::MetricsError;
use crate::optimizer::OptimizerError;
use crate::rgt::RgtError;

pub use http::{participant_router, router, AppState, PARTICIPANT_ROUTES};
pub use store::{Store, DATA_DIR_ENV};

/// Every `code` an [`ApiError`] can carry.
pub const ERROR_CODES: [&str; 19] = [
    "bad_request",
    "not_found",
    "conflict",
    "session_finished",
    "no_current_triad",
    "not_current_triad",
    "invalid_construct",
    "unknown_construct",
    "invalid_payload",
    "invalid_study",
    "request_conflict",
    "not_mappable",
    "untagged_construct",
    "invalid_drawing",
    "unknown_metric",
    "invalid_objective",
    "invalid_config",
    "invalid_params",
    "internal",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
}

impl ApiError {
    fn new(code: &str, message: impl Into<String>) -> ApiError {
        debug_assert!(ERROR_CODES.contains(&code), "undocumented error code {code}");
        ApiError {
            code: code.to_string(),
            message: message.into(),
            detail: None,
        }
    }

    fn with_detail(mut self, detail: Value) -> ApiError {
        self.detail = Some(detail);
        self
    }

    pub fn bad_request(message: impl Into<String>) -> ApiError {
        ApiError::new("bad_request", message)
    }

    pub fn not_found(kind: &str, id: &str) -> ApiError {
        ApiError::new("not_found", format!("no {kind} `{id}`")).with_detail(serde_json::json!({ kind: id }))
    }

    pub fn conflict(message: impl Into<String>) -> ApiError {
        ApiError::new("conflict", message)
    }

    pub fn internal(message: impl Into<String>) -> ApiError {
        ApiError::new("internal", message)
    }

    pub fn status(&self) -> StatusCode {
        match self.code.as_str() {
            "not_found" => StatusCode::NOT_FOUND,
            "conflict" | "session_finished" | "no_current_triad" | "not_current_triad" | "request_conflict" => {
                StatusCode::CONFLICT
            }
            "internal" => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        }
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl std::error::Error for ApiError {}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status(), Json(self)).into_response()
    }
}

impl From<RgtError> for ApiError {
    fn from(e: RgtError) -> Self {
        let msg = e.to_string();
        match e {
            RgtError::TooFewElements { .. } | RgtError::DuplicateElement(_) | RgtError::InvalidConfig(_) => {
                ApiError::new("invalid_study", msg)
            }
            RgtError::MalformedPayload(_) => ApiError::new("invalid_payload", msg),
            RgtError::SessionFinished => ApiError::new("session_finished", msg),
            RgtError::NoCurrentTriad => ApiError::new("no_current_triad", msg),
            RgtError::NotCurrentTriad { expected, found } => ApiError::new("not_current_triad", msg)
                .with_detail(serde_json::json!({ "expected": expected, "found": found })),
            RgtError::EmptyPole | RgtError::EqualPoles => ApiError::new("invalid_construct", msg),
            RgtError::UnknownConstruct(_) => ApiError::new("unknown_construct", msg),
            RgtError::RequestConflict(_) => ApiError::new("request_conflict", msg),
            RgtError::StudyMismatch(_) | RgtError::CorruptLog(_) => ApiError::internal(msg),
        }
    }
}

impl From<AnalysisError> for ApiError {
    fn from(e: AnalysisError) -> Self {
        let msg = e.to_string();
        match e {
            AnalysisError::UnknownConstruct(_) => ApiError::new("unknown_construct", msg),
            AnalysisError::NotMappable { .. } => ApiError::new("not_mappable", msg),
            AnalysisError::Untagged(_) => ApiError::new("untagged_construct", msg),
            AnalysisError::EmptyAnalyst | AnalysisError::EmptyAesthetic => ApiError::bad_request(msg),
        }
    }
}

impl From<MetricsError> for ApiError {
    fn from(e: MetricsError) -> Self {
        match &e {
            MetricsError::UnknownMetric(_) => ApiError::new("unknown_metric", e.to_string()),
            MetricsError::InvalidDrawing(v) => {
                ApiError::new("invalid_drawing", e.to_string()).with_detail(serde_json::json!(v))
            }
        }
    }
}

impl From<OptimizerError> for ApiError {
    fn from(e: OptimizerError) -> Self {
        match e {
            OptimizerError::InvalidObjective(_) | OptimizerError::AllUndefined => {
                ApiError::new("invalid_objective", e.to_string())
            }
            OptimizerError::InvalidConfig(_) => ApiError::new("invalid_config", e.to_string()),
            OptimizerError::Metrics(m) => m.into(),
        }
    }
}

impl From<GeneratorError> for ApiError {
    fn from(e: GeneratorError) -> Self {
        ApiError::new("invalid_params", e.to_string())
    }
}
