use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use faultline_core::{DiagnosisError, DocumentError, ValidationReport};
use serde::{Deserialize, Serialize};

/// Machine-readable error body: `{"code": ..., "message": ...}` plus the
/// validation report when a model was rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<ValidationReport>,
}

#[derive(Debug, Clone)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: ErrorBody {
                code: code.to_string(),
                message: message.into(),
                report: None,
            },
        }
    }

    pub fn malformed(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "malformed_request", message)
    }

    pub fn not_found(what: &str, id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", format!("no {what} with id `{id}`"))
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }

    pub fn code(&self) -> &str {
        &self.body.code
    }
}

impl From<DiagnosisError> for ApiError {
    fn from(err: DiagnosisError) -> Self {
        let message = err.to_string();
        let (status, code) = match err.root() {
            DiagnosisError::InconsistentObservation { .. } => (StatusCode::CONFLICT, "inconsistent_observation"),
            DiagnosisError::InvalidTime(_) => (StatusCode::CONFLICT, "time_regression"),
            DiagnosisError::ModelTooLarge { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "model_too_large"),
            DiagnosisError::InvalidModel(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_model"),
            DiagnosisError::IncompleteInput(_)
            | DiagnosisError::UnknownVariable(_)
            | DiagnosisError::ValueOutOfDomain { .. }
            | DiagnosisError::InvalidComponent(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_event"),
            _ => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_request"),
        };
        let mut api = ApiError::new(status, code, message);
        if let DiagnosisError::InvalidModel(report) = err.root() {
            api.body.report = Some(report.clone());
        }
        api
    }
}

impl From<DocumentError> for ApiError {
    fn from(err: DocumentError) -> Self {
        match err {
            DocumentError::Io { .. } => ApiError::internal(err.to_string()),
            DocumentError::Json(_) => ApiError::malformed(err.to_string()),
            DocumentError::Schema(_) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_model", err.to_string())
            }
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}
