use thiserror::Error;

use crate::model::ValidationReport;

/// Errors raised by the diagnosis operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagnosisError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid time: {0}")]
    InvalidTime(String),

    #[error("incomplete input: variable `{0}` is not assigned")]
    IncompleteInput(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("value {value} is outside the domain of `{variable}`")]
    ValueOutOfDomain { variable: String, value: i64 },

    #[error("model too large: {candidates} candidates exceed the enumeration cap of {cap}")]
    ModelTooLarge { candidates: u128, cap: usize },

    #[error("unknown component `{0}`")]
    InvalidComponent(String),

    #[error("invalid decision: {0}")]
    InvalidDecision(String),

    #[error("inconsistent observation at t={time}: no candidate explains {assignments}")]
    InconsistentObservation { time: String, assignments: String },

    #[error("invalid model ({} violation(s))", .0.violations.len())]
    InvalidModel(ValidationReport),

    #[error("event {index}: {source}")]
    AtEvent {
        index: usize,
        #[source]
        source: Box<DiagnosisError>,
    },
}

impl DiagnosisError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        DiagnosisError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Strips any event-index annotation.
    pub fn root(&self) -> &DiagnosisError {
        match self {
            DiagnosisError::AtEvent { source, .. } => source.root(),
            other => other,
        }
    }
}

/// Errors raised while reading model and scenario documents.
#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Schema(String),
}

pub type Result<T, E = DiagnosisError> = std::result::Result<T, E>;
