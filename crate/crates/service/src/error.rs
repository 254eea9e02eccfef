use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use thiserror::Error;

use crate::events::LogError;
use crate::state::ApplyError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ServiceError {
    #[error("authentication required")]
    Unauthenticated,
    #[error("authentication failed")]
    AuthFailure,
    #[error("not permitted")]
    Forbidden,
    #[error("unknown {kind} {id}")]
    NotFound { kind: &'static str, id: String },
    /// A request that clashes with the current state, such as paying twice.
    #[error("{message}")]
    Conflict { code: &'static str, message: String },
    #[error("invalid location ({lat}, {lon})")]
    InvalidLocation { lat: f64, lon: f64 },
    #[error("{0}")]
    Validation(String),
    #[error("trip QR codes are not configured on this service")]
    QrUnavailable,
    #[error("storage: {0}")]
    Storage(String),
}

impl ServiceError {
    pub fn not_found(kind: &'static str, id: impl ToString) -> Self {
        Self::NotFound {
            kind,
            id: id.to_string(),
        }
    }

    pub fn conflict(code: &'static str, message: impl Into<String>) -> Self {
        Self::Conflict {
            code,
            message: message.into(),
        }
    }

    pub fn validation(message: impl ToString) -> Self {
        Self::Validation(message.to_string())
    }

    pub fn status(&self) -> StatusCode {
        match self {
            Self::Unauthenticated | Self::AuthFailure => StatusCode::UNAUTHORIZED,
            Self::Forbidden => StatusCode::FORBIDDEN,
            Self::NotFound { .. } => StatusCode::NOT_FOUND,
            Self::Conflict { .. } => StatusCode::CONFLICT,
            Self::InvalidLocation { .. } | Self::Validation(_) => StatusCode::UNPROCESSABLE_ENTITY,
            Self::QrUnavailable => StatusCode::SERVICE_UNAVAILABLE,
            Self::Storage(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            Self::Unauthenticated => "unauthenticated",
            Self::AuthFailure => "auth-failure",
            Self::Forbidden => "forbidden",
            Self::NotFound { .. } => "not-found",
            Self::Conflict { code, .. } => code,
            Self::InvalidLocation { .. } => "invalid-location",
            Self::Validation(_) => "validation",
            Self::QrUnavailable => "qr-unavailable",
            Self::Storage(_) => "storage",
        }
    }
}

impl From<LogError> for ServiceError {
    fn from(e: LogError) -> Self {
        Self::Storage(e.to_string())
    }
}

impl From<ApplyError> for ServiceError {
    fn from(e: ApplyError) -> Self {
        Self::Storage(e.to_string())
    }
}

/// The JSON error body.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            code: self.code().to_owned(),
            message: self.to_string(),
        };
        (self.status(), Json(body)).into_response()
    }
}
