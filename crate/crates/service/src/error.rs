use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use nlflow_core::{Error, ErrorCategory, ErrorReport};
use serde::{Deserialize, Serialize};

use crate::sessions::Busy;

/// Error body: an `ErrorReport` plus the specific failure name when known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub category: ErrorCategory,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, category: ErrorCategory, error: &str, message: impl Into<String>) -> ApiError {
        ApiError {
            status,
            body: ErrorBody {
                category,
                message: message.into(),
                span: None,
                error: Some(error.to_string()),
            },
        }
    }

    pub fn session_not_found(id: &str) -> ApiError {
        ApiError::new(
            StatusCode::NOT_FOUND,
            ErrorCategory::ContextInvalid,
            "SessionNotFound",
            format!("no session {id}"),
        )
    }

    pub fn bad_request(message: impl Into<String>) -> ApiError {
        ApiError::new(
            StatusCode::BAD_REQUEST,
            ErrorCategory::OptionsError,
            "BadRequest",
            message,
        )
    }
}

fn status_for(category: ErrorCategory) -> StatusCode {
    match category {
        ErrorCategory::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        _ => StatusCode::UNPROCESSABLE_ENTITY,
    }
}

impl From<ErrorReport> for ApiError {
    fn from(r: ErrorReport) -> ApiError {
        ApiError {
            status: status_for(r.category),
            body: ErrorBody {
                category: r.category,
                message: r.message,
                span: r.span,
                error: None,
            },
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> ApiError {
        let status = match e {
            Error::MalformedData(_) => StatusCode::BAD_REQUEST,
            _ => status_for(ErrorCategory::of(&e)),
        };
        ApiError::new(status, ErrorCategory::of(&e), e.name(), e.to_string())
    }
}

impl From<Busy> for ApiError {
    fn from(_: Busy) -> ApiError {
        ApiError::new(
            StatusCode::CONFLICT,
            ErrorCategory::ContextInvalid,
            "Busy",
            "another request is modifying this session",
        )
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}
