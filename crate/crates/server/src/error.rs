use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use etable_core::Error;
use serde::{Deserialize, Serialize};

/// The uniform error body: a stable `code`, a human message and optional
/// structured detail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorEnvelope {
    pub code: String,
    pub message: String,
    #[serde(default)]
    pub detail: serde_json::Value,
}

#[derive(Debug, Clone)]
pub struct ApiError {
    pub status: StatusCode,
    pub envelope: ErrorEnvelope,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self {
            status,
            envelope: ErrorEnvelope { code: code.into(), message: message.into(), detail: serde_json::Value::Null },
        }
    }

    pub fn with_detail(mut self, detail: serde_json::Value) -> Self {
        self.envelope.detail = detail;
        self
    }

    pub fn unknown_session(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "unknown_session", format!("no session `{id}`"))
            .with_detail(serde_json::json!({ "session": id }))
    }

    pub fn malformed(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "malformed_envelope", message)
    }
}

/// Status by error class: bad input is 400, references to things that do
/// not exist are 404, requests that are well formed but not applicable to
/// the current state are 422, and server-side failures are 500.
pub fn status_for(err: &Error) -> StatusCode {
    match err {
        Error::InvalidArgument(_) | Error::Serde(_) | Error::Predicate(_) => StatusCode::BAD_REQUEST,
        Error::UnknownType(_)
        | Error::UnknownEdgeType(_)
        | Error::UnknownNode(_)
        | Error::UnknownColumn(_)
        | Error::UnknownRow(_) => StatusCode::NOT_FOUND,
        Error::Io(_) | Error::InvalidGraph(_) => StatusCode::INTERNAL_SERVER_ERROR,
        _ => StatusCode::UNPROCESSABLE_ENTITY,
    }
}

impl From<Error> for ApiError {
    fn from(err: Error) -> Self {
        let detail = match &err {
            Error::OutOfRange { step, len } => serde_json::json!({ "step": step, "len": len }),
            _ => serde_json::Value::Null,
        };
        Self::new(status_for(&err), err.code(), err.to_string()).with_detail(detail)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.envelope)).into_response()
    }
}
