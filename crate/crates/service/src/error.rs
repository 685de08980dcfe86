use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};

use storyloom_core::algebra::AlgebraError;
use storyloom_core::edit::EditError;
use storyloom_core::extract::ExtractError;
use storyloom_core::gateway::GatewayError;
use storyloom_core::model::ModelError;
use storyloom_core::project::{ProjectError, ProjectFileError};

/// The JSON body of every error response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
#[error("{message}")]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub column: Option<usize>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self { status, code, message: message.into(), column: None }
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", message)
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid", message)
    }

    pub fn conflict(message: impl Into<String>) -> Self {
        Self::new(StatusCode::CONFLICT, "conflict", message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }

    pub fn body(&self) -> ErrorBody {
        ErrorBody { code: self.code.to_string(), message: self.message.clone(), column: self.column }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(serde_json::json!({ "error": self.body() }))).into_response()
    }
}

impl From<GatewayError> for ApiError {
    fn from(err: GatewayError) -> Self {
        Self::new(StatusCode::BAD_GATEWAY, err.kind(), err.to_string())
    }
}

impl From<ExtractError> for ApiError {
    fn from(err: ExtractError) -> Self {
        Self::new(StatusCode::BAD_GATEWAY, err.gateway_error().kind(), err.to_string())
    }
}

impl From<EditError> for ApiError {
    fn from(err: EditError) -> Self {
        match err {
            EditError::Compile(e) => Self::invalid(e.to_string()),
            EditError::Failed(e) => e.into(),
        }
    }
}

impl From<ProjectError> for ApiError {
    fn from(err: ProjectError) -> Self {
        match err {
            ProjectError::Edit(e) => e.into(),
            ProjectError::Extract(e) => e.into(),
            ProjectError::History(e) => Self::not_found(e.to_string()),
            ProjectError::NoPending => Self::conflict(err.to_string()),
            ProjectError::Superseded { .. } => Self::conflict(err.to_string()),
            ProjectError::Resolve(e) => Self::invalid(e.to_string()),
        }
    }
}

impl From<ProjectFileError> for ApiError {
    fn from(err: ProjectFileError) -> Self {
        match err {
            ProjectFileError::Io { .. } => Self::internal(err.to_string()),
            ProjectFileError::Parse { .. } | ProjectFileError::Migration { .. } => {
                Self::new(StatusCode::UNPROCESSABLE_ENTITY, "corrupt_project", err.to_string())
            }
        }
    }
}

impl From<AlgebraError> for ApiError {
    fn from(err: AlgebraError) -> Self {
        let column = match &err {
            AlgebraError::Expr(e) => e.column(),
            AlgebraError::Unavailable(_) => None,
        };
        Self { column, ..Self::invalid(err.to_string()) }
    }
}

impl From<ModelError> for ApiError {
    fn from(err: ModelError) -> Self {
        match err {
            ModelError::Range { .. } => Self::invalid(err.to_string()),
            _ => Self::not_found(err.to_string()),
        }
    }
}
