use serde::{Serialize, Serializer};

use crate::prompt::SchemaError;

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum GatewayError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("request timed out")]
    Timeout,
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("provider returned HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("provider refused the request: {0}")]
    Refusal(String),
    #[error(transparent)]
    SchemaMismatch(SchemaError),
    #[error("no fixture matches request {digest} ({purpose})")]
    Unmatched { digest: String, purpose: String },
    #[error("request {digest} matches more than one script entry")]
    Ambiguous { digest: String },
    #[error("gateway configuration: {0}")]
    Config(String),
    #[error("fixture file: {0}")]
    Fixture(String),
}

impl GatewayError {
    /// Machine-readable error class.
    pub fn kind(&self) -> &'static str {
        match self {
            GatewayError::Transport(_) => "transport",
            GatewayError::Timeout => "timeout",
            GatewayError::Auth(_) => "auth",
            GatewayError::Http { .. } => "http",
            GatewayError::Refusal(_) => "refusal",
            GatewayError::SchemaMismatch(_) => "schema_mismatch",
            GatewayError::Unmatched { .. } => "unmatched",
            GatewayError::Ambiguous { .. } => "ambiguous",
            GatewayError::Config(_) => "config",
            GatewayError::Fixture(_) => "fixture",
        }
    }

    /// Transport failures, timeouts and 5xx responses are transient.
    pub fn is_retryable(&self) -> bool {
        match self {
            GatewayError::Transport(_) | GatewayError::Timeout => true,
            GatewayError::Http { status, .. } => *status >= 500,
            _ => false,
        }
    }
}

impl Serialize for GatewayError {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("GatewayError", 2)?;
        s.serialize_field("kind", self.kind())?;
        s.serialize_field("message", &self.to_string())?;
        s.end()
    }
}

/// Replaces every occurrence of `secret` in `text`.
pub fn redact(text: &str, secret: &str) -> String {
    if secret.is_empty() {
        return text.to_string();
    }
    text.replace(secret, "[REDACTED]")
}
