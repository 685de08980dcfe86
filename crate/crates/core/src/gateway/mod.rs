//! Structured-output chat completions behind a pluggable transport.
//!
//! [`Gateway`] owns the policy every request goes through: the global
//! in-flight limit, per-attempt timeouts, retries with exponential backoff
//! for transient failures, and local validation of the payload against the
//! prompt's response schema. Transports only perform single attempts.

mod config;
mod error;
mod http;
mod replay;
mod script;

use std::sync::{Arc, Mutex};
use std::time::Duration;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use tokio::sync::Semaphore;

use crate::prompt::{PromptSpec, Purpose};

pub use config::{GatewayConfig, DEFAULT_API_KEY_ENV};
pub use error::{redact, GatewayError};
pub use http::HttpTransport;
pub use replay::{FixtureFile, RecordingTransport, ReplayTransport};
pub use script::{ScriptEntry, ScriptedError, ScriptedReply, ScriptedTransport};

/// One attempt at one request.
#[async_trait]
pub trait Transport: Send + Sync {
    async fn send(&self, prompt: &PromptSpec, config: &GatewayConfig) -> Result<String, GatewayError>;

    /// True when the transport never touches the network.
    fn is_offline(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GatewayStats {
    /// Logical requests, one per `complete_structured` call.
    pub requests: usize,
    /// Transport attempts including retries.
    pub attempts: usize,
    pub by_purpose: Vec<(Purpose, usize)>,
}

pub struct Gateway {
    transport: Arc<dyn Transport>,
    config: GatewayConfig,
    permits: Arc<Semaphore>,
    stats: Mutex<GatewayStats>,
}

impl std::fmt::Debug for Gateway {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Gateway")
            .field("config", &self.config)
            .field("offline", &self.transport.is_offline())
            .finish_non_exhaustive()
    }
}

impl Gateway {
    pub fn new(transport: Arc<dyn Transport>, config: GatewayConfig) -> Result<Self, GatewayError> {
        config.validate()?;
        Ok(Self {
            permits: Arc::new(Semaphore::new(config.max_parallel)),
            transport,
            config,
            stats: Mutex::new(GatewayStats::default()),
        })
    }

    /// A gateway over a scripted transport with test-friendly defaults.
    pub fn scripted(transport: ScriptedTransport) -> Self {
        Self::new(Arc::new(transport), GatewayConfig::offline()).expect("offline config is valid")
    }

    pub fn config(&self) -> &GatewayConfig {
        &self.config
    }

    pub fn is_offline(&self) -> bool {
        self.transport.is_offline()
    }

    pub fn stats(&self) -> GatewayStats {
        self.stats.lock().expect("stats lock").clone()
    }

    pub fn reset_stats(&self) {
        *self.stats.lock().expect("stats lock") = GatewayStats::default();
    }

    fn record(&self, purpose: Option<Purpose>, attempts: usize) {
        let mut stats = self.stats.lock().expect("stats lock");
        stats.attempts += attempts;
        if let Some(purpose) = purpose {
            stats.requests += 1;
            match stats.by_purpose.iter_mut().find(|(p, _)| *p == purpose) {
                Some((_, n)) => *n += 1,
                None => stats.by_purpose.push((purpose, 1)),
            }
        }
    }

    /// Sends `prompt` and returns the raw JSON payload once it conforms to
    /// the prompt's response schema.
    pub async fn complete_structured(&self, prompt: &PromptSpec) -> Result<String, GatewayError> {
        let _permit = self
            .permits
            .acquire()
            .await
            .map_err(|_| GatewayError::Transport("gateway closed".into()))?;
        self.record(Some(prompt.purpose), 0);

        let timeout = Duration::from_secs_f64(self.config.request_timeout_secs);
        let mut attempt = 0;
        loop {
            attempt += 1;
            self.record(None, 1);
            let result = match tokio::time::timeout(timeout, self.transport.send(prompt, &self.config)).await {
                Ok(result) => result,
                Err(_) => Err(GatewayError::Timeout),
            };
            match result {
                Ok(payload) => {
                    check_payload(prompt, &payload)?;
                    tracing::debug!(purpose = %prompt.purpose, attempt, "request completed");
                    return Ok(payload);
                }
                Err(err) if err.is_retryable() && attempt <= self.config.max_retries => {
                    let backoff = self.config.backoff(attempt);
                    tracing::warn!(purpose = %prompt.purpose, attempt, error = %err, "retrying in {backoff:?}");
                    tokio::time::sleep(backoff).await;
                }
                Err(err) => return Err(err),
            }
        }
    }
}

fn check_payload(prompt: &PromptSpec, payload: &str) -> Result<(), GatewayError> {
    let value: serde_json::Value = serde_json::from_str(payload).map_err(|e| {
        GatewayError::SchemaMismatch(crate::prompt::SchemaError {
            path: "$".into(),
            message: format!("payload is not JSON: {e}"),
        })
    })?;
    prompt
        .purpose
        .shape()
        .validate(&value)
        .map_err(GatewayError::SchemaMismatch)
}
