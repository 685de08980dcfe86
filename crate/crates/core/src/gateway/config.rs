use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::GatewayError;

pub const DEFAULT_API_KEY_ENV: &str = "STORYLOOM_API_KEY";

/// Provider settings. The API key itself is never stored, only the name of
/// the environment variable holding it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GatewayConfig {
    pub base_url: String,
    pub api_key_env: String,
    pub model_name: String,
    pub request_timeout_secs: f64,
    pub max_retries: usize,
    pub max_parallel: usize,
    /// First retry delay; doubles on each further attempt.
    #[serde(default = "default_backoff_ms")]
    pub backoff_base_ms: u64,
    /// Sampling temperature; provider default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
}

fn default_backoff_ms() -> u64 {
    500
}

impl Default for GatewayConfig {
    fn default() -> Self {
        Self {
            base_url: "https://api.openai.com/v1".into(),
            api_key_env: DEFAULT_API_KEY_ENV.into(),
            model_name: "gpt-4o".into(),
            request_timeout_secs: 60.0,
            max_retries: 2,
            max_parallel: 8,
            backoff_base_ms: default_backoff_ms(),
            temperature: None,
        }
    }
}

impl GatewayConfig {
    /// Settings for scripted and replayed transports: no backoff delays.
    pub fn offline() -> Self {
        Self {
            base_url: "offline://".into(),
            model_name: "offline".into(),
            backoff_base_ms: 0,
            ..Self::default()
        }
    }

    /// Defaults overridden by `STORYLOOM_BASE_URL`, `STORYLOOM_MODEL` and
    /// `STORYLOOM_MAX_PARALLEL`.
    pub fn from_env() -> Result<Self, GatewayError> {
        Self::from_lookup(|key| std::env::var(key).ok())
    }

    pub fn from_lookup(lookup: impl Fn(&str) -> Option<String>) -> Result<Self, GatewayError> {
        let mut config = Self::default();
        if let Some(url) = lookup("STORYLOOM_BASE_URL") {
            config.base_url = url.trim_end_matches('/').to_string();
        }
        if let Some(model) = lookup("STORYLOOM_MODEL") {
            config.model_name = model;
        }
        if let Some(parallel) = lookup("STORYLOOM_MAX_PARALLEL") {
            config.max_parallel = parallel
                .parse()
                .map_err(|_| GatewayError::Config(format!("STORYLOOM_MAX_PARALLEL=`{parallel}` is not a count")))?;
        }
        if let Some(name) = lookup("STORYLOOM_API_KEY_ENV") {
            config.api_key_env = name;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), GatewayError> {
        if !(self.request_timeout_secs > 0.0) {
            return Err(GatewayError::Config("request timeout must be positive".into()));
        }
        if self.max_parallel == 0 {
            return Err(GatewayError::Config("max parallel must be at least 1".into()));
        }
        Ok(())
    }

    pub fn backoff(&self, attempt: usize) -> Duration {
        let factor = 1u64 << (attempt.saturating_sub(1)).min(16);
        Duration::from_millis(self.backoff_base_ms.saturating_mul(factor))
    }
}
