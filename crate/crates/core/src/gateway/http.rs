use std::time::Duration;

use async_trait::async_trait;
use serde_json::{json, Value};

use super::{redact, GatewayConfig, GatewayError, Transport};
use crate::prompt::PromptSpec;

/// OpenAI-compatible `POST {baseUrl}/chat/completions` with a JSON-schema
/// response format.
pub struct HttpTransport {
    client: reqwest::Client,
    api_key: String,
}

impl std::fmt::Debug for HttpTransport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpTransport")
            .field("api_key", &"[REDACTED]")
            .finish()
    }
}

impl HttpTransport {
    /// Reads the key from the environment variable named in `config`.
    pub fn from_env(config: &GatewayConfig) -> Result<Self, GatewayError> {
        let key = std::env::var(&config.api_key_env)
            .map_err(|_| GatewayError::Config(format!("environment variable {} is not set", config.api_key_env)))?;
        Self::with_key(config, key)
    }

    pub fn with_key(config: &GatewayConfig, api_key: String) -> Result<Self, GatewayError> {
        config.validate()?;
        let client = reqwest::Client::builder()
            .timeout(Duration::from_secs_f64(config.request_timeout_secs))
            .build()
            .map_err(|e| GatewayError::Config(e.to_string()))?;
        Ok(Self { client, api_key })
    }

    pub fn request_body(prompt: &PromptSpec, config: &GatewayConfig) -> Value {
        let mut body = json!({
            "model": config.model_name,
            "messages": [{ "role": "user", "content": prompt.text }],
            "response_format": {
                "type": "json_schema",
                "json_schema": {
                    "name": prompt.purpose.as_str(),
                    "strict": true,
                    "schema": prompt.response_schema,
                }
            }
        });
        if let Some(t) = config.temperature {
            body["temperature"] = json!(t);
        }
        body
    }

    /// Extracts the message content, or the provider's refusal.
    pub fn parse_response(body: &Value) -> Result<String, GatewayError> {
        let message = &body["choices"][0]["message"];
        if let Some(refusal) = message["refusal"].as_str() {
            return Err(GatewayError::Refusal(refusal.to_string()));
        }
        if body["choices"][0]["finish_reason"] == "content_filter" {
            return Err(GatewayError::Refusal("content filter".into()));
        }
        message["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| GatewayError::Transport("response has no message content".into()))
    }
}

#[async_trait]
impl Transport for HttpTransport {
    async fn send(&self, prompt: &PromptSpec, config: &GatewayConfig) -> Result<String, GatewayError> {
        let url = format!("{}/chat/completions", config.base_url.trim_end_matches('/'));
        tracing::debug!(%url, purpose = %prompt.purpose, digest = %prompt.digest(), "sending request");
        let response = self
            .client
            .post(&url)
            .bearer_auth(&self.api_key)
            .json(&Self::request_body(prompt, config))
            .send()
            .await
            .map_err(|e| {
                if e.is_timeout() {
                    GatewayError::Timeout
                } else {
                    GatewayError::Transport(redact(&e.to_string(), &self.api_key))
                }
            })?;
        let status = response.status().as_u16();
        let text = response
            .text()
            .await
            .map_err(|e| GatewayError::Transport(redact(&e.to_string(), &self.api_key)))?;
        let text = redact(&text, &self.api_key);
        match status {
            200..=299 => {}
            401 | 403 => return Err(GatewayError::Auth(text)),
            _ => return Err(GatewayError::Http { status, body: text }),
        }
        let body: Value = serde_json::from_str(&text)
            .map_err(|e| GatewayError::Transport(format!("malformed provider response: {e}")))?;
        Self::parse_response(&body)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompt::Purpose;

    #[test]
    fn body_carries_schema_and_model() {
        let prompt = PromptSpec::new(Purpose::Locations, "story".into());
        let body = HttpTransport::request_body(&prompt, &GatewayConfig::default());
        assert_eq!(body["model"], "gpt-4o");
        assert_eq!(body["messages"][0]["content"], "story");
        assert_eq!(body["response_format"]["json_schema"]["name"], "locations");
        assert_eq!(body["response_format"]["json_schema"]["schema"], prompt.response_schema);
        assert!(body.get("temperature").is_none());
    }

    #[test]
    fn refusal_is_surfaced() {
        let body = json!({ "choices": [{ "message": { "content": null, "refusal": "I can't" } }] });
        assert_eq!(HttpTransport::parse_response(&body), Err(GatewayError::Refusal("I can't".into())));
        let body = json!({ "choices": [{ "message": { "content": "{\"text\":\"x\"}" } }] });
        assert_eq!(HttpTransport::parse_response(&body).unwrap(), "{\"text\":\"x\"}");
    }

    #[test]
    fn debug_hides_key() {
        let t = HttpTransport::with_key(&GatewayConfig::default(), "sk-secret".into()).unwrap();
        assert!(!format!("{t:?}").contains("sk-secret"));
    }
}
