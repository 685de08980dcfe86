use std::sync::Mutex;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{GatewayConfig, GatewayError, Transport};
use crate::prompt::{PromptSpec, Purpose};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScriptedError {
    Transport { message: String },
    Timeout,
    Auth { message: String },
    Http { status: u16 },
    Refusal { message: String },
}

impl From<&ScriptedError> for GatewayError {
    fn from(err: &ScriptedError) -> Self {
        match err {
            ScriptedError::Transport { message } => GatewayError::Transport(message.clone()),
            ScriptedError::Timeout => GatewayError::Timeout,
            ScriptedError::Auth { message } => GatewayError::Auth(message.clone()),
            ScriptedError::Http { status } => GatewayError::Http {
                status: *status,
                body: String::new(),
            },
            ScriptedError::Refusal { message } => GatewayError::Refusal(message.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScriptedReply {
    Payload(Value),
    Error(ScriptedError),
}

/// Matches requests by purpose and/or a substring of the prompt text, and
/// answers with its replies in turn; the last reply repeats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub purpose: Option<Purpose>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contains: Option<String>,
    pub replies: Vec<ScriptedReply>,
}

impl ScriptEntry {
    pub fn payload(purpose: Option<Purpose>, contains: Option<&str>, payload: Value) -> Self {
        Self {
            purpose,
            contains: contains.map(str::to_string),
            replies: vec![ScriptedReply::Payload(payload)],
        }
    }

    pub fn error(purpose: Option<Purpose>, contains: Option<&str>, error: ScriptedError) -> Self {
        Self {
            purpose,
            contains: contains.map(str::to_string),
            replies: vec![ScriptedReply::Error(error)],
        }
    }

    fn matches(&self, prompt: &PromptSpec) -> bool {
        self.purpose.is_none_or(|p| p == prompt.purpose)
            && self
                .contains
                .as_deref()
                .is_none_or(|needle| prompt.text.contains(needle))
    }
}

/// A deterministic in-memory transport for tests and offline runs.
#[derive(Debug, Default)]
pub struct ScriptedTransport {
    entries: Vec<ScriptEntry>,
    cursors: Mutex<Vec<usize>>,
    calls: Mutex<Vec<PromptSpec>>,
}

impl ScriptedTransport {
    pub fn new(entries: Vec<ScriptEntry>) -> Self {
        Self {
            cursors: Mutex::new(vec![0; entries.len()]),
            entries,
            calls: Mutex::new(Vec::new()),
        }
    }

    /// Every prompt received so far, in arrival order.
    pub fn calls(&self) -> Vec<PromptSpec> {
        self.calls.lock().expect("calls lock").clone()
    }

    pub fn entries(&self) -> &[ScriptEntry] {
        &self.entries
    }

    fn reply(&self, prompt: &PromptSpec) -> Result<ScriptedReply, GatewayError> {
        let matching: Vec<usize> = self
            .entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.matches(prompt))
            .map(|(i, _)| i)
            .collect();
        let index = match matching.as_slice() {
            [] => {
                return Err(GatewayError::Unmatched {
                    digest: prompt.digest(),
                    purpose: prompt.purpose.to_string(),
                })
            }
            [one] => *one,
            _ => return Err(GatewayError::Ambiguous { digest: prompt.digest() }),
        };
        let entry = &self.entries[index];
        let mut cursors = self.cursors.lock().expect("cursor lock");
        let at = cursors[index].min(entry.replies.len().saturating_sub(1));
        cursors[index] += 1;
        entry
            .replies
            .get(at)
            .cloned()
            .ok_or_else(|| GatewayError::Fixture("script entry has no replies".into()))
    }
}

#[async_trait]
impl Transport for ScriptedTransport {
    async fn send(&self, prompt: &PromptSpec, _config: &GatewayConfig) -> Result<String, GatewayError> {
        self.calls.lock().expect("calls lock").push(prompt.clone());
        match self.reply(prompt)? {
            ScriptedReply::Payload(value) => Ok(value.to_string()),
            ScriptedReply::Error(err) => Err((&err).into()),
        }
    }

    fn is_offline(&self) -> bool {
        true
    }
}
