use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use async_trait::async_trait;
use serde_json::{Map, Value};

use super::{GatewayConfig, GatewayError, ScriptEntry, ScriptedError, ScriptedTransport, Transport};
use crate::prompt::PromptSpec;

const ERROR_KEY: &str = "$error";

/// Recorded replies keyed by request digest.
///
/// On disk this is a JSON object mapping each digest to the payload the
/// provider returned. A scripted failure is stored as `{"$error": {...}}`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FixtureFile {
    pub entries: BTreeMap<String, Result<Value, ScriptedError>>,
}

impl FixtureFile {
    pub fn path_for(dir: &Path, tag: &str) -> PathBuf {
        dir.join(format!("{tag}.json"))
    }

    pub fn insert(&mut self, prompt: &PromptSpec, payload: Value) {
        self.entries.insert(prompt.digest(), Ok(payload));
    }

    pub fn insert_error(&mut self, prompt: &PromptSpec, error: ScriptedError) {
        self.entries.insert(prompt.digest(), Err(error));
    }

    pub fn to_json(&self) -> Value {
        let map: Map<String, Value> = self
            .entries
            .iter()
            .map(|(digest, reply)| {
                let value = match reply {
                    Ok(payload) => payload.clone(),
                    Err(err) => serde_json::json!({ ERROR_KEY: err }),
                };
                (digest.clone(), value)
            })
            .collect();
        Value::Object(map)
    }

    pub fn from_json(value: Value) -> Result<Self, GatewayError> {
        let Value::Object(map) = value else {
            return Err(GatewayError::Fixture("expected an object of digest → payload".into()));
        };
        let mut entries = BTreeMap::new();
        for (digest, value) in map {
            let reply = match value {
                Value::Object(ref obj) if obj.len() == 1 && obj.contains_key(ERROR_KEY) => {
                    let err = serde_json::from_value(obj[ERROR_KEY].clone())
                        .map_err(|e| GatewayError::Fixture(format!("{digest}: {e}")))?;
                    Err(err)
                }
                payload => Ok(payload),
            };
            entries.insert(digest, reply);
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, GatewayError> {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| GatewayError::Fixture(format!("{}: {e}", path.display())))?;
        let value = serde_json::from_str(&raw)
            .map_err(|e| GatewayError::Fixture(format!("{}: {e}", path.display())))?;
        Self::from_json(value)
    }

    /// Writes the file through a temporary sibling and a rename, so readers
    /// see either the old or the new fixture, never a partial one.
    pub fn save(&self, path: &Path) -> Result<(), GatewayError> {
        let io = |e: std::io::Error| GatewayError::Fixture(format!("{}: {e}", path.display()));
        let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
        let mut body = serde_json::to_string_pretty(&self.to_json()).expect("fixture serializes");
        body.push('\n');
        tmp.write_all(body.as_bytes()).map_err(io)?;
        tmp.persist(path).map_err(|e| io(e.error))?;
        Ok(())
    }
}

/// Serves recorded replies; a request without a recording is an error.
#[derive(Debug)]
pub struct ReplayTransport {
    fixture: FixtureFile,
}

impl ReplayTransport {
    pub fn new(fixture: FixtureFile) -> Self {
        Self { fixture }
    }

    /// Loads a mock file: either a replay fixture or `{"script": [entries]}`.
    pub fn load_mock(path: &Path) -> Result<Arc<dyn Transport>, GatewayError> {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| GatewayError::Fixture(format!("{}: {e}", path.display())))?;
        let value: Value = serde_json::from_str(&raw)
            .map_err(|e| GatewayError::Fixture(format!("{}: {e}", path.display())))?;
        if let Some(script) = value.get("script").filter(|s| s.is_array()) {
            let entries: Vec<ScriptEntry> = serde_json::from_value(script.clone())
                .map_err(|e| GatewayError::Fixture(format!("{}: {e}", path.display())))?;
            return Ok(Arc::new(ScriptedTransport::new(entries)));
        }
        Ok(Arc::new(Self::new(FixtureFile::from_json(value)?)))
    }
}

#[async_trait]
impl Transport for ReplayTransport {
    async fn send(&self, prompt: &PromptSpec, _config: &GatewayConfig) -> Result<String, GatewayError> {
        let digest = prompt.digest();
        match self.fixture.entries.get(&digest) {
            Some(Ok(payload)) => Ok(payload.to_string()),
            Some(Err(err)) => Err(err.into()),
            None => Err(GatewayError::Unmatched {
                digest,
                purpose: prompt.purpose.to_string(),
            }),
        }
    }

    fn is_offline(&self) -> bool {
        true
    }
}

/// Passes requests through and captures each successful reply.
pub struct RecordingTransport {
    inner: Arc<dyn Transport>,
    recorded: Mutex<FixtureFile>,
}

impl RecordingTransport {
    pub fn new(inner: Arc<dyn Transport>) -> Self {
        Self {
            inner,
            recorded: Mutex::new(FixtureFile::default()),
        }
    }

    pub fn fixture(&self) -> FixtureFile {
        self.recorded.lock().expect("fixture lock").clone()
    }

    /// Replaces whatever was recorded at `path` before.
    pub fn save(&self, path: &Path) -> Result<(), GatewayError> {
        self.fixture().save(path)
    }
}

#[async_trait]
impl Transport for RecordingTransport {
    async fn send(&self, prompt: &PromptSpec, config: &GatewayConfig) -> Result<String, GatewayError> {
        let payload = self.inner.send(prompt, config).await?;
        if let Ok(value) = serde_json::from_str(&payload) {
            self.recorded.lock().expect("fixture lock").insert(prompt, value);
        }
        Ok(payload)
    }

    fn is_offline(&self) -> bool {
        self.inner.is_offline()
    }
}
