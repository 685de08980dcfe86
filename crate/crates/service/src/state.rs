use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use chrono::{DateTime, Utc};
use tokio::sync::RwLock;

use storyloom_core::gateway::Gateway;
use storyloom_core::project::{self, Project};

use crate::error::ApiError;
use crate::jobs::JobRegistry;

pub type Clock = Arc<dyn Fn() -> DateTime<Utc> + Send + Sync>;

/// A loaded project and the single-writer token guarding it.
#[derive(Debug)]
pub struct Slot {
    pub project: RwLock<Project>,
    writer: Mutex<Option<String>>,
}

/// Held while a mutation runs; releases the project on drop.
#[derive(Debug)]
pub struct WriteToken {
    slot: Arc<Slot>,
}

impl Drop for WriteToken {
    fn drop(&mut self) {
        *self.slot.writer.lock().expect("writer lock") = None;
    }
}

impl Slot {
    fn new(project: Project) -> Self {
        Self { project: RwLock::new(project), writer: Mutex::new(None) }
    }

    /// Claims the project for one mutation, or fails with a conflict if
    /// another one is under way.
    pub fn claim(self: &Arc<Self>, what: &str) -> Result<WriteToken, ApiError> {
        let mut writer = self.writer.lock().expect("writer lock");
        if let Some(running) = writer.as_deref() {
            return Err(ApiError::conflict(format!("cannot {what} while {running} is running")));
        }
        *writer = Some(what.to_string());
        Ok(WriteToken { slot: self.clone() })
    }
}

pub struct AppState {
    pub data_dir: PathBuf,
    pub gateway: Arc<Gateway>,
    pub clock: Clock,
    pub jobs: JobRegistry,
    projects: Mutex<HashMap<String, Arc<Slot>>>,
}

impl std::fmt::Debug for AppState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AppState")
            .field("data_dir", &self.data_dir)
            .field("gateway", &self.gateway)
            .finish_non_exhaustive()
    }
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

impl AppState {
    pub fn new(data_dir: PathBuf, gateway: Arc<Gateway>, clock: Clock) -> Self {
        Self { data_dir, gateway, clock, jobs: JobRegistry::default(), projects: Mutex::new(HashMap::new()) }
    }

    pub fn now(&self) -> DateTime<Utc> {
        (self.clock)()
    }

    pub fn path_for(&self, id: &str) -> PathBuf {
        self.data_dir.join(format!("{id}.json"))
    }

    /// The project with this id, loading it from the data directory on
    /// first use.
    pub fn slot(&self, id: &str) -> Result<Arc<Slot>, ApiError> {
        if !valid_id(id) {
            return Err(ApiError::not_found(format!("no project `{id}`")));
        }
        if let Some(slot) = self.projects.lock().expect("projects lock").get(id) {
            return Ok(slot.clone());
        }
        let path = self.path_for(id);
        if !path.exists() {
            return Err(ApiError::not_found(format!("no project `{id}`")));
        }
        let project = project::load(&path)?;
        let mut projects = self.projects.lock().expect("projects lock");
        Ok(projects.entry(id.to_string()).or_insert_with(|| Arc::new(Slot::new(project))).clone())
    }

    pub fn insert(&self, project: Project) -> Result<Arc<Slot>, ApiError> {
        self.persist(&project)?;
        let slot = Arc::new(Slot::new(project.clone()));
        self.projects.lock().expect("projects lock").insert(project.id.clone(), slot.clone());
        Ok(slot)
    }

    pub fn persist(&self, project: &Project) -> Result<(), ApiError> {
        std::fs::create_dir_all(&self.data_dir)
            .map_err(|e| ApiError::internal(format!("{}: {e}", self.data_dir.display())))?;
        project::save(project, &self.path_for(&project.id))?;
        Ok(())
    }

    pub fn new_id(&self) -> String {
        uuid::Uuid::new_v4().simple().to_string()
    }

    pub fn is_valid_id(id: &str) -> bool {
        valid_id(id)
    }
}
