use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use tokio::sync::watch;

use crate::error::{ApiError, ErrorBody};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobKind {
    Extract,
    Edit,
    Rewrite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobStatus {
    Queued,
    Running,
    Done,
    Failed,
}

impl JobStatus {
    pub fn is_terminal(self) -> bool {
        matches!(self, JobStatus::Done | JobStatus::Failed)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub completed: usize,
    pub total: usize,
}

/// One entry of a job's event stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", rename_all_fields = "camelCase")]
pub enum JobEvent {
    Sentence { sentence_index: usize, completed: usize, total: usize },
    Done { result: Value },
    Failed { error: ErrorBody },
}

impl JobEvent {
    pub fn name(&self) -> &'static str {
        match self {
            JobEvent::Sentence { .. } => "sentence",
            JobEvent::Done { .. } => "done",
            JobEvent::Failed { .. } => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct JobSnapshot {
    pub id: String,
    pub project_id: String,
    pub kind: JobKind,
    pub status: JobStatus,
    pub progress: Progress,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorBody>,
}

#[derive(Debug)]
struct JobState {
    snapshot: JobSnapshot,
    events: Vec<JobEvent>,
}

/// A job and its event log. Subscribers replay the log from the start, so
/// late subscribers miss nothing.
#[derive(Debug)]
pub struct Job {
    state: Mutex<JobState>,
    tick: watch::Sender<usize>,
}

impl Job {
    fn new(id: String, project_id: String, kind: JobKind) -> Self {
        Self {
            state: Mutex::new(JobState {
                snapshot: JobSnapshot {
                    id,
                    project_id,
                    kind,
                    status: JobStatus::Queued,
                    progress: Progress::default(),
                    result: None,
                    error: None,
                },
                events: Vec::new(),
            }),
            tick: watch::Sender::new(0),
        }
    }

    pub fn snapshot(&self) -> JobSnapshot {
        self.state.lock().expect("job lock").snapshot.clone()
    }

    fn update(&self, f: impl FnOnce(&mut JobState)) {
        let count = {
            let mut state = self.state.lock().expect("job lock");
            if state.snapshot.status.is_terminal() {
                return;
            }
            f(&mut state);
            state.events.len()
        };
        self.tick.send_replace(count);
    }

    pub fn start(&self) {
        self.update(|s| s.snapshot.status = JobStatus::Running);
    }

    pub fn sentence_done(&self, sentence_index: usize, completed: usize, total: usize) {
        self.update(|s| {
            // Progress never moves backwards.
            if completed > s.snapshot.progress.completed {
                s.snapshot.progress = Progress { completed, total };
            }
            s.events.push(JobEvent::Sentence { sentence_index, completed, total });
        });
    }

    pub fn finish(&self, result: Value) {
        self.update(|s| {
            s.snapshot.status = JobStatus::Done;
            s.snapshot.result = Some(result.clone());
            s.events.push(JobEvent::Done { result });
        });
    }

    pub fn fail(&self, error: &ApiError) {
        self.update(|s| {
            s.snapshot.status = JobStatus::Failed;
            s.snapshot.error = Some(error.body());
            s.events.push(JobEvent::Failed { error: error.body() });
        });
    }

    /// The event at `index`, waiting for it if the job is still going.
    /// `None` once the log is complete.
    pub async fn event(&self, index: usize) -> Option<JobEvent> {
        let mut rx = self.tick.subscribe();
        loop {
            {
                let state = self.state.lock().expect("job lock");
                if let Some(event) = state.events.get(index) {
                    return Some(event.clone());
                }
                if state.snapshot.status.is_terminal() {
                    return None;
                }
            }
            if rx.changed().await.is_err() {
                return None;
            }
        }
    }
}

#[derive(Debug, Default)]
pub struct JobRegistry {
    jobs: Mutex<HashMap<String, Arc<Job>>>,
}

impl JobRegistry {
    pub fn create(&self, project_id: &str, kind: JobKind) -> Arc<Job> {
        let id = uuid::Uuid::new_v4().simple().to_string();
        let job = Arc::new(Job::new(id.clone(), project_id.to_string(), kind));
        self.jobs.lock().expect("jobs lock").insert(id, job.clone());
        job
    }

    pub fn get(&self, id: &str) -> Option<Arc<Job>> {
        self.jobs.lock().expect("jobs lock").get(id).cloned()
    }
}
