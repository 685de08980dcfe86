//! A story project: the current (text, model) state, its history, the
//! extraction cache and any pending tracked changes, stored as one JSON file.

mod store;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

pub use store::{load, save, to_json, ProjectFileError};

use crate::edit::{execute, EditError, EditIntent, EditOutcome, EditScope};
use crate::extract::{
    run_full_extraction, run_incremental_extraction, ExtractError, Extraction, ExtractionCache, ExtractionOptions,
    ExtractionReport,
};
use crate::gateway::Gateway;
use crate::model::StoryModel;
use crate::revision::{HistoryError, HistoryTree, Resolution, ResolveError, Snapshot};

pub const FORMAT_VERSION: u32 = 1;

/// Which gateway settings the project was written with. Secrets are never
/// stored, only the name of the variable holding the key.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProjectSettings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api_key_ref: Option<String>,
}

/// An executed edit awaiting accept/reject decisions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PendingChange {
    /// The snapshot the edit was computed against.
    pub base_id: String,
    pub intent: EditIntent,
    pub outcome: EditOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Project {
    pub format_version: u32,
    pub id: String,
    pub name: String,
    pub history: HistoryTree,
    pub cache: ExtractionCache,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pending: Option<PendingChange>,
    /// The next refresh must re-extract everything.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub full_refresh_due: bool,
    #[serde(default)]
    pub settings: ProjectSettings,
}

#[derive(Debug, thiserror::Error)]
pub enum ProjectError {
    #[error(transparent)]
    History(#[from] HistoryError),
    #[error(transparent)]
    Resolve(#[from] ResolveError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error(transparent)]
    Edit(#[from] EditError),
    #[error("there are no pending changes")]
    NoPending,
    #[error("pending changes were computed against `{base}` but the current snapshot is `{current}`")]
    Superseded { base: String, current: String },
}

impl ProjectError {
    /// Errors caused by the request rather than the environment.
    pub fn is_user_error(&self) -> bool {
        match self {
            ProjectError::Edit(e) => e.is_user_error(),
            ProjectError::Extract(_) => false,
            _ => true,
        }
    }
}

/// What a refresh did.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RefreshReport {
    pub full: bool,
    pub committed: bool,
    #[serde(flatten)]
    pub extraction: ExtractionReport,
}

/// Stale when the model was extracted from some other text.
fn with_staleness(text: &str, mut model: StoryModel) -> StoryModel {
    model.stale = model.text != text;
    model
}

impl Project {
    /// A project whose root snapshot holds `text` with nothing extracted yet.
    pub fn new(id: impl Into<String>, name: impl Into<String>, text: &str, now: DateTime<Utc>) -> Self {
        let mut project = Self::empty(id, name);
        project.commit(text.to_string(), StoryModel::unextracted(text), "create", now);
        project
    }

    /// A project whose root snapshot is a finished extraction.
    pub fn from_extraction(
        id: impl Into<String>,
        name: impl Into<String>,
        extraction: Extraction,
        now: DateTime<Utc>,
    ) -> Self {
        let mut project = Self::empty(id, name);
        let text = extraction.model.text.clone();
        project.cache = extraction.cache;
        project.commit(text, extraction.model, "extract", now);
        project
    }

    fn empty(id: impl Into<String>, name: impl Into<String>) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            id: id.into(),
            name: name.into(),
            history: HistoryTree::default(),
            cache: ExtractionCache::default(),
            pending: None,
            full_refresh_due: false,
            settings: ProjectSettings::default(),
        }
    }

    pub fn current(&self) -> &Snapshot {
        self.history.current().expect("a project always has a current snapshot")
    }

    pub fn text(&self) -> &str {
        &self.current().text
    }

    pub fn model(&self) -> &StoryModel {
        &self.current().model
    }

    pub fn is_stale(&self) -> bool {
        self.model().stale
    }

    fn commit(&mut self, text: String, model: StoryModel, label: &str, now: DateTime<Utc>) {
        let model = with_staleness(&text, model);
        self.history.commit(text, model, label.to_string(), now);
    }

    /// A manual text edit: the model is kept and marked stale.
    pub fn set_text(&mut self, text: &str, now: DateTime<Utc>) -> bool {
        if text == self.text() {
            return false;
        }
        let model = self.model().clone();
        self.commit(text.to_string(), model, "edit text", now);
        self.pending = None;
        true
    }

    /// Installs an extraction of the current text as a new snapshot, unless
    /// it changes nothing.
    pub fn apply_extraction(&mut self, extraction: Extraction, label: &str, now: DateTime<Utc>) -> bool {
        self.cache = extraction.cache;
        self.full_refresh_due = false;
        let model = with_staleness(self.text(), extraction.model);
        if &model == self.model() {
            return false;
        }
        let text = self.text().to_string();
        self.commit(text, model, label, now);
        true
    }

    /// Re-extracts the current text. Incremental refreshes fall back to a
    /// full one when an edit asked for it or nothing was extracted yet.
    pub async fn refresh(
        &mut self,
        gateway: &Gateway,
        options: &ExtractionOptions,
        incremental: bool,
        now: DateTime<Utc>,
    ) -> Result<RefreshReport, ProjectError> {
        let never_extracted = self.cache.entities.is_none() && !self.text().trim().is_empty();
        let full = !incremental || self.full_refresh_due || never_extracted;
        let extraction = if full {
            run_full_extraction(self.text(), gateway, options).await?
        } else {
            run_incremental_extraction(self.model(), &self.cache, self.text(), gateway, options).await?
        };
        let report = extraction.report.clone();
        let committed = self.apply_extraction(extraction, "refresh", now);
        Ok(RefreshReport { full, committed, extraction: report })
    }

    /// Runs an edit against the current state. Intents that only touch the
    /// registry are committed at once; the rest become pending changes.
    /// Nothing changes when the edit fails.
    pub async fn edit(
        &mut self,
        intent: &EditIntent,
        scope: Option<&EditScope>,
        gateway: &Gateway,
        now: DateTime<Utc>,
    ) -> Result<EditOutcome, ProjectError> {
        let outcome = execute(intent, scope, self.text(), self.model(), gateway).await?;
        let base_id = self.current().id.clone();
        if intent.needs_prompt() {
            self.pending = Some(PendingChange { base_id, intent: intent.clone(), outcome: outcome.clone() });
        } else {
            let mut model = self.model().clone();
            if let Some(patch) = &outcome.patch {
                patch.apply(&mut model);
            }
            let text = self.text().to_string();
            self.commit(text, model, &intent.to_string(), now);
            self.pending = None;
        }
        Ok(outcome)
    }

    /// Settles the pending changes. Anything accepted is committed as one
    /// snapshot; rejecting everything only discards them.
    pub fn resolve(&mut self, resolution: &Resolution, now: DateTime<Utc>) -> Result<bool, ProjectError> {
        let pending = self.pending.as_ref().ok_or(ProjectError::NoPending)?;
        let current = self.current().id.clone();
        if pending.base_id != current {
            return Err(ProjectError::Superseded { base: pending.base_id.clone(), current });
        }
        let text = pending.outcome.change_set.resolve(resolution)?;
        let accepted = match resolution {
            Resolution::AcceptAll => true,
            Resolution::RejectAll => false,
            Resolution::PerRun { decisions } => decisions.contains(&crate::revision::Decision::Accept),
        };
        let pending = self.pending.take().expect("checked above");
        if !accepted {
            return Ok(false);
        }
        let mut model = self.model().clone();
        if let Some(patch) = &pending.outcome.patch {
            patch.apply(&mut model);
        }
        if pending.outcome.full_refresh && text != self.text() {
            self.full_refresh_due = true;
        }
        self.commit(text, model, &pending.intent.to_string(), now);
        Ok(true)
    }

    /// Moves to an existing snapshot; pending changes are dropped.
    pub fn checkout(&mut self, id: &str) -> Result<&Snapshot, ProjectError> {
        self.history.checkout(id)?;
        self.pending = None;
        self.full_refresh_due = false;
        Ok(self.current())
    }

    /// Broken invariants, empty when the project is consistent.
    pub fn check(&self) -> Vec<String> {
        let mut problems = self.history.check();
        if self.format_version != FORMAT_VERSION {
            problems.push(format!("format version {}", self.format_version));
        }
        if let Some(current) = self.history.current() {
            if current.model.stale != (current.model.text != current.text) {
                problems.push(format!("snapshot {} has an inconsistent stale flag", current.id));
            }
        }
        problems
    }
}
