use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::model::StoryModel;

/// A stored (text, model) state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Snapshot {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_id: Option<String>,
    pub text: String,
    pub model: StoryModel,
    pub label: String,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum HistoryError {
    #[error("no snapshot `{0}`")]
    NotFound(String),
}

/// Branching history. Snapshots are kept in commit order; committing after
/// checking out an older snapshot starts a new branch from it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HistoryTree {
    pub snapshots: Vec<Snapshot>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub current_id: Option<String>,
}

impl HistoryTree {
    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn get(&self, id: &str) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| s.id == id)
    }

    pub fn current(&self) -> Option<&Snapshot> {
        self.current_id.as_deref().and_then(|id| self.get(id))
    }

    pub fn root(&self) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| s.parent_id.is_none())
    }

    pub fn children(&self, id: &str) -> Vec<&Snapshot> {
        self.snapshots
            .iter()
            .filter(|s| s.parent_id.as_deref() == Some(id))
            .collect()
    }

    /// Appends a snapshot under the current one and makes it current.
    pub fn commit(
        &mut self,
        text: impl Into<String>,
        model: StoryModel,
        label: impl Into<String>,
        created_at: DateTime<Utc>,
    ) -> &Snapshot {
        let id = StoryModel::next_id("s", self.snapshots.iter().map(|s| s.id.as_str()));
        self.snapshots.push(Snapshot {
            id: id.clone(),
            parent_id: self.current_id.clone(),
            text: text.into(),
            model,
            label: label.into(),
            created_at,
        });
        self.current_id = Some(id);
        self.snapshots.last().expect("just pushed")
    }

    /// Moves the current pointer and returns the stored state verbatim.
    pub fn checkout(&mut self, id: &str) -> Result<&Snapshot, HistoryError> {
        let index = self
            .snapshots
            .iter()
            .position(|s| s.id == id)
            .ok_or_else(|| HistoryError::NotFound(id.to_string()))?;
        self.current_id = Some(id.to_string());
        Ok(&self.snapshots[index])
    }

    /// Ids from the root down to `id`.
    pub fn lineage(&self, id: &str) -> Result<Vec<&str>, HistoryError> {
        let mut path = Vec::new();
        let mut cursor = Some(id);
        while let Some(at) = cursor {
            let snapshot = self.get(at).ok_or_else(|| HistoryError::NotFound(at.to_string()))?;
            path.push(snapshot.id.as_str());
            if path.len() > self.snapshots.len() {
                break;
            }
            cursor = snapshot.parent_id.as_deref();
        }
        path.reverse();
        Ok(path)
    }

    /// Structural problems, empty when the tree is sound: one root, unique
    /// ids, parents resolve, no cycles, current resolves.
    pub fn check(&self) -> Vec<String> {
        let mut problems = Vec::new();
        let roots = self.snapshots.iter().filter(|s| s.parent_id.is_none()).count();
        if !self.snapshots.is_empty() && roots != 1 {
            problems.push(format!("{roots} roots"));
        }
        let mut seen = std::collections::HashSet::new();
        for s in &self.snapshots {
            if !seen.insert(s.id.as_str()) {
                problems.push(format!("duplicate id {}", s.id));
            }
            if let Some(parent) = &s.parent_id {
                if self.get(parent).is_none() {
                    problems.push(format!("{} has missing parent {parent}", s.id));
                }
            }
        }
        for s in &self.snapshots {
            match self.lineage(&s.id) {
                Ok(path) if path.len() > self.snapshots.len() => {
                    problems.push(format!("{} is on a cycle", s.id))
                }
                Ok(path) if self.get(path[0]).is_some_and(|r| r.parent_id.is_some()) => {
                    problems.push(format!("{} is not reachable from the root", s.id))
                }
                Ok(_) => {}
                Err(e) => problems.push(e.to_string()),
            }
        }
        match (&self.current_id, self.snapshots.is_empty()) {
            (None, false) => problems.push("no current snapshot".into()),
            (Some(id), _) if self.get(id).is_none() => problems.push(format!("current {id} is missing")),
            _ => {}
        }
        problems
    }
}
