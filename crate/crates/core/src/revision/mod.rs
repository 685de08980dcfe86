//! Word-level tracked changes and the branching snapshot history.

mod diff;
mod history;

pub use diff::{diff, resolve, tokenize, ChangeSet, Decision, Resolution, ResolveError, Run};
pub use history::{HistoryError, HistoryTree, Snapshot};
