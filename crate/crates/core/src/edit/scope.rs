use serde::{Deserialize, Serialize};

use super::CompileError;
use crate::extract::segment_sentences;
use crate::model::{char_len, char_slice, StoryModel};

/// A selection in the current text, in character offsets. An empty range
/// is a caret and selects its sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EditScope {
    pub char_start: usize,
    pub char_end: usize,
}

/// A scope widened to whole sentences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SnappedScope {
    pub char_start: usize,
    pub char_end: usize,
    /// End of the whitespace after the passage. Word-level changes made by
    /// a scoped edit fall inside `char_start..token_end`.
    pub token_end: usize,
}

impl EditScope {
    pub fn new(char_start: usize, char_end: usize) -> Self {
        Self { char_start, char_end }
    }

    /// The sentences holding the given events, as one range. `None` when
    /// no event is given.
    pub fn from_events(model: &StoryModel, event_ids: &[String]) -> Result<Option<Self>, CompileError> {
        let mut range: Option<(usize, usize)> = None;
        for id in event_ids {
            let event = model.event(id).ok_or_else(|| CompileError::UnknownEvent(id.clone()))?;
            let span = &model.sentences[event.sentence_index];
            range = Some(match range {
                None => (span.char_start, span.char_end),
                Some((s, e)) => (s.min(span.char_start), e.max(span.char_end)),
            });
        }
        Ok(range.map(|(s, e)| EditScope::new(s, e)))
    }

    /// Widens the range to the sentences of `text` it touches. Returns
    /// `None` when that covers every sentence, since the edit is then
    /// unscoped.
    pub fn snap(&self, text: &str) -> Result<Option<SnappedScope>, CompileError> {
        let len = char_len(text);
        let (start, end) = (self.char_start, self.char_end);
        let out_of_range = || CompileError::Range { start, end, len };
        if start > end || end > len {
            return Err(out_of_range());
        }
        let sentences = segment_sentences(text);
        let touched: Vec<_> = if start == end {
            sentences
                .iter()
                .find(|s| s.char_start <= start && start <= s.char_end)
                .into_iter()
                .collect()
        } else {
            sentences
                .iter()
                .filter(|s| s.char_start < end && start < s.char_end)
                .collect()
        };
        let (Some(first), Some(last)) = (touched.first(), touched.last()) else {
            return Err(CompileError::EmptyScope { start, end });
        };
        if touched.len() == sentences.len() {
            return Ok(None);
        }
        let trailing = char_slice(text, last.char_end, len)
            .chars()
            .take_while(|c| c.is_whitespace())
            .count();
        Ok(Some(SnappedScope {
            char_start: first.char_start,
            char_end: last.char_end,
            token_end: last.char_end + trailing,
        }))
    }
}

impl SnappedScope {
    pub fn passage<'t>(&self, text: &'t str) -> &'t str {
        char_slice(text, self.char_start, self.char_end)
    }

    /// `text` with the passage replaced by `replacement`.
    pub fn splice(&self, text: &str, replacement: &str) -> String {
        let len = char_len(text);
        format!(
            "{}{}{}",
            char_slice(text, 0, self.char_start),
            replacement,
            char_slice(text, self.char_end, len)
        )
    }

    /// True when every changed region lies inside the scope.
    pub fn contains_changes(&self, changes: &crate::revision::ChangeSet) -> bool {
        changes
            .changed_ranges()
            .iter()
            .all(|&(s, e)| self.char_start <= s && e <= self.token_end)
    }
}
