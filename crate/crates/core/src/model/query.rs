use serde::{Deserialize, Serialize};

use super::{char_len, ActionEvent, ModelError, SentenceSpan, StoryModel};

/// One distinct place an entity acts at, with the first event placing it there.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LocationVisit {
    /// `None` is the unresolved location.
    pub location: Option<String>,
    pub first_narrated_index: usize,
}

/// Events where the entity is source or target, in narrated order.
pub fn events_for_entity<'m>(
    model: &'m StoryModel,
    entity_id: &str,
) -> Result<Vec<&'m ActionEvent>, ModelError> {
    if model.entity(entity_id).is_none() {
        return Err(ModelError::UnknownEntity(entity_id.to_string()));
    }
    Ok(model
        .narrated_events()
        .into_iter()
        .filter(|e| e.involves(entity_id))
        .collect())
}

/// Distinct locations of the entity's events, in order of first appearance.
pub fn locations_for_entity(
    model: &StoryModel,
    entity_id: &str,
) -> Result<Vec<LocationVisit>, ModelError> {
    let mut visits: Vec<LocationVisit> = Vec::new();
    for event in events_for_entity(model, entity_id)? {
        if visits.iter().all(|v| v.location != event.location) {
            visits.push(LocationVisit {
                location: event.location.clone(),
                first_narrated_index: event.narrated_index,
            });
        }
    }
    Ok(visits)
}

/// Events whose owning sentence overlaps `[char_start, char_end)`. A
/// zero-length range selects the sentence containing the caret.
pub fn events_for_span(
    model: &StoryModel,
    char_start: usize,
    char_end: usize,
) -> Result<Vec<&ActionEvent>, ModelError> {
    let len = char_len(&model.text);
    if char_start > char_end || char_end > len {
        return Err(ModelError::Range {
            start: char_start,
            end: char_end,
            len,
        });
    }
    let hit = |s: &SentenceSpan| {
        if char_start == char_end {
            s.char_start <= char_start && char_start < s.char_end
        } else {
            s.char_start < char_end && char_start < s.char_end
        }
    };
    let sentences: Vec<usize> = model
        .sentences
        .iter()
        .filter(|s| hit(s))
        .map(|s| s.index)
        .collect();
    Ok(model
        .narrated_events()
        .into_iter()
        .filter(|e| sentences.contains(&e.sentence_index))
        .collect())
}

pub fn sentence_for_event<'m>(
    model: &'m StoryModel,
    event_id: &str,
) -> Result<&'m SentenceSpan, ModelError> {
    let event = model
        .event(event_id)
        .ok_or_else(|| ModelError::UnknownEvent(event_id.to_string()))?;
    model
        .sentences
        .get(event.sentence_index)
        .ok_or_else(|| ModelError::UnknownEvent(event_id.to_string()))
}
