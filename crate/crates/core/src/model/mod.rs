//! The story model: entities, locations, sentence spans and action events
//! extracted from a narrative, plus the join queries the rest of the engine
//! is built on.

mod builder;
mod query;
mod text;
mod validate;

use serde::{Deserialize, Serialize};

pub use builder::ModelBuilder;
pub use query::{
    events_for_entity, events_for_span, locations_for_entity, sentence_for_event, LocationVisit,
};
pub use text::{char_len, char_slice, content_hash, normalize_name};
pub use validate::{validate_model, Violation};

/// Reserved location name for events whose place cannot be inferred.
pub const UNKNOWN_LOCATION: &str = "unknown";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trait {
    pub name: String,
    pub value: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub id: String,
    pub name: String,
    pub emoji: String,
    #[serde(default)]
    pub traits: Vec<Trait>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Location {
    pub id: String,
    pub name: String,
    pub emoji: String,
}

/// A sentence as a half-open range of Unicode scalar offsets into the text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SentenceSpan {
    pub index: usize,
    pub char_start: usize,
    pub char_end: usize,
    pub text_hash: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ActionEvent {
    pub id: String,
    pub name: String,
    pub source: String,
    pub target: String,
    /// `None` is the unresolved location.
    pub location: Option<String>,
    pub sentence_index: usize,
    pub ordinal_in_sentence: usize,
    pub narrated_index: usize,
}

impl ActionEvent {
    pub fn involves(&self, entity_id: &str) -> bool {
        self.source == entity_id || self.target == entity_id
    }
}

/// An abstract narrative role (hero, villain) played by characters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ActorRole {
    pub id: String,
    pub name: String,
    pub entity_ids: Vec<String>,
}

/// A narrated setting (home, eerie) grouping concrete locations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SpaceSetting {
    pub id: String,
    pub name: String,
    pub location_ids: Vec<String>,
}

/// A point of view through which a set of events is narrated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Focalization {
    pub id: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub focalizer: Option<String>,
    pub event_ids: Vec<String>,
}

/// Manual annotations that extraction never produces.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Annotations {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub actors: Vec<ActorRole>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub spaces: Vec<SpaceSetting>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub focalizations: Vec<Focalization>,
    /// Event ids in chronological order, when it differs from narration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chronology: Option<Vec<String>>,
}

impl Annotations {
    pub fn is_empty(&self) -> bool {
        self.actors.is_empty()
            && self.spaces.is_empty()
            && self.focalizations.is_empty()
            && self.chronology.is_none()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoryModel {
    pub text: String,
    pub sentences: Vec<SentenceSpan>,
    pub entities: Vec<Entity>,
    pub locations: Vec<Location>,
    pub events: Vec<ActionEvent>,
    pub stale: bool,
    #[serde(default, skip_serializing_if = "Annotations::is_empty")]
    pub annotations: Annotations,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown entity `{0}`")]
    UnknownEntity(String),
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
    #[error("range {start}..{end} is outside the text (length {len})")]
    Range { start: usize, end: usize, len: usize },
}

impl StoryModel {
    /// A model with no extracted content for `text`; stale unless `text` is empty.
    pub fn unextracted(text: &str) -> Self {
        Self {
            stale: !text.trim().is_empty(),
            ..Self::default()
        }
    }

    pub fn entity(&self, id: &str) -> Option<&Entity> {
        self.entities.iter().find(|e| e.id == id)
    }

    pub fn location(&self, id: &str) -> Option<&Location> {
        self.locations.iter().find(|l| l.id == id)
    }

    pub fn event(&self, id: &str) -> Option<&ActionEvent> {
        self.events.iter().find(|e| e.id == id)
    }

    pub fn entity_by_name(&self, name: &str) -> Option<&Entity> {
        let key = normalize_name(name);
        self.entities.iter().find(|e| normalize_name(&e.name) == key)
    }

    pub fn location_by_name(&self, name: &str) -> Option<&Location> {
        let key = normalize_name(name);
        self.locations.iter().find(|l| normalize_name(&l.name) == key)
    }

    /// Resolves an entity reference given either as an id or as a name.
    pub fn resolve_entity(&self, reference: &str) -> Option<&Entity> {
        self.entity(reference).or_else(|| self.entity_by_name(reference))
    }

    pub fn resolve_location(&self, reference: &str) -> Option<&Location> {
        self.location(reference)
            .or_else(|| self.location_by_name(reference))
    }

    pub fn entity_name<'a>(&'a self, id: &'a str) -> &'a str {
        self.entity(id).map(|e| e.name.as_str()).unwrap_or(id)
    }

    pub fn location_name<'a>(&'a self, id: Option<&'a str>) -> &'a str {
        match id {
            Some(id) => self.location(id).map(|l| l.name.as_str()).unwrap_or(id),
            None => UNKNOWN_LOCATION,
        }
    }

    /// The events sorted by narrated order.
    pub fn narrated_events(&self) -> Vec<&ActionEvent> {
        let mut events: Vec<&ActionEvent> = self.events.iter().collect();
        events.sort_by_key(|e| e.narrated_index);
        events
    }

    /// The events in chronological order: the annotated chronology when one
    /// is present, narrated order otherwise. Events missing from the
    /// annotation keep their narrated order after the annotated ones.
    pub fn chronological_events(&self) -> Vec<&ActionEvent> {
        let narrated = self.narrated_events();
        let Some(chronology) = &self.annotations.chronology else {
            return narrated;
        };
        let mut ordered: Vec<&ActionEvent> =
            chronology.iter().filter_map(|id| self.event(id)).collect();
        for event in narrated {
            if !chronology.contains(&event.id) {
                ordered.push(event);
            }
        }
        ordered
    }

    /// Text of sentence `index`, if it exists.
    pub fn sentence_text(&self, index: usize) -> Option<&str> {
        self.sentences
            .get(index)
            .map(|s| char_slice(&self.text, s.char_start, s.char_end))
    }

    /// Mints the next free id of the form `{prefix}{n}`.
    pub fn next_id<'a>(prefix: &str, taken: impl Iterator<Item = &'a str>) -> String {
        let max = taken
            .filter_map(|id| id.strip_prefix(prefix)?.parse::<usize>().ok())
            .max()
            .unwrap_or(0);
        format!("{prefix}{}", max + 1)
    }

    pub fn next_entity_id(&self) -> String {
        Self::next_id("e", self.entities.iter().map(|e| e.id.as_str()))
    }

    pub fn next_location_id(&self) -> String {
        Self::next_id("l", self.locations.iter().map(|l| l.id.as_str()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn next_id_skips_foreign_ids() {
        let ids = ["e1", "e7", "x3", "e"];
        assert_eq!(StoryModel::next_id("e", ids.into_iter()), "e8");
        assert_eq!(StoryModel::next_id("l", [].into_iter()), "l1");
    }

    #[test]
    fn unknown_location_serializes_as_null() {
        let event = ActionEvent {
            id: "ev".into(),
            name: "walks".into(),
            source: "e1".into(),
            target: "e1".into(),
            location: None,
            sentence_index: 0,
            ordinal_in_sentence: 0,
            narrated_index: 0,
        };
        let json = serde_json::to_value(&event).unwrap();
        assert!(json["location"].is_null());
        assert_eq!(json["narratedIndex"], 0);
    }

    #[test]
    fn annotations_are_omitted_when_empty() {
        let json = serde_json::to_value(StoryModel::default()).unwrap();
        let keys: Vec<_> = json.as_object().unwrap().keys().cloned().collect();
        assert_eq!(
            keys,
            ["entities", "events", "locations", "sentences", "stale", "text"]
        );
    }
}
