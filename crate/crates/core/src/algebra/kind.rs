use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Which narrative layer an element belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layer {
    /// What happens, in chronological fact.
    Fabula,
    /// How it is told.
    Syuzhet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    Actor,
    Character,
    Location,
    Space,
    Time,
    Temporality,
    Event,
    Focalization,
}

impl ElementKind {
    pub const ALL: [ElementKind; 8] = [
        ElementKind::Actor,
        ElementKind::Character,
        ElementKind::Location,
        ElementKind::Space,
        ElementKind::Time,
        ElementKind::Temporality,
        ElementKind::Event,
        ElementKind::Focalization,
    ];

    pub fn layer(self) -> Layer {
        match self {
            ElementKind::Actor | ElementKind::Location | ElementKind::Time | ElementKind::Event => {
                Layer::Fabula
            }
            _ => Layer::Syuzhet,
        }
    }

    /// Kinds that exist only through manual annotations.
    pub fn is_annotation_backed(self) -> bool {
        matches!(self, ElementKind::Actor | ElementKind::Space | ElementKind::Focalization)
    }

    /// Kinds whose elements carry a position in a sequence rather than a
    /// category.
    pub fn is_ordinal(self) -> bool {
        matches!(self, ElementKind::Time | ElementKind::Temporality)
    }

    /// Kinds whose elements are single events.
    pub fn is_event_like(self) -> bool {
        matches!(self, ElementKind::Event | ElementKind::Time | ElementKind::Temporality)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ElementKind::Actor => "actor",
            ElementKind::Character => "character",
            ElementKind::Location => "location",
            ElementKind::Space => "space",
            ElementKind::Time => "time",
            ElementKind::Temporality => "temporality",
            ElementKind::Event => "event",
            ElementKind::Focalization => "focalization",
        }
    }

    /// The spelling used when printing expressions.
    pub fn dsl_name(self) -> &'static str {
        match self {
            ElementKind::Actor => "actors",
            ElementKind::Character => "characters",
            ElementKind::Location => "locations",
            ElementKind::Space => "spaces",
            ElementKind::Time => "time",
            ElementKind::Temporality => "temporality",
            ElementKind::Event => "events",
            ElementKind::Focalization => "focalizations",
        }
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown story element `{0}`")]
pub struct UnknownKind(pub String);

impl FromStr for ElementKind {
    type Err = UnknownKind;

    /// Accepts singular and plural spellings, any case. `entity` is taken
    /// as a synonym for character.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "actor" | "actors" => ElementKind::Actor,
            "character" | "characters" | "entity" | "entities" => ElementKind::Character,
            "location" | "locations" => ElementKind::Location,
            "space" | "spaces" => ElementKind::Space,
            "time" | "times" => ElementKind::Time,
            "temporality" | "temporalities" => ElementKind::Temporality,
            "event" | "events" => ElementKind::Event,
            "focalization" | "focalizations" => ElementKind::Focalization,
            _ => return Err(UnknownKind(s.to_string())),
        })
    }
}
