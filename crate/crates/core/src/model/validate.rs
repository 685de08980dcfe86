use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{char_len, char_slice, content_hash, normalize_name, StoryModel, UNKNOWN_LOCATION};

/// A broken model invariant: what is affected and which rule it breaks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub subject: String,
    pub rule: String,
}

impl Violation {
    fn new(subject: impl Into<String>, rule: impl Into<String>) -> Self {
        Self {
            subject: subject.into(),
            rule: rule.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.subject, self.rule)
    }
}

/// Checks every model invariant. An empty list means the model is valid.
pub fn validate_model(model: &StoryModel) -> Vec<Violation> {
    let mut out = Vec::new();
    check_entities(model, &mut out);
    check_locations(model, &mut out);
    check_sentences(model, &mut out);
    check_events(model, &mut out);
    check_annotations(model, &mut out);
    out
}

fn check_unique_names<'a>(
    kind: &str,
    items: impl Iterator<Item = (&'a str, &'a str)>,
    out: &mut Vec<Violation>,
) {
    let mut ids = HashSet::new();
    let mut names: HashMap<String, &str> = HashMap::new();
    for (id, name) in items {
        if !ids.insert(id) {
            out.push(Violation::new(format!("{kind} {id}"), "duplicate id"));
        }
        if name.trim().is_empty() {
            out.push(Violation::new(format!("{kind} {id}"), "empty name"));
            continue;
        }
        if let Some(first) = names.insert(normalize_name(name), id) {
            out.push(Violation::new(
                format!("{kind} {id}"),
                format!("name `{name}` duplicates {kind} {first}"),
            ));
        }
    }
}

fn check_entities(model: &StoryModel, out: &mut Vec<Violation>) {
    check_unique_names(
        "entity",
        model.entities.iter().map(|e| (e.id.as_str(), e.name.as_str())),
        out,
    );
    for entity in &model.entities {
        let subject = format!("entity {}", entity.id);
        if entity.emoji.is_empty() {
            out.push(Violation::new(&subject, "empty emoji"));
        }
        for t in &entity.traits {
            if t.name.trim().is_empty() {
                out.push(Violation::new(&subject, "trait with empty name"));
            }
            if !(1..=10).contains(&t.value) {
                out.push(Violation::new(
                    &subject,
                    format!("trait `{}` value {} outside 1..=10", t.name, t.value),
                ));
            }
        }
    }
}

fn check_locations(model: &StoryModel, out: &mut Vec<Violation>) {
    check_unique_names(
        "location",
        model.locations.iter().map(|l| (l.id.as_str(), l.name.as_str())),
        out,
    );
    for location in &model.locations {
        let subject = format!("location {}", location.id);
        if location.emoji.is_empty() {
            out.push(Violation::new(&subject, "empty emoji"));
        }
        if normalize_name(&location.name) == UNKNOWN_LOCATION {
            out.push(Violation::new(&subject, "reserved name `unknown`"));
        }
    }
}

fn check_sentences(model: &StoryModel, out: &mut Vec<Violation>) {
    let len = char_len(&model.text);
    let mut cursor = 0;
    for (position, span) in model.sentences.iter().enumerate() {
        let subject = format!("sentence {}", span.index);
        if span.index != position {
            out.push(Violation::new(&subject, format!("index out of order (position {position})")));
        }
        if span.char_start >= span.char_end {
            out.push(Violation::new(&subject, "empty or inverted span"));
            continue;
        }
        if span.char_end > len {
            out.push(Violation::new(&subject, "span exceeds text"));
            continue;
        }
        if span.char_start < cursor {
            out.push(Violation::new(&subject, "overlaps previous span"));
        } else if !char_slice(&model.text, cursor, span.char_start)
            .chars()
            .all(char::is_whitespace)
        {
            out.push(Violation::new(&subject, "non-whitespace text outside spans"));
        }
        let body = char_slice(&model.text, span.char_start, span.char_end);
        if content_hash(body) != span.text_hash {
            out.push(Violation::new(&subject, "text hash mismatch"));
        }
        cursor = cursor.max(span.char_end);
    }
    if cursor <= len
        && !char_slice(&model.text, cursor, len)
            .chars()
            .all(char::is_whitespace)
    {
        out.push(Violation::new("text", "non-whitespace text outside spans"));
    }
}

fn check_events(model: &StoryModel, out: &mut Vec<Violation>) {
    let mut ids = HashSet::new();
    for event in &model.events {
        let subject = format!("event {}", event.id);
        if !ids.insert(event.id.as_str()) {
            out.push(Violation::new(&subject, "duplicate id"));
        }
        if event.name.trim().is_empty() {
            out.push(Violation::new(&subject, "empty action name"));
        }
        if model.entity(&event.source).is_none() {
            out.push(Violation::new(&subject, "unresolved source"));
        }
        if model.entity(&event.target).is_none() {
            out.push(Violation::new(&subject, "unresolved target"));
        }
        if let Some(location) = &event.location {
            if model.location(location).is_none() {
                out.push(Violation::new(&subject, "unresolved location"));
            }
        }
        if event.sentence_index >= model.sentences.len() {
            out.push(Violation::new(&subject, "unresolved sentence"));
        }
    }

    let mut order: Vec<_> = model.events.iter().collect();
    order.sort_by_key(|e| (e.sentence_index, e.ordinal_in_sentence));
    for (expected, pair) in order.iter().enumerate() {
        if pair.narrated_index != expected {
            out.push(Violation::new(
                format!("event {}", pair.id),
                format!(
                    "narrated index {} breaks (sentence, ordinal) order; expected {expected}",
                    pair.narrated_index
                ),
            ));
        }
    }
    for window in order.windows(2) {
        if (window[0].sentence_index, window[0].ordinal_in_sentence)
            == (window[1].sentence_index, window[1].ordinal_in_sentence)
        {
            out.push(Violation::new(
                format!("event {}", window[1].id),
                "duplicate (sentence, ordinal) position",
            ));
        }
    }
}

fn check_annotations(model: &StoryModel, out: &mut Vec<Violation>) {
    let notes = &model.annotations;
    for actor in &notes.actors {
        for id in actor.entity_ids.iter().filter(|id| model.entity(id).is_none()) {
            out.push(Violation::new(format!("actor {}", actor.id), format!("unresolved entity {id}")));
        }
    }
    for space in &notes.spaces {
        for id in space.location_ids.iter().filter(|id| model.location(id).is_none()) {
            out.push(Violation::new(format!("space {}", space.id), format!("unresolved location {id}")));
        }
    }
    for focal in &notes.focalizations {
        let subject = format!("focalization {}", focal.id);
        if let Some(id) = focal.focalizer.as_deref().filter(|id| model.entity(id).is_none()) {
            out.push(Violation::new(&subject, format!("unresolved focalizer {id}")));
        }
        for id in focal.event_ids.iter().filter(|id| model.event(id).is_none()) {
            out.push(Violation::new(&subject, format!("unresolved event {id}")));
        }
    }
    if let Some(chronology) = &notes.chronology {
        let mut seen = HashSet::new();
        for id in chronology {
            if model.event(id).is_none() {
                out.push(Violation::new("chronology", format!("unresolved event {id}")));
            } else if !seen.insert(id) {
                out.push(Violation::new("chronology", format!("event {id} listed twice")));
            }
        }
    }
}
