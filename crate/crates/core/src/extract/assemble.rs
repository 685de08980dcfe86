use std::collections::HashMap;

use super::payload::{ExtractedEntity, ExtractedLocation, RawAction, PLACEHOLDER_EMOJI};
use crate::model::{
    normalize_name, ActionEvent, Entity, Location, SentenceSpan, StoryModel, UNKNOWN_LOCATION,
};

pub fn entities_from(records: &[ExtractedEntity]) -> Vec<Entity> {
    records
        .iter()
        .enumerate()
        .map(|(i, r)| Entity {
            id: format!("e{}", i + 1),
            name: r.name.clone(),
            emoji: r.emoji.clone(),
            traits: r.traits.clone(),
        })
        .collect()
}

pub fn locations_from(records: &[ExtractedLocation]) -> Vec<Location> {
    records
        .iter()
        .enumerate()
        .map(|(i, r)| Location {
            id: format!("l{}", i + 1),
            name: r.name.clone(),
            emoji: r.emoji.clone(),
        })
        .collect()
}

/// Builds a model from per-sentence actions, in sentence order. Names are
/// resolved case-insensitively; names that resolve to nothing create a new
/// entity or location with a placeholder emoji and a warning.
pub fn assemble(
    text: &str,
    sentences: Vec<SentenceSpan>,
    actions: &[Vec<RawAction>],
    entities: Vec<Entity>,
    locations: Vec<Location>,
) -> (StoryModel, Vec<String>) {
    debug_assert_eq!(sentences.len(), actions.len());
    let mut model = StoryModel {
        text: text.to_string(),
        sentences,
        entities,
        locations,
        ..StoryModel::default()
    };
    let mut warnings = Vec::new();
    let mut occurrences: HashMap<&str, usize> = HashMap::new();
    let mut narrated = 0;

    let hashes: Vec<String> = model.sentences.iter().map(|s| s.text_hash.clone()).collect();
    for (sentence_index, (hash, sentence_actions)) in hashes.iter().zip(actions).enumerate() {
        let occurrence = {
            let n = occurrences.entry(hash.as_str()).or_insert(0);
            *n += 1;
            *n - 1
        };
        for (ordinal, action) in sentence_actions.iter().enumerate() {
            let source = resolve_entity(&mut model, &action.source, sentence_index, &mut warnings);
            let target = resolve_entity(&mut model, &action.target, sentence_index, &mut warnings);
            let location = resolve_location(&mut model, &action.location, sentence_index, &mut warnings);
            model.events.push(ActionEvent {
                id: format!("ev-{}-{occurrence}-{ordinal}", &hash[..8.min(hash.len())]),
                name: action.name.clone(),
                source,
                target,
                location,
                sentence_index,
                ordinal_in_sentence: ordinal,
                narrated_index: narrated,
            });
            narrated += 1;
        }
    }
    (model, warnings)
}

fn resolve_entity(model: &mut StoryModel, name: &str, sentence: usize, warnings: &mut Vec<String>) -> String {
    if let Some(entity) = model.entity_by_name(name) {
        return entity.id.clone();
    }
    let id = model.next_entity_id();
    warnings.push(format!(
        "sentence {sentence}: unknown entity `{}` created as {id}",
        name.trim()
    ));
    model.entities.push(Entity {
        id: id.clone(),
        name: name.trim().to_string(),
        emoji: PLACEHOLDER_EMOJI.into(),
        traits: Vec::new(),
    });
    id
}

fn resolve_location(
    model: &mut StoryModel,
    name: &str,
    sentence: usize,
    warnings: &mut Vec<String>,
) -> Option<String> {
    let key = normalize_name(name);
    if key.is_empty() || key == UNKNOWN_LOCATION {
        return None;
    }
    if let Some(location) = model.location_by_name(name) {
        return Some(location.id.clone());
    }
    let id = model.next_location_id();
    warnings.push(format!(
        "sentence {sentence}: unknown location `{}` created as {id}",
        name.trim()
    ));
    model.locations.push(Location {
        id: id.clone(),
        name: name.trim().to_string(),
        emoji: PLACEHOLDER_EMOJI.into(),
    });
    Some(id)
}
