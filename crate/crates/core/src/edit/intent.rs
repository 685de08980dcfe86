use std::fmt;

use serde::{Deserialize, Serialize};

use crate::extract::PLACEHOLDER_EMOJI;
use crate::model::{Entity, Location, StoryModel, Trait};

/// A manipulation of a visual construct, to be turned into a text edit.
/// Entity, location and event references accept ids or names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", rename_all_fields = "camelCase")]
pub enum EditIntent {
    ReorderEvents {
        new_order: Vec<String>,
    },
    AddAction {
        source: String,
        target: String,
        name: String,
    },
    ChangeAction {
        event_id: String,
        new_name: String,
    },
    RemoveAction {
        event_id: String,
    },
    AddEntity {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        emoji: Option<String>,
    },
    RemoveEntity {
        entity_id: String,
    },
    AddLocation {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        emoji: Option<String>,
    },
    MoveEntity {
        entity_id: String,
        /// Where the entity is now; inferred from its events when absent.
        /// `unknown` names the unresolved location.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        from_location: Option<String>,
        to_location: String,
    },
    SetTrait {
        entity_id: String,
        trait_name: String,
        new_value: u8,
    },
    RewriteFromVisuals,
}

impl EditIntent {
    pub fn kind(&self) -> &'static str {
        match self {
            EditIntent::ReorderEvents { .. } => "reorder_events",
            EditIntent::AddAction { .. } => "add_action",
            EditIntent::ChangeAction { .. } => "change_action",
            EditIntent::RemoveAction { .. } => "remove_action",
            EditIntent::AddEntity { .. } => "add_entity",
            EditIntent::RemoveEntity { .. } => "remove_entity",
            EditIntent::AddLocation { .. } => "add_location",
            EditIntent::MoveEntity { .. } => "move_entity",
            EditIntent::SetTrait { .. } => "set_trait",
            EditIntent::RewriteFromVisuals => "rewrite_from_visuals",
        }
    }

    /// Intents that change the text through a prompt, as opposed to only
    /// registering something in the model.
    pub fn needs_prompt(&self) -> bool {
        !matches!(self, EditIntent::AddEntity { .. } | EditIntent::AddLocation { .. })
    }
}

impl fmt::Display for EditIntent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EditIntent::ReorderEvents { .. } => f.write_str("reorder events"),
            EditIntent::AddAction { source, target, name } => write!(f, "add action {source} {name} {target}"),
            EditIntent::ChangeAction { event_id, new_name } => write!(f, "change action {event_id} to {new_name}"),
            EditIntent::RemoveAction { event_id } => write!(f, "remove action {event_id}"),
            EditIntent::AddEntity { name, .. } => write!(f, "add entity {name}"),
            EditIntent::RemoveEntity { entity_id } => write!(f, "remove entity {entity_id}"),
            EditIntent::AddLocation { name, .. } => write!(f, "add location {name}"),
            EditIntent::MoveEntity { entity_id, to_location, .. } => {
                write!(f, "move {entity_id} to {to_location}")
            }
            EditIntent::SetTrait { entity_id, trait_name, new_value } => {
                write!(f, "set {entity_id} {trait_name} to {new_value}/10")
            }
            EditIntent::RewriteFromVisuals => f.write_str("rewrite from visuals"),
        }
    }
}

/// A change to the entity and location registry that goes with an edit.
/// Extraction carries the registry forward, so these changes survive the
/// next incremental refresh.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", rename_all_fields = "camelCase")]
pub enum ModelPatch {
    AddEntity { entity: Entity },
    AddLocation { location: Location },
    RemoveEntity { entity_id: String },
    SetTrait { entity_id: String, name: String, value: u8 },
}

impl ModelPatch {
    pub fn apply(&self, model: &mut StoryModel) {
        match self {
            ModelPatch::AddEntity { entity } => {
                if model.entity(&entity.id).is_none() {
                    model.entities.push(entity.clone());
                }
            }
            ModelPatch::AddLocation { location } => {
                if model.location(&location.id).is_none() {
                    model.locations.push(location.clone());
                }
            }
            ModelPatch::RemoveEntity { entity_id } => {
                model.entities.retain(|e| &e.id != entity_id);
                model.events.retain(|e| !e.involves(entity_id));
                for (i, event) in model.events.iter_mut().enumerate() {
                    event.narrated_index = i;
                }
                for actor in &mut model.annotations.actors {
                    actor.entity_ids.retain(|id| id != entity_id);
                }
            }
            ModelPatch::SetTrait { entity_id, name, value } => {
                if let Some(entity) = model.entities.iter_mut().find(|e| &e.id == entity_id) {
                    match entity.traits.iter_mut().find(|t| &t.name == name) {
                        Some(t) => t.value = *value,
                        None => entity.traits.push(Trait { name: name.clone(), value: *value }),
                    }
                }
            }
        }
    }

    pub(crate) fn new_entity(model: &StoryModel, name: &str, emoji: Option<&str>) -> Self {
        ModelPatch::AddEntity {
            entity: Entity {
                id: model.next_entity_id(),
                name: name.trim().to_string(),
                emoji: emoji.unwrap_or(PLACEHOLDER_EMOJI).to_string(),
                traits: Vec::new(),
            },
        }
    }

    pub(crate) fn new_location(model: &StoryModel, name: &str, emoji: Option<&str>) -> Self {
        ModelPatch::AddLocation {
            location: Location {
                id: model.next_location_id(),
                name: name.trim().to_string(),
                emoji: emoji.unwrap_or(PLACEHOLDER_EMOJI).to_string(),
            },
        }
    }
}
