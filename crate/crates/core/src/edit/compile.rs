use std::collections::HashSet;

use super::intent::{EditIntent, ModelPatch};
use super::scope::{EditScope, SnappedScope};
use crate::model::{char_len, char_slice, normalize_name, ActionEvent, Entity, StoryModel, UNKNOWN_LOCATION};
use crate::prompt::template::{
    EDIT_ADD_ACTION, EDIT_CHANGE_ACTION, EDIT_MOVE_ENTITY, EDIT_REMOVE_ACTION, EDIT_REMOVE_ENTITY,
    EDIT_REORDER_EVENTS, EDIT_REWRITE_FROM_VISUALS, EDIT_SET_TRAIT, SCOPE_INSTRUCTION, SCOPE_STORY,
};
use crate::prompt::{PromptSpec, Purpose, Template};

/// The literal the selected passage is replaced with in a scoped prompt.
pub const TEXT_TO_REWRITE: &str = "TEXT_TO_REWRITE";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CompileError {
    #[error("no entity `{0}`")]
    UnknownEntity(String),
    #[error("no event `{0}`")]
    UnknownEvent(String),
    #[error("no location `{0}`")]
    UnknownLocation(String),
    #[error("entity `{entity}` has no trait `{name}`")]
    UnknownTrait { entity: String, name: String },
    #[error("trait values run from 1 to 10, got {0}")]
    TraitValue(u8),
    #[error("{0} name is empty")]
    EmptyName(&'static str),
    #[error("`{0}` is already taken")]
    NameTaken(String),
    #[error("`{0}` is already at `{1}`")]
    SameLocation(String, String),
    #[error("new order is not a permutation of the events (missing {missing:?}, unexpected {unexpected:?})")]
    NotAPermutation { missing: Vec<String>, unexpected: Vec<String> },
    #[error("range {start}..{end} is outside the text (length {len})")]
    Range { start: usize, end: usize, len: usize },
    #[error("range {start}..{end} selects no sentence")]
    EmptyScope { start: usize, end: usize },
    #[error("rewriting from the visuals always rewrites the whole story and cannot be scoped")]
    ScopedRewrite,
}

/// What an intent compiles to: at most one prompt, the scope its answer
/// is spliced into, and the registry change that goes with it.
#[derive(Debug, Clone, PartialEq)]
pub struct Compiled {
    pub prompt: Option<PromptSpec>,
    pub scope: Option<SnappedScope>,
    pub patch: Option<ModelPatch>,
}

fn render(template: &Template, bindings: &[(&str, &str)]) -> PromptSpec {
    let text = template
        .render(bindings)
        .unwrap_or_else(|e| panic!("{} bindings are fixed: {e}", template.name));
    PromptSpec::new(Purpose::Edit, text)
}

fn entity<'m>(model: &'m StoryModel, reference: &str) -> Result<&'m Entity, CompileError> {
    model
        .resolve_entity(reference)
        .ok_or_else(|| CompileError::UnknownEntity(reference.to_string()))
}

fn event<'m>(model: &'m StoryModel, id: &str) -> Result<&'m ActionEvent, CompileError> {
    model.event(id).ok_or_else(|| CompileError::UnknownEvent(id.to_string()))
}

fn event_line(model: &StoryModel, event: &ActionEvent) -> String {
    format!(
        "{} {} {}",
        model.entity_name(&event.source),
        event.name,
        model.entity_name(&event.target)
    )
}

/// One "<source> <action> <target>" line per event, in the given order,
/// which must name every event exactly once.
pub fn serialize_event_order(model: &StoryModel, order: &[String]) -> Result<String, CompileError> {
    let known: HashSet<&str> = model.events.iter().map(|e| e.id.as_str()).collect();
    let mut seen = HashSet::new();
    let mut unexpected = Vec::new();
    for id in order {
        if !known.contains(id.as_str()) || !seen.insert(id.as_str()) {
            unexpected.push(id.clone());
        }
    }
    let missing: Vec<String> = model
        .narrated_events()
        .iter()
        .filter(|e| !seen.contains(e.id.as_str()))
        .map(|e| e.id.clone())
        .collect();
    if !missing.is_empty() || !unexpected.is_empty() {
        return Err(CompileError::NotAPermutation { missing, unexpected });
    }
    Ok(order
        .iter()
        .map(|id| event_line(model, model.event(id).expect("checked above")))
        .collect::<Vec<_>>()
        .join("\n"))
}

fn narrated_order(model: &StoryModel) -> String {
    model
        .narrated_events()
        .iter()
        .map(|e| event_line(model, e))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Where the entity currently is: the last known location among its
/// events, restricted to the scope when there is one.
fn current_location<'m>(model: &'m StoryModel, entity_id: &str, scope: Option<&SnappedScope>) -> &'m str {
    let in_scope = |e: &&ActionEvent| match scope {
        None => true,
        Some(s) => {
            let span = &model.sentences[e.sentence_index];
            span.char_start < s.char_end && s.char_start < span.char_end
        }
    };
    model
        .narrated_events()
        .into_iter()
        .filter(|e| e.involves(entity_id))
        .filter(in_scope)
        .filter_map(|e| e.location.as_deref())
        .last()
        .map(|id| model.location_name(Some(id)))
        .unwrap_or(UNKNOWN_LOCATION)
}

/// Compiles an intent against the current `text` and its model. The scope,
/// when given, is snapped to sentences of `text`.
pub fn compile(
    intent: &EditIntent,
    scope: Option<&EditScope>,
    text: &str,
    model: &StoryModel,
) -> Result<Compiled, CompileError> {
    let snapped = match scope {
        Some(_) if matches!(intent, EditIntent::RewriteFromVisuals) => return Err(CompileError::ScopedRewrite),
        Some(scope) => scope.snap(text)?,
        None => None,
    };
    let mut patch = None;
    let prompt = match intent {
        EditIntent::ReorderEvents { new_order } => {
            let new = serialize_event_order(model, new_order)?;
            let current = narrated_order(model);
            Some(render(
                &EDIT_REORDER_EVENTS,
                &[("STORY TEXT", text), ("CURRENT ORDER", &current), ("NEW ORDER", &new)],
            ))
        }
        EditIntent::AddAction { source, target, name } => {
            let (source, target) = (entity(model, source)?, entity(model, target)?);
            let name = name.trim();
            if name.is_empty() {
                return Err(CompileError::EmptyName("action"));
            }
            Some(render(
                &EDIT_ADD_ACTION,
                &[
                    ("STORY TEXT", text),
                    ("SOURCE ENTITY", &source.name),
                    ("TARGET ENTITY", &target.name),
                    ("ACTION NAME", name),
                    ("ACTION", name),
                ],
            ))
        }
        EditIntent::ChangeAction { event_id, new_name } => {
            let event = event(model, event_id)?;
            let name = new_name.trim();
            if name.is_empty() {
                return Err(CompileError::EmptyName("action"));
            }
            Some(render(
                &EDIT_CHANGE_ACTION,
                &[
                    ("STORY TEXT", text),
                    ("SOURCE ENTITY", model.entity_name(&event.source)),
                    ("TARGET ENTITY", model.entity_name(&event.target)),
                    ("ACTION NAME", name),
                    ("ACTION", name),
                ],
            ))
        }
        EditIntent::RemoveAction { event_id } => {
            let event = event(model, event_id)?;
            Some(render(
                &EDIT_REMOVE_ACTION,
                &[
                    ("STORY TEXT", text),
                    ("SOURCE ENTITY", model.entity_name(&event.source)),
                    ("TARGET ENTITY", model.entity_name(&event.target)),
                    ("ACTION NAME", &event.name),
                ],
            ))
        }
        EditIntent::AddEntity { name, emoji } => {
            if name.trim().is_empty() {
                return Err(CompileError::EmptyName("entity"));
            }
            if model.entity_by_name(name).is_some() {
                return Err(CompileError::NameTaken(name.trim().to_string()));
            }
            patch = Some(ModelPatch::new_entity(model, name, emoji.as_deref()));
            None
        }
        EditIntent::AddLocation { name, emoji } => {
            let key = normalize_name(name);
            if key.is_empty() {
                return Err(CompileError::EmptyName("location"));
            }
            if key == UNKNOWN_LOCATION || model.location_by_name(name).is_some() {
                return Err(CompileError::NameTaken(name.trim().to_string()));
            }
            patch = Some(ModelPatch::new_location(model, name, emoji.as_deref()));
            None
        }
        EditIntent::RemoveEntity { entity_id } => {
            let entity = entity(model, entity_id)?;
            patch = Some(ModelPatch::RemoveEntity { entity_id: entity.id.clone() });
            Some(render(&EDIT_REMOVE_ENTITY, &[("STORY TEXT", text), ("ENTITY NAME", &entity.name)]))
        }
        EditIntent::MoveEntity { entity_id, from_location, to_location } => {
            let entity = entity(model, entity_id)?;
            let to = model
                .resolve_location(to_location)
                .ok_or_else(|| CompileError::UnknownLocation(to_location.clone()))?;
            let from = match from_location.as_deref() {
                Some(r) if normalize_name(r) == UNKNOWN_LOCATION => UNKNOWN_LOCATION,
                Some(r) => &model
                    .resolve_location(r)
                    .ok_or_else(|| CompileError::UnknownLocation(r.to_string()))?
                    .name,
                None => current_location(model, &entity.id, snapped.as_ref()),
            };
            if normalize_name(from) == normalize_name(&to.name) {
                return Err(CompileError::SameLocation(entity.name.clone(), to.name.clone()));
            }
            Some(render(
                &EDIT_MOVE_ENTITY,
                &[
                    ("STORY TEXT", text),
                    ("ENTITY NAME", &entity.name),
                    ("CURRENT LOCATION", from),
                    ("NEW LOCATION", &to.name),
                ],
            ))
        }
        EditIntent::SetTrait { entity_id, trait_name, new_value } => {
            let entity = entity(model, entity_id)?;
            if !(1..=10).contains(new_value) {
                return Err(CompileError::TraitValue(*new_value));
            }
            let key = normalize_name(trait_name);
            let current = entity
                .traits
                .iter()
                .find(|t| normalize_name(&t.name) == key)
                .ok_or_else(|| CompileError::UnknownTrait {
                    entity: entity.name.clone(),
                    name: trait_name.clone(),
                })?;
            patch = Some(ModelPatch::SetTrait {
                entity_id: entity.id.clone(),
                name: current.name.clone(),
                value: *new_value,
            });
            Some(render(
                &EDIT_SET_TRAIT,
                &[
                    ("STORY TEXT", text),
                    ("ENTITY", &entity.name),
                    ("VALUE", &new_value.to_string()),
                    ("TRAIT", &current.name),
                    ("OLD VALUE", &current.value.to_string()),
                ],
            ))
        }
        EditIntent::RewriteFromVisuals => {
            let join = |names: Vec<&str>| names.join(", ");
            let entities = join(model.entities.iter().map(|e| e.name.as_str()).collect());
            let locations = join(model.locations.iter().map(|l| l.name.as_str()).collect());
            let events = model
                .narrated_events()
                .iter()
                .map(|e| match &e.location {
                    Some(l) => format!("{} at the {}", event_line(model, e), model.location_name(Some(l))),
                    None => event_line(model, e),
                })
                .collect::<Vec<_>>()
                .join("\n");
            Some(render(
                &EDIT_REWRITE_FROM_VISUALS,
                &[("ENTITIES", &entities), ("LOCATIONS", &locations), ("EVENTS", &events)],
            ))
        }
    };

    let prompt = match (prompt, &snapped) {
        (Some(prompt), Some(scope)) => Some(scope_prompt(&prompt, scope, text)),
        (prompt, _) => prompt,
    };
    Ok(Compiled { prompt, scope: snapped, patch })
}

/// Restricts an edit prompt to the scoped passage: the story text at the
/// head of the prompt is masked and followed by the passage's definition,
/// and the instruction is amended to rewrite only the passage.
pub fn scope_prompt(prompt: &PromptSpec, scope: &SnappedScope, text: &str) -> PromptSpec {
    let rest = prompt
        .text
        .strip_prefix(text)
        .expect("edit prompts start with the story text");
    let masked = format!(
        "{}{TEXT_TO_REWRITE}{}",
        char_slice(text, 0, scope.char_start),
        char_slice(text, scope.char_end, char_len(text))
    );
    let story = SCOPE_STORY
        .render(&[("MASKED STORY", &masked), ("PASSAGE", scope.passage(text))])
        .expect("scope template binds both placeholders");
    PromptSpec::new(prompt.purpose, format!("{story}{rest}\n{}", SCOPE_INSTRUCTION.body))
}
