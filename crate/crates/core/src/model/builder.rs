use super::{Annotations, Entity, Location, StoryModel, Trait};
use crate::extract::{assemble, segment_sentences, RawAction};

/// Builds a model by hand: the text is segmented with the extraction rules,
/// then actions are attached to sentences by index, naming entities and
/// locations the same way an extraction response does.
#[derive(Debug, Clone, Default)]
pub struct ModelBuilder {
    text: String,
    entities: Vec<Entity>,
    locations: Vec<Location>,
    actions: Vec<(usize, RawAction)>,
    annotations: Annotations,
}

impl ModelBuilder {
    pub fn new(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            ..Self::default()
        }
    }

    pub fn entity(mut self, name: &str, emoji: &str) -> Self {
        let id = StoryModel::next_id("e", self.entities.iter().map(|e| e.id.as_str()));
        self.entities.push(Entity {
            id,
            name: name.into(),
            emoji: emoji.into(),
            traits: Vec::new(),
        });
        self
    }

    pub fn with_trait(mut self, entity: &str, name: &str, value: u8) -> Self {
        if let Some(e) = self.entities.iter_mut().find(|e| e.name == entity) {
            e.traits.push(Trait {
                name: name.into(),
                value,
            });
        }
        self
    }

    pub fn location(mut self, name: &str, emoji: &str) -> Self {
        let id = StoryModel::next_id("l", self.locations.iter().map(|l| l.id.as_str()));
        self.locations.push(Location {
            id,
            name: name.into(),
            emoji: emoji.into(),
        });
        self
    }

    /// Adds an action to sentence `sentence`; `location` of `None` is unknown.
    pub fn action(mut self, sentence: usize, name: &str, source: &str, target: &str, location: Option<&str>) -> Self {
        self.actions.push((
            sentence,
            RawAction {
                name: name.into(),
                source: source.into(),
                target: target.into(),
                location: location.unwrap_or(super::UNKNOWN_LOCATION).into(),
            },
        ));
        self
    }

    pub fn annotations(mut self, annotations: Annotations) -> Self {
        self.annotations = annotations;
        self
    }

    /// Panics if an action names a sentence the text does not have.
    pub fn build(self) -> StoryModel {
        let sentences = segment_sentences(&self.text);
        let mut per_sentence = vec![Vec::new(); sentences.len()];
        for (index, action) in self.actions {
            assert!(
                index < per_sentence.len(),
                "action `{}` names sentence {index} but the text has {}",
                action.name,
                per_sentence.len()
            );
            per_sentence[index].push(action);
        }
        let (mut model, _) = assemble(&self.text, sentences, &per_sentence, self.entities, self.locations);
        model.annotations = self.annotations;
        model
    }
}
