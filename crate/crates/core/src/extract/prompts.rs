use crate::prompt::template::{EXTRACT_ENTITIES, EXTRACT_EVENTS, EXTRACT_LOCATIONS};
use crate::prompt::{PromptSpec, Purpose};

pub fn build_entities_prompt(text: &str) -> PromptSpec {
    let body = EXTRACT_ENTITIES
        .render(&[("STORY TEXT", text)])
        .expect("entities template binds STORY TEXT");
    PromptSpec::new(Purpose::Entities, body)
}

pub fn build_locations_prompt(text: &str) -> PromptSpec {
    let body = EXTRACT_LOCATIONS
        .render(&[("STORY TEXT", text)])
        .expect("locations template binds STORY TEXT");
    PromptSpec::new(Purpose::Locations, body)
}

/// Event prompt for one sentence. Returns `None` for an empty sentence.
pub fn build_events_prompt<S: AsRef<str>>(
    text_before: &str,
    sentence: &str,
    entity_names: &[S],
    location_names: &[S],
) -> Option<PromptSpec> {
    if sentence.trim().is_empty() {
        return None;
    }
    let join = |names: &[S]| names.iter().map(AsRef::as_ref).collect::<Vec<_>>().join(", ");
    let (entities, locations) = (join(entity_names), join(location_names));
    let body = EXTRACT_EVENTS
        .render(&[
            ("TEXT BEFORE", text_before),
            ("SENTENCE", sentence),
            ("ENTITIES", &entities),
            ("LOCATIONS", &locations),
        ])
        .expect("events template binds all placeholders");
    Some(PromptSpec::new(Purpose::Events, body))
}
