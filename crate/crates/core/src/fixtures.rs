//! Shared story fixtures for tests and offline demos.

use serde_json::json;

use crate::extract::segment_sentences;
use crate::gateway::ScriptEntry;
use crate::model::{char_slice, ActorRole, Annotations, Focalization, ModelBuilder, SpaceSetting, StoryModel};
use crate::prompt::Purpose;

/// The opening of *Alice's Adventures in Wonderland*.
pub const ALICE_EXCERPT: &str = "Alice was beginning to get very tired of sitting by her sister on the bank, and of having nothing to do. Once or twice she had peeped into the book her sister was reading, but it had no pictures or conversations in it. \"And what is the use of a book,\" thought Alice, \"without pictures or conversations?\" So she was considering in her own mind whether the pleasure of making a daisy-chain would be worth the trouble of getting up and picking the daisies. Suddenly a White Rabbit with pink eyes ran close by her. Alice started to her feet and ran across the field after it. She was just in time to see it pop down a large rabbit-hole under the hedge.";

/// A ten-sentence story with one action per sentence: six entities, four
/// locations, and actor, space and focalization annotations.
pub const ANNOTATED_STORY: &str = "Alice reads the book on the riverbank. The White Rabbit runs past Alice. Alice follows the White Rabbit into the rabbit hole. Alice drops the book. The Cat grins at Alice in the garden. The Hatter pours tea for Alice at the tea party. The Hatter argues with the Cat. The Queen shouts at the Hatter in the garden. The Queen orders the White Rabbit to fetch the tea. Alice wakes up.";

pub fn annotated_model() -> StoryModel {
    let mut model = ModelBuilder::new(ANNOTATED_STORY)
        .entity("Alice", "👧")
        .entity("White Rabbit", "🐇")
        .entity("Cat", "🐱")
        .entity("Queen", "👑")
        .entity("Hatter", "🎩")
        .entity("book", "📕")
        .with_trait("Alice", "curious", 8)
        .location("riverbank", "🏞️")
        .location("rabbit hole", "🕳️")
        .location("garden", "🌹")
        .location("tea party", "🫖")
        .action(0, "reads", "Alice", "book", Some("riverbank"))
        .action(1, "runs past", "White Rabbit", "Alice", Some("riverbank"))
        .action(2, "follows", "Alice", "White Rabbit", Some("rabbit hole"))
        .action(3, "drops", "Alice", "book", Some("rabbit hole"))
        .action(4, "grins at", "Cat", "Alice", Some("garden"))
        .action(5, "pours tea for", "Hatter", "Alice", Some("tea party"))
        .action(6, "argues with", "Hatter", "Cat", Some("tea party"))
        .action(7, "shouts at", "Queen", "Hatter", Some("garden"))
        .action(8, "orders", "Queen", "White Rabbit", Some("garden"))
        .action(9, "wakes up", "Alice", "Alice", None)
        .build();
    let event = |i: usize| model.events[i].id.clone();
    model.annotations = Annotations {
        actors: vec![
            actor("a1", "hero", &["e1"]),
            actor("a2", "herald", &["e2"]),
            actor("a3", "trickster", &["e3", "e5"]),
            actor("a4", "villain", &["e4"]),
        ],
        spaces: vec![
            SpaceSetting { id: "sp1".into(), name: "home".into(), location_ids: vec!["l1".into()] },
            SpaceSetting {
                id: "sp2".into(),
                name: "wonderland".into(),
                location_ids: vec!["l2".into(), "l3".into(), "l4".into()],
            },
        ],
        focalizations: vec![
            Focalization {
                id: "f1".into(),
                name: "Alice's view".into(),
                focalizer: Some("e1".into()),
                event_ids: [0, 1, 2, 3, 4, 5, 9].into_iter().map(event).collect(),
            },
            Focalization {
                id: "f2".into(),
                name: "the court".into(),
                focalizer: None,
                event_ids: [6, 7, 8].into_iter().map(event).collect(),
            },
        ],
        chronology: None,
    };
    model
}

fn actor(id: &str, name: &str, entities: &[&str]) -> ActorRole {
    ActorRole {
        id: id.into(),
        name: name.into(),
        entity_ids: entities.iter().map(|e| e.to_string()).collect(),
    }
}

/// [`ALICE_EXCERPT`] after the book has been moved to the field.
pub const ALICE_BOOK_IN_FIELD: &str = "Alice was beginning to get very tired of sitting by her sister on the bank, and of having nothing to do. Once or twice she had peeped into the book her sister was reading out in the field, but it had no pictures or conversations in it. \"And what is the use of a book in a field,\" thought Alice, \"without pictures or conversations?\" So she was considering in her own mind whether the pleasure of making a daisy-chain would be worth the trouble of getting up and picking the daisies. Suddenly a White Rabbit with pink eyes ran close by her. Alice started to her feet and ran across the field after it. She was just in time to see it pop down a large rabbit-hole under the hedge.";

fn alice_events(sentence: &str, actions: &[(&str, &str, &str, &str)]) -> ScriptEntry {
    let actions: Vec<_> = actions
        .iter()
        .map(|(source, name, target, location)| {
            json!({ "name": name, "source": source, "target": target, "location": location })
        })
        .collect();
    ScriptEntry::payload(Some(Purpose::Events), Some(&format!("TEXT: {sentence}\n")), json!({ "actions": actions }))
}

/// Provider replies for the Alice scenario: extracting [`ALICE_EXCERPT`],
/// moving the book from the bank to the field (which yields
/// [`ALICE_BOOK_IN_FIELD`]), and re-extracting the two rewritten sentences.
pub fn alice_script() -> Vec<ScriptEntry> {
    let sentences = |text: &str| -> Vec<String> {
        segment_sentences(text).iter().map(|s| char_slice(text, s.char_start, s.char_end).to_string()).collect()
    };
    let before = sentences(ALICE_EXCERPT);
    let after = sentences(ALICE_BOOK_IN_FIELD);
    assert_eq!((before.len(), after.len()), (7, 7), "the excerpt has seven sentences");

    let entries = vec![
        ScriptEntry::payload(
            Some(Purpose::Entities),
            None,
            json!({ "entities": [
                { "name": "Alice", "emoji": "👧", "properties": [{ "name": "bored", "value": 7 }] },
                { "name": "sister", "emoji": "👩", "properties": [] },
                { "name": "book", "emoji": "📖", "properties": [] },
                { "name": "White Rabbit", "emoji": "🐇", "properties": [{ "name": "hurried", "value": 9 }] },
            ] }),
        ),
        ScriptEntry::payload(
            Some(Purpose::Locations),
            None,
            json!({ "locations": [
                { "name": "bank", "emoji": "🏞️" },
                { "name": "field", "emoji": "🌾" },
                { "name": "rabbit-hole", "emoji": "🕳️" },
            ] }),
        ),
        alice_events(&before[0], &[("Alice", "sits by", "sister", "bank")]),
        alice_events(&before[1], &[("Alice", "peeps into", "book", "bank")]),
        alice_events(&before[2], &[("Alice", "ponders", "book", "bank")]),
        alice_events(&before[3], &[]),
        alice_events(&before[4], &[("White Rabbit", "runs by", "Alice", "bank")]),
        alice_events(&before[5], &[("Alice", "chases", "White Rabbit", "field")]),
        alice_events(&before[6], &[("White Rabbit", "pops down", "White Rabbit", "rabbit-hole")]),
        ScriptEntry::payload(Some(Purpose::Edit), Some("never goes to the bank"), json!({ "text": ALICE_BOOK_IN_FIELD })),
        alice_events(&after[1], &[("Alice", "peeps into", "book", "field")]),
        alice_events(&after[2], &[("Alice", "ponders", "book", "field")]),
    ];
    debug_assert_eq!(before[3..], after[3..]);
    entries
}

/// `n` short sentences naming a small cast in turn.
pub fn numbered_story(n: usize) -> String {
    const CAST: [&str; 3] = ["Ada", "Bo", "Cy"];
    (0..n)
        .map(|i| format!("{} waves at {} for the {} time.", CAST[i % 3], CAST[(i + 1) % 3], ordinal(i + 1)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn ordinal(n: usize) -> String {
    let suffix = match (n % 10, n % 100) {
        (_, 11..=13) => "th",
        (1, _) => "st",
        (2, _) => "nd",
        (3, _) => "rd",
        _ => "th",
    };
    format!("{n}{suffix}")
}

/// Script entries answering a full extraction of `story` as built by
/// [`numbered_story`]: the cast as entities, one hall, and one "waves at"
/// action per sentence of the form "A waves at B …".
pub fn numbered_script(story: &str) -> Vec<ScriptEntry> {
    let mut entries = vec![
        ScriptEntry::payload(
            Some(Purpose::Entities),
            None,
            json!({ "entities": (["Ada", "Bo", "Cy"].map(|n| json!({ "name": n, "emoji": "🙂", "properties": [] }))) }),
        ),
        ScriptEntry::payload(Some(Purpose::Locations), None, json!({ "locations": [{ "name": "hall", "emoji": "🏛️" }] })),
    ];
    entries.extend(segment_sentences(story).iter().map(|s| sentence_entry(char_slice(story, s.char_start, s.char_end))));
    entries
}

/// The script entry for one sentence of a numbered story.
pub fn sentence_entry(sentence: &str) -> ScriptEntry {
    let words: Vec<&str> = sentence.split_whitespace().collect();
    let actions = match words.as_slice() {
        [source, "waves", "at", target, ..] => {
            vec![json!({ "name": "waves at", "source": source, "target": target, "location": "hall" })]
        }
        _ => Vec::new(),
    };
    ScriptEntry::payload(Some(Purpose::Events), Some(&format!("TEXT: {sentence}\n")), json!({ "actions": actions }))
}
