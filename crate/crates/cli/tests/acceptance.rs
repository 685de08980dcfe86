//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails. Runs fully offline.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, Output};
use std::sync::Arc;
use std::time::{Duration, Instant};

use chrono::DateTime;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use storyloom_core::algebra::{builtin_view, evaluate_str, Builtin};
use storyloom_core::edit::{compile, EditIntent, EditScope};
use storyloom_core::extract::{run_full_extraction, run_incremental_extraction, ExtractionOptions};
use storyloom_core::fixtures::{
    alice_script, annotated_model, numbered_script, numbered_story, sentence_entry, ALICE_EXCERPT, ANNOTATED_STORY,
};
use storyloom_core::gateway::{
    Gateway, GatewayConfig, RecordingTransport, ScriptEntry, ScriptedError, ScriptedTransport,
};
use storyloom_core::model::StoryModel;
use storyloom_core::project::{self, Project};
use storyloom_core::prompt::Purpose;
use storyloom_core::revision::{diff, HistoryTree, Resolution};

type Outcome = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("request-count law", request_count_law),
        ("template golden suite", template_golden_suite),
        ("construct-algebra regression", construct_algebra_regression),
        ("diff round-trip and minimal cost", diff_properties),
        ("history tree model", history_tree_model),
        ("end-to-end offline scenario", end_to_end_offline),
        ("edit atomicity under refusal", edit_atomicity),
    ];
    let mut failed = 0;
    for (name, criterion) in criteria {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(criterion))
            .unwrap_or_else(|panic| Err(panic_message(&panic)));
        let elapsed = started.elapsed().as_secs_f64();
        match outcome {
            Ok(()) => println!("PASS {name} ({elapsed:.2}s)"),
            Err(reason) => {
                failed += 1;
                println!("FAIL {name}: {reason}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}

fn panic_message(panic: &Box<dyn std::any::Any + Send>) -> String {
    panic
        .downcast_ref::<String>()
        .cloned()
        .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_else(|| "panicked".into())
}

fn runtime() -> tokio::runtime::Runtime {
    tokio::runtime::Runtime::new().expect("tokio runtime")
}

fn storyloom(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_storyloom"))
        .args(args)
        .current_dir(dir)
        .env_remove("STORYLOOM_API_KEY")
        .output()
        .expect("run storyloom")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn succeeded(what: &str, output: &Output) -> Outcome {
    ensure!(
        output.status.success(),
        "{what} exited with {}: {}",
        output.status,
        String::from_utf8_lossy(&output.stderr).trim()
    );
    Ok(())
}

fn recording_gateway(entries: Vec<ScriptEntry>) -> (Gateway, Arc<RecordingTransport>) {
    let recorder = Arc::new(RecordingTransport::new(Arc::new(ScriptedTransport::new(entries))));
    let gateway = Gateway::new(recorder.clone(), GatewayConfig::offline()).expect("gateway");
    (gateway, recorder)
}

fn sha256(path: &Path) -> String {
    hex::encode(Sha256::digest(std::fs::read(path).expect("read file")))
}

// ---------------------------------------------------------------------------

fn request_count_law() -> Outcome {
    let story = numbered_story(30);
    let old_sentence = "Bo waves at Cy for the 5th time.";
    let new_sentence = "Bo waves at Ada for the 5th time.";
    ensure!(story.contains(old_sentence), "fixture sentence missing");
    let edited = story.replacen(old_sentence, new_sentence, 1);

    // Record replay fixtures for both runs through the library.
    let mut script = numbered_script(&story);
    script.push(sentence_entry(new_sentence));
    let (gateway, recorder) = recording_gateway(script);
    runtime().block_on(async {
        let options = ExtractionOptions::default();
        let full = run_full_extraction(&story, &gateway, &options).await.expect("full extraction");
        run_incremental_extraction(&full.model, &full.cache, &edited, &gateway, &options)
            .await
            .expect("incremental extraction");
    });
    let dir = tempfile::tempdir().unwrap();
    recorder.save(&dir.path().join("fixtures.json")).unwrap();

    std::fs::write(dir.path().join("story.txt"), &story).unwrap();
    let started = Instant::now();
    let out = storyloom(
        dir.path(),
        &["extract", "--in", "story.txt", "--project", "story.json", "--mock", "fixtures.json"],
    );
    let full_time = started.elapsed();
    succeeded("full extract", &out)?;
    ensure!(stdout(&out).starts_with("requests: 32\n"), "full extraction printed {:?}", stdout(&out));
    for line in ["  entities: 1\n", "  locations: 1\n", "  events: 30\n"] {
        ensure!(stdout(&out).contains(line), "missing `{}` in {:?}", line.trim(), stdout(&out));
    }
    ensure!(full_time < Duration::from_secs(2), "full extraction took {full_time:?}");

    std::fs::write(dir.path().join("story.txt"), &edited).unwrap();
    let started = Instant::now();
    let out = storyloom(
        dir.path(),
        &["extract", "--in", "story.txt", "--project", "story.json", "--mock", "fixtures.json", "--incremental"],
    );
    let incremental_time = started.elapsed();
    succeeded("incremental extract", &out)?;
    ensure!(stdout(&out).starts_with("requests: 1\n"), "incremental extraction printed {:?}", stdout(&out));
    ensure!(incremental_time < Duration::from_secs(2), "incremental extraction took {incremental_time:?}");

    let out = storyloom(
        dir.path(),
        &["extract", "--in", "story.txt", "--project", "story.json", "--mock", "fixtures.json", "--incremental"],
    );
    succeeded("unchanged incremental extract", &out)?;
    ensure!(stdout(&out).starts_with("requests: 0\n"), "unchanged text printed {:?}", stdout(&out));
    Ok(())
}

// ---------------------------------------------------------------------------

const ADD_ACTION: &str = include_str!("../../core/templates/edit_add_action.txt");
const CHANGE_ACTION: &str = include_str!("../../core/templates/edit_change_action.txt");
const REMOVE_ACTION: &str = include_str!("../../core/templates/edit_remove_action.txt");
const REORDER_EVENTS: &str = include_str!("../../core/templates/edit_reorder_events.txt");
const MOVE_ENTITY: &str = include_str!("../../core/templates/edit_move_entity.txt");
const REMOVE_ENTITY: &str = include_str!("../../core/templates/edit_remove_entity.txt");
const SET_TRAIT: &str = include_str!("../../core/templates/edit_set_trait.txt");
const REWRITE_FROM_VISUALS: &str = include_str!("../../core/templates/edit_rewrite_from_visuals.txt");
const SCOPE_STORY: &str = include_str!("../../core/templates/scope_story.txt");
const SCOPE_INSTRUCTION: &str = include_str!("../../core/templates/scope_instruction.txt");

fn fill(template: &str, bindings: &[(&str, &str)]) -> String {
    bindings
        .iter()
        .fold(template.to_string(), |text, (key, value)| text.replace(&format!("<{key}>"), value))
}

/// The stored template with the story placeholder bound to the whole text.
fn whole(template: &str, bindings: &[(&str, &str)]) -> String {
    let mut all = vec![("STORY TEXT", ANNOTATED_STORY)];
    all.extend_from_slice(bindings);
    fill(template, &all)
}

/// The stored template confined to `passage`, which is masked out of the
/// story and appended with the scoping instruction.
fn scoped(template: &str, passage: &str, bindings: &[(&str, &str)]) -> String {
    let start = ANNOTATED_STORY.find(passage).expect("passage in story");
    let masked = format!(
        "{}TEXT_TO_REWRITE{}",
        &ANNOTATED_STORY[..start],
        &ANNOTATED_STORY[start + passage.len()..]
    );
    let rest = template.strip_prefix("<STORY TEXT>\n").expect("story-first template");
    format!(
        "{}\n{}\n{}",
        fill(SCOPE_STORY, &[("MASKED STORY", &masked), ("PASSAGE", passage)]),
        fill(rest, bindings),
        SCOPE_INSTRUCTION
    )
}

fn template_golden_suite() -> Outcome {
    let model = annotated_model();
    let ev = |i: usize| model.events[i].id.clone();
    let range = |sentence: &str, from: usize, to: usize| {
        let start = ANNOTATED_STORY.find(sentence).expect("sentence in story");
        EditScope { char_start: start + from, char_end: start + to }
    };
    let narrated = [
        "Alice reads book",
        "White Rabbit runs past Alice",
        "Alice follows White Rabbit",
        "Alice drops book",
        "Cat grins at Alice",
        "Hatter pours tea for Alice",
        "Hatter argues with Cat",
        "Queen shouts at Hatter",
        "Queen orders White Rabbit",
        "Alice wakes up Alice",
    ];
    let mut swapped = narrated;
    swapped.swap(0, 1);
    let mut new_order: Vec<String> = (0..10).map(ev).collect();
    new_order.swap(0, 1);

    let cases: Vec<(EditIntent, Option<EditScope>, String)> = vec![
        (
            EditIntent::AddAction { source: "Alice".into(), target: "Cat".into(), name: "waves at".into() },
            None,
            whole(
                ADD_ACTION,
                &[("SOURCE ENTITY", "Alice"), ("TARGET ENTITY", "Cat"), ("ACTION NAME", "waves at"), ("ACTION", "waves at")],
            ),
        ),
        (
            EditIntent::ChangeAction { event_id: ev(1), new_name: "dashes past".into() },
            None,
            whole(
                CHANGE_ACTION,
                &[
                    ("SOURCE ENTITY", "White Rabbit"),
                    ("TARGET ENTITY", "Alice"),
                    ("ACTION NAME", "dashes past"),
                    ("ACTION", "dashes past"),
                ],
            ),
        ),
        (
            EditIntent::RemoveAction { event_id: ev(6) },
            None,
            whole(REMOVE_ACTION, &[("SOURCE ENTITY", "Hatter"), ("TARGET ENTITY", "Cat"), ("ACTION NAME", "argues with")]),
        ),
        (
            EditIntent::ReorderEvents { new_order },
            None,
            whole(REORDER_EVENTS, &[("CURRENT ORDER", &narrated.join("\n")), ("NEW ORDER", &swapped.join("\n"))]),
        ),
        (
            EditIntent::MoveEntity { entity_id: "book".into(), from_location: None, to_location: "garden".into() },
            None,
            whole(
                MOVE_ENTITY,
                &[("ENTITY NAME", "book"), ("CURRENT LOCATION", "rabbit hole"), ("NEW LOCATION", "garden")],
            ),
        ),
        (
            EditIntent::MoveEntity {
                entity_id: "Queen".into(),
                from_location: Some("garden".into()),
                to_location: "tea party".into(),
            },
            None,
            whole(
                MOVE_ENTITY,
                &[("ENTITY NAME", "Queen"), ("CURRENT LOCATION", "garden"), ("NEW LOCATION", "tea party")],
            ),
        ),
        (
            EditIntent::RemoveEntity { entity_id: "Cat".into() },
            None,
            whole(REMOVE_ENTITY, &[("ENTITY NAME", "Cat")]),
        ),
        (
            EditIntent::SetTrait { entity_id: "Alice".into(), trait_name: "curious".into(), new_value: 3 },
            None,
            whole(SET_TRAIT, &[("ENTITY", "Alice"), ("VALUE", "3"), ("TRAIT", "curious"), ("OLD VALUE", "8")]),
        ),
        (
            EditIntent::RewriteFromVisuals,
            None,
            fill(
                REWRITE_FROM_VISUALS,
                &[
                    ("ENTITIES", "Alice, White Rabbit, Cat, Queen, Hatter, book"),
                    ("LOCATIONS", "riverbank, rabbit hole, garden, tea party"),
                    (
                        "EVENTS",
                        "Alice reads book at the riverbank\n\
                         White Rabbit runs past Alice at the riverbank\n\
                         Alice follows White Rabbit at the rabbit hole\n\
                         Alice drops book at the rabbit hole\n\
                         Cat grins at Alice at the garden\n\
                         Hatter pours tea for Alice at the tea party\n\
                         Hatter argues with Cat at the tea party\n\
                         Queen shouts at Hatter at the garden\n\
                         Queen orders White Rabbit at the garden\n\
                         Alice wakes up Alice",
                    ),
                ],
            ),
        ),
        (
            EditIntent::AddAction { source: "Hatter".into(), target: "Cat".into(), name: "bows to".into() },
            Some(range("The Hatter argues with the Cat.", 4, 10)),
            scoped(
                ADD_ACTION,
                "The Hatter argues with the Cat.",
                &[("SOURCE ENTITY", "Hatter"), ("TARGET ENTITY", "Cat"), ("ACTION NAME", "bows to"), ("ACTION", "bows to")],
            ),
        ),
        (
            EditIntent::RemoveEntity { entity_id: "Cat".into() },
            Some(range("The Cat grins at Alice in the garden.", 8, 60)),
            scoped(
                REMOVE_ENTITY,
                "The Cat grins at Alice in the garden. The Hatter pours tea for Alice at the tea party.",
                &[("ENTITY NAME", "Cat")],
            ),
        ),
        (
            EditIntent::MoveEntity {
                entity_id: "White Rabbit".into(),
                from_location: None,
                to_location: "tea party".into(),
            },
            Some(range("The White Rabbit runs past Alice.", 0, 3)),
            scoped(
                MOVE_ENTITY,
                "The White Rabbit runs past Alice.",
                &[("ENTITY NAME", "White Rabbit"), ("CURRENT LOCATION", "riverbank"), ("NEW LOCATION", "tea party")],
            ),
        ),
        (
            EditIntent::SetTrait { entity_id: "Alice".into(), trait_name: "curious".into(), new_value: 10 },
            Some(range("Alice wakes up.", 0, 0)),
            scoped(
                SET_TRAIT,
                "Alice wakes up.",
                &[("ENTITY", "Alice"), ("VALUE", "10"), ("TRAIT", "curious"), ("OLD VALUE", "8")],
            ),
        ),
    ];
    ensure!(cases.len() >= 10, "only {} intents", cases.len());
    for (n, (intent, scope, expected)) in cases.iter().enumerate() {
        ensure!(!expected.contains('<'), "case {n}: unbound placeholder in expectation");
        let compiled = compile(intent, scope.as_ref(), ANNOTATED_STORY, &model).map_err(|e| format!("case {n}: {e}"))?;
        let prompt = compiled.prompt.ok_or_else(|| format!("case {n}: no prompt"))?;
        ensure!(prompt.purpose == Purpose::Edit, "case {n}: purpose {}", prompt.purpose);
        ensure!(
            &prompt.text == expected,
            "case {n} ({intent}) differs:\n--- expected\n{expected}\n--- compiled\n{}",
            prompt.text
        );
    }
    Ok(())
}

// ---------------------------------------------------------------------------

struct Shape {
    nodes: usize,
    edges: usize,
    lanes: usize,
    anchors: usize,
}

fn construct_algebra_regression() -> Outcome {
    let model = annotated_model();
    ensure!(model.entities.len() == 6 && model.events.len() == 10, "fixture is not 6 entities / 10 events");

    // Hand-counted from the fixture: 19 (time point, participant) pairs, 9
    // located events, and 13 consecutive shared-character event pairs.
    // Unfolding by time or temporality orders replicas instead of laning
    // them, so those constructs have no lanes.
    let expressions = [
        ("storyline", "time |> unfold(characters) |> connect(events)", Shape { nodes: 19, edges: 10, lanes: 6, anchors: 0 }),
        (
            "story curve",
            "time |> unfold(temporality) |> associate(locations) |> associate(events)",
            Shape { nodes: 10, edges: 0, lanes: 0, anchors: 0 },
        ),
        ("storyprint", "time |> unfold(characters) |> associate(events)", Shape { nodes: 19, edges: 0, lanes: 6, anchors: 0 }),
        (
            "geo-storylines glyph",
            "locations |> position(locations) |> unfold(time) |> associate(characters)",
            Shape { nodes: 9, edges: 0, lanes: 0, anchors: 4 },
        ),
        ("fights", "events |> unfold(time) |> connect(characters)", Shape { nodes: 10, edges: 13, lanes: 0, anchors: 0 }),
    ];
    for (name, source, want) in expressions {
        let view = evaluate_str(source, &model).map_err(|e| format!("{name}: {e}"))?;
        let problems = view.check();
        ensure!(problems.is_empty(), "{name}: {problems:?}");
        let got = (view.nodes.len(), view.edges.len(), view.lanes.len(), view.anchors.len());
        ensure!(view.nodes.iter().all(|n| n.order.is_some()), "{name}: a node has no position in time");
        ensure!(
            got == (want.nodes, want.edges, want.lanes, want.anchors),
            "{name}: (nodes, edges, lanes, anchors) = {got:?}, expected {:?}",
            (want.nodes, want.edges, want.lanes, want.anchors)
        );
    }

    // entities_actions: one edge per event whose endpoints are both present.
    let view = builtin_view(Builtin::EntitiesActions, &model);
    let entity_ids: BTreeSet<&str> = model.entities.iter().map(|e| e.id.as_str()).collect();
    let drawable: BTreeSet<&str> = model
        .events
        .iter()
        .filter(|e| entity_ids.contains(e.source.as_str()) && entity_ids.contains(e.target.as_str()))
        .map(|e| e.id.as_str())
        .collect();
    let drawn: Vec<&str> = view.edges.iter().filter_map(|e| e.event_id.as_deref()).collect();
    ensure!(drawn.len() == 10 && drawable.len() == 10, "entities_actions drew {} edges", drawn.len());
    ensure!(drawn.iter().copied().collect::<BTreeSet<_>>() == drawable, "entities_actions edges differ from events");

    // locations_entities: one replica per distinct location of each entity.
    let view = builtin_view(Builtin::LocationsEntities, &model);
    let mut visits: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for event in &model.events {
        if let Some(location) = &event.location {
            for entity in [&event.source, &event.target] {
                visits.entry(entity.as_str()).or_default().insert(location.as_str());
            }
        }
    }
    let expected: usize = visits.values().map(BTreeSet::len).sum();
    ensure!(expected == 14, "fixture has {expected} entity-location pairs, expected 14");
    ensure!(view.nodes.len() == expected, "locations_entities has {} nodes, expected {expected}", view.nodes.len());

    // timeline: edges follow narrated order.
    let view = builtin_view(Builtin::Timeline, &model);
    let orders: Vec<Option<usize>> = view.edges.iter().map(|e| e.order).collect();
    let narrated: Vec<Option<usize>> = model.narrated_events().iter().map(|e| Some(e.narrated_index)).collect();
    ensure!(orders == narrated, "timeline edge order {orders:?} is not narrated order {narrated:?}");
    for edge in &view.edges {
        let event = edge.event_id.as_deref().and_then(|id| model.event(id));
        ensure!(
            event.map(|e| Some(e.narrated_index)) == Some(edge.order),
            "timeline edge {} carries the wrong order",
            edge.key
        );
    }
    Ok(())
}

// ---------------------------------------------------------------------------

const WORDS: [&str; 6] = ["the", "cat", "sat", "on", "a", "mat"];

fn random_tokens(rng: &mut StdRng, max: usize) -> Vec<String> {
    let len = rng.random_range(0..=max);
    (0..len)
        .map(|i| {
            let word = WORDS[rng.random_range(0..WORDS.len())];
            let gap = if i + 1 == len {
                ""
            } else if rng.random_bool(0.1) {
                "\n"
            } else {
                " "
            };
            format!("{word}{gap}")
        })
        .collect()
}

fn is_subsequence(needle: &[&String], haystack: &[String]) -> bool {
    let mut it = haystack.iter();
    needle.iter().all(|n| it.any(|h| h == *n))
}

/// Longest common subsequence by trying every subsequence of `a`.
fn brute_force_lcs(a: &[String], b: &[String]) -> usize {
    (0u32..1 << a.len())
        .filter(|mask| {
            let picked: Vec<&String> = (0..a.len()).filter(|i| mask & (1 << i) != 0).map(|i| &a[i]).collect();
            is_subsequence(&picked, b)
        })
        .map(u32::count_ones)
        .max()
        .unwrap_or(0) as usize
}

fn diff_properties() -> Outcome {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x5EED);
    for n in 0..1000 {
        let (a, b) = (random_tokens(&mut rng, 12), random_tokens(&mut rng, 12));
        let (old, new) = (a.concat(), b.concat());
        let changes = diff(&old, &new);
        ensure!(changes.resolve(&Resolution::AcceptAll).unwrap() == new, "pair {n}: accept-all != new");
        ensure!(changes.resolve(&Resolution::RejectAll).unwrap() == old, "pair {n}: reject-all != old");
        let expected = a.len() + b.len() - 2 * brute_force_lcs(&a, &b);
        ensure!(
            changes.token_cost() == expected,
            "pair {n}: cost {} != brute force {expected} for {old:?} -> {new:?}",
            changes.token_cost()
        );
    }
    let elapsed = started.elapsed();
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(())
}

// ---------------------------------------------------------------------------

fn history_tree_model() -> Outcome {
    let mut rng = StdRng::seed_from_u64(200);
    let mut tree = HistoryTree::default();
    // Reference: id -> (parent, text).
    let mut reference: BTreeMap<String, (Option<String>, String)> = BTreeMap::new();
    let mut current: Option<String> = None;
    let at = DateTime::UNIX_EPOCH;

    for step in 0..200 {
        if reference.is_empty() || rng.random_bool(0.6) {
            let text = format!("version {step}");
            let id = tree.commit(text.clone(), StoryModel::unextracted(&text), "edit", at).id.clone();
            ensure!(!reference.contains_key(&id), "step {step}: id {id} reused");
            reference.insert(id.clone(), (current.clone(), text));
            current = Some(id);
        } else {
            let ids: Vec<&String> = reference.keys().collect();
            let id = ids[rng.random_range(0..ids.len())].clone();
            let snapshot = tree.checkout(&id).map_err(|e| format!("step {step}: {e}"))?;
            ensure!(snapshot.text == reference[&id].1, "step {step}: checkout of {id} returned other text");
            current = Some(id);
        }
        let problems = tree.check();
        ensure!(problems.is_empty(), "step {step}: {problems:?}");
        ensure!(tree.current_id == current, "step {step}: current is {:?}, expected {current:?}", tree.current_id);
        let now = tree.current().ok_or_else(|| format!("step {step}: no current snapshot"))?;
        ensure!(now.text == reference[now.id.as_str()].1, "step {step}: current text differs");
    }

    ensure!(tree.len() == reference.len(), "tree has {} snapshots, reference {}", tree.len(), reference.len());
    let roots: Vec<&str> = tree.snapshots.iter().filter(|s| s.parent_id.is_none()).map(|s| s.id.as_str()).collect();
    ensure!(roots.len() == 1, "{} roots", roots.len());
    for snapshot in &tree.snapshots {
        let (parent, text) = &reference[&snapshot.id];
        ensure!(&snapshot.parent_id == parent && &snapshot.text == text, "{} differs from the reference", snapshot.id);
        let lineage = tree.lineage(&snapshot.id).map_err(|e| e.to_string())?;
        ensure!(lineage.first() == Some(&roots[0]), "{} is not reachable from the root", snapshot.id);
        ensure!(lineage.len() <= tree.len(), "{} is on a cycle", snapshot.id);
    }
    Ok(())
}

// ---------------------------------------------------------------------------

/// Replays the Alice scenario through the library, recording every reply
/// under its prompt digest.
fn record_alice_fixtures(path: &Path) -> Outcome {
    let (gateway, recorder) = recording_gateway(alice_script());
    runtime().block_on(async {
        let options = ExtractionOptions::default();
        let at = DateTime::UNIX_EPOCH;
        let extraction = run_full_extraction(ALICE_EXCERPT, &gateway, &options).await.map_err(|e| e.to_string())?;
        let mut project = Project::from_extraction("alice", "alice", extraction, at);
        let intent = EditIntent::MoveEntity { entity_id: "book".into(), from_location: None, to_location: "field".into() };
        project.edit(&intent, None, &gateway, at).await.map_err(|e| e.to_string())?;
        project.resolve(&Resolution::AcceptAll, at).map_err(|e| e.to_string())?;
        project.refresh(&gateway, &options, true, at).await.map_err(|e| e.to_string())?;
        Ok::<_, String>(())
    })?;
    recorder.save(path).map_err(|e| e.to_string())
}

fn alice_run(dir: &Path) -> Result<Vec<u8>, String> {
    record_alice_fixtures(&dir.join("fixtures.json"))?;
    std::fs::write(dir.join("alice.txt"), ALICE_EXCERPT).unwrap();
    let intent = json!({ "type": "move_entity", "entityId": "book", "toLocation": "field" });
    std::fs::write(dir.join("move.json"), intent.to_string()).unwrap();

    let out = storyloom(dir, &["extract", "--in", "alice.txt", "--project", "alice.json", "--mock", "fixtures.json"]);
    succeeded("extract", &out)?;
    ensure!(stdout(&out).starts_with("requests: 9\n"), "extract printed {:?}", stdout(&out));

    let out = storyloom(
        dir,
        &["edit", "--project", "alice.json", "--intent", "move.json", "--mock", "fixtures.json", "--accept-all"],
    );
    succeeded("edit", &out)?;
    ensure!(stdout(&out).contains("{+"), "edit printed no insertions: {:?}", stdout(&out));

    let out = storyloom(dir, &["extract", "--incremental", "--project", "alice.json", "--mock", "fixtures.json"]);
    succeeded("incremental extract", &out)?;
    ensure!(stdout(&out).starts_with("requests: 2\n"), "incremental extract printed {:?}", stdout(&out));

    let project = project::load(&dir.join("alice.json")).map_err(|e| e.to_string())?;
    ensure!(project.history.len() == 3, "history has {} snapshots", project.history.len());
    ensure!(!project.is_stale() && !project.model().stale, "model is stale");
    let model = project.model();
    let book = model.resolve_entity("book").ok_or("no book")?;
    let places: Vec<&str> = model
        .events
        .iter()
        .filter(|e| e.involves(&book.id))
        .map(|e| model.location_name(e.location.as_deref()))
        .collect();
    ensure!(places == ["field", "field"], "book events are at {places:?}");
    Ok(std::fs::read(dir.join("alice.json")).unwrap())
}

fn end_to_end_offline() -> Outcome {
    let (first, second) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let a = alice_run(first.path())?;
    let b = alice_run(second.path())?;
    ensure!(a == b, "project files differ between runs");
    Ok(())
}

// ---------------------------------------------------------------------------

fn edit_atomicity() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();
    record_alice_fixtures(&dir.join("fixtures.json"))?;
    std::fs::write(dir.join("alice.txt"), ALICE_EXCERPT).unwrap();
    let out = storyloom(dir, &["extract", "--in", "alice.txt", "--project", "alice.json", "--mock", "fixtures.json"]);
    succeeded("extract", &out)?;

    let refusal = ScriptEntry::error(Some(Purpose::Edit), None, ScriptedError::Refusal { message: "declined".into() });
    let mock = json!({ "script": [refusal] });
    std::fs::write(dir.join("refuse.json"), mock.to_string()).unwrap();

    let project = project::load(&dir.join("alice.json")).map_err(|e| e.to_string())?;
    let events: Vec<String> = project.model().events.iter().map(|e| e.id.clone()).collect();
    let mut reversed = events.clone();
    reversed.reverse();
    let intents: Vec<(Value, Option<&str>)> = vec![
        (json!({ "type": "add_action", "source": "Alice", "target": "sister", "name": "hugs" }), None),
        (json!({ "type": "change_action", "eventId": events[0], "newName": "sits near" }), None),
        (json!({ "type": "remove_action", "eventId": events[1] }), None),
        (json!({ "type": "reorder_events", "newOrder": reversed }), None),
        (json!({ "type": "move_entity", "entityId": "Alice", "toLocation": "rabbit-hole" }), None),
        (json!({ "type": "remove_entity", "entityId": "sister" }), None),
        (json!({ "type": "set_trait", "entityId": "Alice", "traitName": "bored", "newValue": 2 }), None),
        (json!({ "type": "rewrite_from_visuals" }), None),
        (json!({ "type": "remove_entity", "entityId": "White Rabbit" }), Some("480:500")),
    ];
    let before = sha256(&dir.join("alice.json"));
    for (n, (intent, scope)) in intents.iter().enumerate() {
        std::fs::write(dir.join("intent.json"), intent.to_string()).unwrap();
        let mut args = vec!["edit", "--project", "alice.json", "--intent", "intent.json", "--mock", "refuse.json"];
        args.push("--accept-all");
        if let Some(scope) = scope {
            args.extend(["--scope", scope]);
        }
        let out = storyloom(dir, &args);
        ensure!(
            out.status.code() == Some(1),
            "intent {n} ({}) exited with {}: {}",
            intent["type"],
            out.status,
            String::from_utf8_lossy(&out.stderr).trim()
        );
        ensure!(sha256(&dir.join("alice.json")) == before, "intent {n} ({}) changed the project file", intent["type"]);
    }
    Ok(())
}
