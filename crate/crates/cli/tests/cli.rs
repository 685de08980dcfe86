use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

use storyloom_core::fixtures::{numbered_script, numbered_story};
use storyloom_core::gateway::{ScriptEntry, ScriptedError};
use storyloom_core::prompt::Purpose;

fn storyloom(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_storyloom"))
        .args(args)
        .current_dir(dir)
        .env_remove("STORYLOOM_API_KEY")
        .env_remove("STORYLOOM_API_KEY_ENV")
        .output()
        .expect("run storyloom")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn event_ids(dir: &Path) -> Vec<String> {
    let project = storyloom_core::project::load(&dir.join("p.json")).unwrap();
    project.model().events.iter().map(|e| e.id.clone()).collect()
}

fn write_script(dir: &Path, name: &str, entries: Vec<ScriptEntry>) {
    std::fs::write(dir.join(name), json!({ "script": entries }).to_string()).unwrap();
}

/// A three-sentence project extracted from scripted replies.
fn extracted(dir: &Path, extra: Vec<ScriptEntry>) {
    let story = numbered_story(3);
    std::fs::write(dir.join("story.txt"), &story).unwrap();
    let mut script = numbered_script(&story);
    script.extend(extra);
    write_script(dir, "mock.json", script);
    let out = storyloom(dir, &["extract", "--in", "story.txt", "--project", "p.json", "--mock", "mock.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).starts_with("requests: 5\n"));
}

#[test]
fn empty_story_gives_an_empty_project() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("empty.txt"), "").unwrap();
    write_script(dir.path(), "mock.json", numbered_script(""));
    let out = storyloom(dir.path(), &["extract", "--in", "empty.txt", "--project", "e.json", "--mock", "mock.json"]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("requests: 2\n"));

    let out = storyloom(dir.path(), &["view", "--project", "e.json", "--builtin", "timeline"]);
    assert!(out.status.success());
    let view: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(view["nodes"], json!([]));
    assert_eq!(view["edges"], json!([]));
}

#[test]
fn views_from_builtins_and_expressions() {
    let dir = tempfile::tempdir().unwrap();
    extracted(dir.path(), Vec::new());
    let out = storyloom(
        dir.path(),
        &["view", "--project", "p.json", "--builtin", "entities_actions", "--out", "view.json"],
    );
    assert!(out.status.success());
    let view: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("view.json")).unwrap()).unwrap();
    assert_eq!(view["nodes"].as_array().unwrap().len(), 3);
    assert_eq!(view["edges"].as_array().unwrap().len(), 3);

    let out = storyloom(dir.path(), &["view", "--project", "p.json", "--expr", "characters |> position(events)"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("position only accepts"));

    let out = storyloom(dir.path(), &["view", "--project", "p.json", "--builtin", "sunburst"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn conflicting_flags_are_rejected_before_any_work() {
    let dir = tempfile::tempdir().unwrap();
    let out = storyloom(
        dir.path(),
        &["view", "--project", "missing.json", "--expr", "characters", "--builtin", "timeline"],
    );
    assert_eq!(out.status.code(), Some(2));
    let out = storyloom(dir.path(), &["extract", "--project", "p.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("p.json").exists());
}

#[test]
fn missing_input_and_missing_credentials() {
    let dir = tempfile::tempdir().unwrap();
    let out = storyloom(dir.path(), &["extract", "--in", "nope.txt", "--project", "p.json", "--mock", "m.json"]);
    assert_eq!(out.status.code(), Some(2));

    std::fs::write(dir.path().join("story.txt"), "Ada waves.").unwrap();
    let out = storyloom(dir.path(), &["extract", "--in", "story.txt", "--project", "p.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("STORYLOOM_API_KEY"));
}

#[test]
fn identity_rewrite_reports_no_changes() {
    let dir = tempfile::tempdir().unwrap();
    let story = numbered_story(3);
    extracted(dir.path(), vec![ScriptEntry::payload(Some(Purpose::Edit), None, json!({ "text": story }))]);
    std::fs::write(dir.path().join("i.json"), r#"{"type":"remove_entity","entityId":"Cy"}"#).unwrap();
    let before = std::fs::read(dir.path().join("p.json")).unwrap();
    let out = storyloom(dir.path(), &["edit", "--project", "p.json", "--intent", "i.json", "--mock", "mock.json"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "no changes\n");
    assert_eq!(std::fs::read(dir.path().join("p.json")).unwrap(), before);
}

#[test]
fn pending_changes_then_diff_and_history() {
    let dir = tempfile::tempdir().unwrap();
    let story = numbered_story(3);
    let rewritten = story.replace("Cy waves at Ada for the 3rd time.", "Cy nods.");
    extracted(dir.path(), vec![ScriptEntry::payload(Some(Purpose::Edit), None, json!({ "text": rewritten }))]);
    let third = event_ids(dir.path())[2].clone();
    let intent = json!({ "type": "remove_action", "eventId": third });
    std::fs::write(dir.path().join("i.json"), intent.to_string()).unwrap();

    let out = storyloom(dir.path(), &["edit", "--project", "p.json", "--intent", "i.json", "--mock", "mock.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let marked = stdout(&out);
    assert!(marked.contains("[-waves at Ada for the 3rd time.-]{+nods.+}"), "{marked}");

    // Without --accept-all the change waits in the project.
    let out = storyloom(dir.path(), &["diff", "--project", "p.json"]);
    assert_eq!(stdout(&out), marked);
    let out = storyloom(dir.path(), &["history", "--project", "p.json"]);
    let expected = format!("* s1 extract (1970-01-01T00:00:00+00:00)\npending: 2 change(s) from \"remove action {third}\"\n");
    assert_eq!(stdout(&out), expected);

    std::fs::write(dir.path().join("a.txt"), "one two three").unwrap();
    std::fs::write(dir.path().join("b.txt"), "one 2 three").unwrap();
    let out = storyloom(dir.path(), &["diff", "--old", "a.txt", "--new", "b.txt"]);
    assert_eq!(stdout(&out), "one [-two -]{+2 +}three\n");
}

#[test]
fn reorder_with_a_non_permutation_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    extracted(dir.path(), Vec::new());
    let ids = event_ids(dir.path());
    let intent = json!({ "type": "reorder_events", "newOrder": [ids[1], ids[0], ids[0]] });
    std::fs::write(dir.path().join("i.json"), intent.to_string()).unwrap();
    let before = std::fs::read(dir.path().join("p.json")).unwrap();
    let out = storyloom(dir.path(), &["edit", "--project", "p.json", "--intent", "i.json", "--mock", "mock.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(std::fs::read(dir.path().join("p.json")).unwrap(), before);
}

#[test]
fn registry_edits_commit_and_checkout_moves_back() {
    let dir = tempfile::tempdir().unwrap();
    extracted(dir.path(), Vec::new());
    std::fs::write(dir.path().join("i.json"), r#"{"type":"add_location","name":"garden"}"#).unwrap();
    let out = storyloom(dir.path(), &["edit", "--project", "p.json", "--intent", "i.json", "--mock", "mock.json"]);
    assert!(out.status.success());
    let out = storyloom(dir.path(), &["history", "--project", "p.json", "--checkout", "s1"]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("* s1 extract"), "{}", stdout(&out));
    assert!(stdout(&out).contains("\n    s2 add location garden"), "{}", stdout(&out));
    let out = storyloom(dir.path(), &["history", "--project", "p.json", "--checkout", "s9"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gateway_failure_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("story.txt"), "Ada waves at Bo for the 1st time.").unwrap();
    write_script(
        dir.path(),
        "mock.json",
        vec![ScriptEntry::error(None, None, ScriptedError::Refusal { message: "no".into() })],
    );
    let out = storyloom(dir.path(), &["extract", "--in", "story.txt", "--project", "p.json", "--mock", "mock.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.path().join("p.json").exists());
}
