use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::{DateTime, Utc};

use storyloom_core::algebra::{builtin_view, evaluate_str, group_parallel_edges, Builtin, UnknownBuiltin};
use storyloom_core::edit::{EditIntent, EditScope};
use storyloom_core::extract::{run_full_extraction, ExtractionOptions};
use storyloom_core::gateway::{Gateway, GatewayConfig, HttpTransport, ReplayTransport};
use storyloom_core::project::{self, Project, ProjectError, ProjectSettings};
use storyloom_core::revision::{diff, HistoryTree, Resolution};
use storyloom_service::{AppState, ServiceConfig};

use crate::Command;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// The input is at fault: unreadable files, bad JSON, invalid intents
    /// or expressions.
    #[error("{0}")]
    Input(String),
    /// The environment is at fault: provider failures, missing
    /// configuration, unwritable files.
    #[error("{0}")]
    Environment(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Environment(_) => 1,
        }
    }
}

impl From<ProjectError> for CliError {
    fn from(err: ProjectError) -> Self {
        if err.is_user_error() {
            CliError::Input(err.to_string())
        } else {
            CliError::Environment(err.to_string())
        }
    }
}

fn input(err: impl std::fmt::Display) -> CliError {
    CliError::Input(err.to_string())
}

fn environment(err: impl std::fmt::Display) -> CliError {
    CliError::Environment(err.to_string())
}

/// Parses `start:end` character offsets.
pub fn parse_scope(raw: &str) -> Result<EditScope, String> {
    let (start, end) = raw.split_once(':').ok_or_else(|| format!("expected start:end, got `{raw}`"))?;
    let parse = |s: &str| s.trim().parse::<usize>().map_err(|_| format!("`{s}` is not a character offset"));
    Ok(EditScope { char_start: parse(start)?, char_end: parse(end)? })
}

/// Mock runs use a fixed clock so their project files are reproducible.
fn now(mock: bool) -> DateTime<Utc> {
    if mock {
        DateTime::UNIX_EPOCH
    } else {
        Utc::now()
    }
}

fn gateway(mock: Option<&Path>) -> Result<Gateway, CliError> {
    match mock {
        Some(path) => {
            let transport = ReplayTransport::load_mock(path).map_err(input)?;
            Gateway::new(transport, GatewayConfig::offline()).map_err(environment)
        }
        None => {
            let config = GatewayConfig::from_env().map_err(environment)?;
            let transport = HttpTransport::from_env(&config).map_err(environment)?;
            Gateway::new(Arc::new(transport), config).map_err(environment)
        }
    }
}

fn settings(gateway: &Gateway) -> ProjectSettings {
    if gateway.is_offline() {
        return ProjectSettings::default();
    }
    let config = gateway.config();
    ProjectSettings {
        base_url: Some(config.base_url.clone()),
        model_name: Some(config.model_name.clone()),
        api_key_ref: Some(config.api_key_env.clone()),
    }
}

/// Project ids come from the file name, so the same command always
/// produces the same file.
fn project_id(path: &Path) -> String {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let id: String = stem
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '-' })
        .take(64)
        .collect();
    if id.is_empty() {
        "story".into()
    } else {
        id
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_project(path: &Path) -> Result<Project, CliError> {
    project::load(path).map_err(input)
}

fn save_project(project: &Project, path: &Path) -> Result<(), CliError> {
    project::save(project, path).map_err(environment)
}

fn write_output(out: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, contents).map_err(|e| environment(format!("{}: {e}", path.display()))),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

pub async fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Extract { input, project, mock, incremental } => {
            extract(input.as_deref(), &project, mock.as_deref(), incremental).await
        }
        Command::View { project, expr, builtin, grouped, out } => {
            view(&project, expr.as_deref(), builtin.as_deref(), grouped, out.as_deref())
        }
        Command::Edit { project, intent, scope, mock, accept_all } => {
            edit(&project, &intent, scope, mock.as_deref(), accept_all).await
        }
        Command::Diff { project, from, to, old, new } => match (project, old, new) {
            (Some(project), _, _) => diff_project(&project, from.as_deref(), to.as_deref()),
            (None, Some(old), Some(new)) => {
                print_changes(&diff(&read_text(&old)?, &read_text(&new)?));
                Ok(())
            }
            _ => Err(CliError::Input("give --project, or --old and --new".into())),
        },
        Command::History { project, checkout } => history(&project, checkout.as_deref()),
        Command::Serve { listen, data_dir, mock } => serve(listen, data_dir, mock.as_deref()).await,
    }
}

async fn extract(input: Option<&Path>, path: &Path, mock: Option<&Path>, incremental: bool) -> Result<(), CliError> {
    let text = input.map(read_text).transpose()?;
    let gateway = gateway(mock)?;
    let now = now(mock.is_some());
    let options = ExtractionOptions::default();

    let (project, report) = if incremental && (path.exists() || input.is_none()) {
        let mut project = load_project(path)?;
        if let Some(text) = &text {
            project.set_text(text, now);
        }
        let refresh = project.refresh(&gateway, &options, true, now).await?;
        if refresh.full {
            eprintln!("note: the last edit reordered events, so everything was re-extracted");
        }
        (project, refresh.extraction)
    } else {
        if incremental {
            eprintln!("note: {} does not exist yet; extracting everything", path.display());
        }
        let (Some(input), Some(text)) = (input, &text) else {
            return Err(CliError::Input("--in is required to create a project".into()));
        };
        let extraction = run_full_extraction(text, &gateway, &options).await.map_err(environment)?;
        let report = extraction.report.clone();
        let name = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let mut project = Project::from_extraction(project_id(path), name, extraction, now);
        project.settings = settings(&gateway);
        (project, report)
    };
    save_project(&project, path)?;

    println!("requests: {}", report.requests);
    let mut by_purpose = gateway.stats().by_purpose;
    by_purpose.sort_by_key(|(purpose, _)| purpose.as_str());
    for (purpose, count) in by_purpose {
        println!("  {purpose}: {count}");
    }
    println!(
        "sentences: {} extracted, {} reused",
        report.extracted_sentences.len(),
        report.reused_sentences.len()
    );
    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    Ok(())
}

fn view(
    path: &Path,
    expr: Option<&str>,
    builtin: Option<&str>,
    grouped: bool,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let project = load_project(path)?;
    let view = match (expr, builtin) {
        (Some(expr), _) => evaluate_str(expr, project.model()).map_err(input)?,
        (None, Some(name)) => {
            let builtin: Builtin = name.parse().map_err(|e: UnknownBuiltin| input(e))?;
            builtin_view(builtin, project.model())
        }
        (None, None) => return Err(CliError::Input("give --expr or --builtin".into())),
    };
    if project.is_stale() {
        eprintln!("note: the model is stale; run `storyloom extract --incremental` to refresh it");
    }
    let view = if grouped { group_parallel_edges(&view) } else { view };
    let json = serde_json::to_string_pretty(&view).map_err(environment)?;
    write_output(out, &format!("{json}\n"))
}

async fn edit(
    path: &Path,
    intent_path: &Path,
    scope: Option<EditScope>,
    mock: Option<&Path>,
    accept_all: bool,
) -> Result<(), CliError> {
    let mut project = load_project(path)?;
    let raw = read_text(intent_path)?;
    let intent: EditIntent =
        serde_json::from_str(&raw).map_err(|e| CliError::Input(format!("{}: {e}", intent_path.display())))?;
    let gateway = gateway(mock)?;
    let now = now(mock.is_some());

    let outcome = project.edit(&intent, scope.as_ref(), &gateway, now).await?;
    print_changes(&outcome.change_set);
    if intent.needs_prompt() {
        if outcome.change_set.is_unchanged() {
            project.pending = None;
        } else if accept_all {
            project.resolve(&Resolution::AcceptAll, now)?;
            eprintln!("accepted as snapshot {}", project.current().id);
        } else {
            eprintln!("changes are pending review in {}", path.display());
        }
    } else {
        eprintln!("committed as snapshot {}", project.current().id);
    }
    if project.is_stale() {
        eprintln!("note: the model is stale; run `storyloom extract --incremental` to refresh it");
    }
    save_project(&project, path)
}

fn print_changes(changes: &storyloom_core::revision::ChangeSet) {
    if changes.is_unchanged() {
        println!("no changes");
    } else {
        println!("{}", changes.render_marked());
    }
}

fn diff_project(path: &Path, from: Option<&str>, to: Option<&str>) -> Result<(), CliError> {
    let project = load_project(path)?;
    if let (None, None, Some(pending)) = (from, to, &project.pending) {
        print_changes(&pending.outcome.change_set);
        return Ok(());
    }
    let history = &project.history;
    let snapshot = |id: &str| history.get(id).ok_or_else(|| CliError::Input(format!("no snapshot `{id}`")));
    let to = match to {
        Some(id) => snapshot(id)?,
        None => project.current(),
    };
    let old = match (from, &to.parent_id) {
        (Some(id), _) => snapshot(id)?.text.as_str(),
        (None, Some(parent)) => snapshot(parent)?.text.as_str(),
        (None, None) => "",
    };
    print_changes(&diff(old, &to.text));
    Ok(())
}

fn depth(history: &HistoryTree, id: &str) -> usize {
    history.lineage(id).map(|l| l.len().saturating_sub(1)).unwrap_or(0)
}

fn history(path: &Path, checkout: Option<&str>) -> Result<(), CliError> {
    let mut project = load_project(path)?;
    if let Some(id) = checkout {
        project.checkout(id)?;
        save_project(&project, path)?;
    }
    let current = project.current().id.clone();
    for snapshot in &project.history.snapshots {
        let marker = if snapshot.id == current { '*' } else { ' ' };
        let indent = "  ".repeat(depth(&project.history, &snapshot.id));
        let stale = if snapshot.model.stale { " [stale]" } else { "" };
        println!(
            "{marker} {indent}{} {} ({}){stale}",
            snapshot.id,
            snapshot.label,
            snapshot.created_at.to_rfc3339()
        );
    }
    if let Some(pending) = &project.pending {
        println!("pending: {} change(s) from \"{}\"", pending.outcome.change_set.change_count(), pending.intent);
    }
    Ok(())
}

async fn serve(listen: std::net::SocketAddr, data_dir: PathBuf, mock: Option<&Path>) -> Result<(), CliError> {
    let gateway = Arc::new(gateway(mock)?);
    let fixed = mock.is_some();
    let state = AppState::new(data_dir.clone(), gateway, Arc::new(move || now(fixed)));
    storyloom_service::serve(ServiceConfig { listen, data_dir }, state).await.map_err(environment)
}
