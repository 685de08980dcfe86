//! `storyloom`: extract story models, evaluate construct expressions, apply
//! edit intents, inspect diffs and history, and serve the workspace.
//!
//! Exit codes: 0 on success, 1 when the environment or the language model
//! gateway fails, 2 when the input is at fault.

mod commands;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "storyloom", version, about = "Visual story-writing from the command line")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract the story model from a text file into a project file.
    Extract {
        /// The story text. An incremental run without it refreshes the
        /// project's own current text.
        #[arg(long = "in", value_name = "STORY", required_unless_present = "incremental")]
        input: Option<PathBuf>,
        #[arg(long, value_name = "PROJECT")]
        project: PathBuf,
        /// Replay fixture or script instead of calling a provider.
        #[arg(long, value_name = "FIXTURES")]
        mock: Option<PathBuf>,
        /// Update an existing project, re-extracting changed sentences only.
        #[arg(long)]
        incremental: bool,
    },
    /// Evaluate a construct expression or a built-in view.
    #[command(group(ArgGroup::new("construct").required(true).args(["expr", "builtin"])))]
    View {
        #[arg(long)]
        project: PathBuf,
        /// Construct expression, e.g. `characters |> position(locations)`.
        #[arg(long)]
        expr: Option<String>,
        /// entities_actions, locations_entities or timeline.
        #[arg(long)]
        builtin: Option<String>,
        /// Merge parallel edges into one edge per endpoint pair.
        #[arg(long)]
        grouped: bool,
        /// Write the view here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply an edit intent (a JSON file) and show the tracked changes.
    Edit {
        #[arg(long)]
        project: PathBuf,
        #[arg(long, value_name = "INTENT")]
        intent: PathBuf,
        /// Character range `start:end` the edit is confined to.
        #[arg(long, value_parser = commands::parse_scope)]
        scope: Option<storyloom_core::edit::EditScope>,
        #[arg(long, value_name = "FIXTURES")]
        mock: Option<PathBuf>,
        /// Accept every change and commit, instead of leaving them pending.
        #[arg(long)]
        accept_all: bool,
    },
    /// Show word-level changes: pending ones, between two snapshots, or
    /// between two text files.
    #[command(group(ArgGroup::new("source").required(true).args(["project", "old"])))]
    Diff {
        #[arg(long, conflicts_with_all = ["old", "new"])]
        project: Option<PathBuf>,
        /// Snapshot to compare from; the current one's parent by default.
        #[arg(long, requires = "project")]
        from: Option<String>,
        /// Snapshot to compare to; the current one by default.
        #[arg(long, requires = "project")]
        to: Option<String>,
        #[arg(long, requires = "new")]
        old: Option<PathBuf>,
        #[arg(long, requires = "old")]
        new: Option<PathBuf>,
    },
    /// List the snapshot tree, or move to another snapshot.
    History {
        #[arg(long)]
        project: PathBuf,
        #[arg(long, value_name = "SNAPSHOT")]
        checkout: Option<String>,
    },
    /// Run the workspace service.
    Serve {
        #[arg(long, default_value = "127.0.0.1:7878")]
        listen: SocketAddr,
        #[arg(long, env = storyloom_service::DATA_DIR_ENV, default_value = "storyloom-data")]
        data_dir: PathBuf,
        #[arg(long, value_name = "FIXTURES")]
        mock: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(runtime) => runtime,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match runtime.block_on(commands::run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
