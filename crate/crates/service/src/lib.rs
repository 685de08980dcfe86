//! The workspace service: projects, views, edits and history over HTTP,
//! with extraction and edit jobs reporting progress as server-sent events.
//!
//! Each project has a single writer. A mutation that arrives while another
//! one is running is refused with `409 Conflict`.

mod error;
mod jobs;
mod routes;
mod state;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

pub use error::{ApiError, ErrorBody};
pub use jobs::{Job, JobEvent, JobKind, JobSnapshot, JobStatus, Progress};
pub use routes::router;
pub use state::{AppState, Clock};

pub const DATA_DIR_ENV: &str = "STORYLOOM_DATA_DIR";

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub listen: SocketAddr,
    pub data_dir: PathBuf,
}

/// Serves until the process is stopped.
pub async fn serve(config: ServiceConfig, state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(config.listen).await?;
    tracing::info!(address = %listener.local_addr()?, data_dir = %config.data_dir.display(), "serving");
    axum::serve(listener, router(Arc::new(state))).await
}
