use std::convert::Infallible;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::Stream;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use storyloom_core::algebra::{builtin_view, evaluate_str, group_parallel_edges, Builtin, ViewModel};
use storyloom_core::edit::{EditIntent, EditScope};
use storyloom_core::extract::{ExtractionOptions, SentenceProgress};
use storyloom_core::model::{events_for_span, sentence_for_event, StoryModel};
use storyloom_core::project::{PendingChange, Project};
use storyloom_core::revision::Resolution;

use crate::error::ApiError;
use crate::jobs::{Job, JobKind, JobSnapshot};
use crate::state::{AppState, Slot};

type AppResult<T> = Result<T, ApiError>;
type Shared = State<Arc<AppState>>;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/projects", post(create_project))
        .route("/projects/{id}", get(get_project).put(put_project))
        .route("/projects/{id}/model", get(get_model))
        .route("/projects/{id}/view", post(post_view))
        .route("/projects/{id}/view/{builtin}", get(get_builtin_view))
        .route("/projects/{id}/text", axum::routing::put(put_text))
        .route("/projects/{id}/refresh", post(refresh_full))
        .route("/projects/{id}/refresh-incremental", post(refresh_incremental))
        .route("/projects/{id}/edits", post(post_edit))
        .route("/projects/{id}/changes/resolve", post(resolve_changes))
        .route("/projects/{id}/rewrite-from-visuals", post(rewrite_from_visuals))
        .route("/projects/{id}/history", get(get_history))
        .route("/projects/{id}/history/checkout", post(checkout))
        .route("/projects/{id}/mapping", get(mapping))
        .route("/projects/{id}/jobs/{job_id}", get(get_job))
        .route("/projects/{id}/jobs/{job_id}/events", get(job_events))
        .with_state(state)
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ProjectSummary<'a> {
    pub id: &'a str,
    pub name: &'a str,
    pub text: &'a str,
    pub stale: bool,
    pub current_id: &'a str,
    pub snapshots: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pending: Option<&'a PendingChange>,
    pub full_refresh_due: bool,
}

fn summary(project: &Project) -> Value {
    serde_json::to_value(ProjectSummary {
        id: &project.id,
        name: &project.name,
        text: project.text(),
        stale: project.is_stale(),
        current_id: &project.current().id,
        snapshots: project.history.len(),
        pending: project.pending.as_ref(),
        full_refresh_due: project.full_refresh_due,
    })
    .expect("summaries serialize")
}

/// Applies a synchronous mutation to a copy, persists it, then swaps it in,
/// so readers see either the old or the new state.
async fn mutate<T>(
    state: &AppState,
    slot: &Arc<Slot>,
    what: &str,
    f: impl FnOnce(&mut Project) -> AppResult<T>,
) -> AppResult<(T, Value)> {
    let _token = slot.claim(what)?;
    let mut project = slot.project.read().await.clone();
    let out = f(&mut project)?;
    state.persist(&project)?;
    let view = summary(&project);
    *slot.project.write().await = project;
    Ok((out, view))
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct CreateProject {
    #[serde(default)]
    id: Option<String>,
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    text: String,
}

async fn create_project(State(state): Shared, Json(body): Json<CreateProject>) -> AppResult<impl IntoResponse> {
    let id = match body.id {
        Some(id) if !AppState::is_valid_id(&id) => return Err(ApiError::invalid(format!("`{id}` is not a valid project id"))),
        Some(id) if state.slot(&id).is_ok() => return Err(ApiError::conflict(format!("project `{id}` exists"))),
        Some(id) => id,
        None => state.new_id(),
    };
    let name = body.name.unwrap_or_else(|| "untitled".to_string());
    let project = Project::new(id, name, &body.text, state.now());
    let view = summary(&project);
    state.insert(project)?;
    Ok((StatusCode::CREATED, Json(view)))
}

async fn get_project(State(state): Shared, Path(id): Path<String>) -> AppResult<Json<Project>> {
    let slot = state.slot(&id)?;
    let project = slot.project.read().await.clone();
    Ok(Json(project))
}

async fn put_project(State(state): Shared, Path(id): Path<String>, Json(body): Json<Project>) -> AppResult<Json<Value>> {
    if body.id != id {
        return Err(ApiError::invalid(format!("body is project `{}`, not `{id}`", body.id)));
    }
    let problems = body.check();
    if !problems.is_empty() {
        return Err(ApiError::invalid(problems.join("; ")));
    }
    let slot = state.slot(&id)?;
    let ((), view) = mutate(&state, &slot, "save", |p| {
        *p = body;
        Ok(())
    })
    .await?;
    Ok(Json(view))
}

async fn get_model(State(state): Shared, Path(id): Path<String>) -> AppResult<Json<StoryModel>> {
    let slot = state.slot(&id)?;
    let project = slot.project.read().await;
    Ok(Json(project.model().clone()))
}

#[derive(Debug, Default, Deserialize)]
struct ViewQuery {
    #[serde(default)]
    grouped: bool,
}

fn finish_view(view: ViewModel, grouped: bool) -> Json<ViewModel> {
    Json(if grouped { group_parallel_edges(&view) } else { view })
}

async fn get_builtin_view(
    State(state): Shared,
    Path((id, builtin)): Path<(String, String)>,
    Query(query): Query<ViewQuery>,
) -> AppResult<Json<ViewModel>> {
    let builtin: Builtin = builtin.parse().map_err(|e: storyloom_core::algebra::UnknownBuiltin| ApiError::not_found(e.to_string()))?;
    let slot = state.slot(&id)?;
    let project = slot.project.read().await;
    Ok(finish_view(builtin_view(builtin, project.model()), query.grouped))
}

#[derive(Debug, Deserialize)]
struct ViewRequest {
    expr: String,
    #[serde(default)]
    grouped: bool,
}

async fn post_view(State(state): Shared, Path(id): Path<String>, Json(body): Json<ViewRequest>) -> AppResult<Json<ViewModel>> {
    let slot = state.slot(&id)?;
    let project = slot.project.read().await;
    Ok(finish_view(evaluate_str(&body.expr, project.model())?, body.grouped))
}

#[derive(Debug, Deserialize)]
struct TextRequest {
    text: String,
}

async fn put_text(State(state): Shared, Path(id): Path<String>, Json(body): Json<TextRequest>) -> AppResult<Json<Value>> {
    let slot = state.slot(&id)?;
    let now = state.now();
    let (_, view) = mutate(&state, &slot, "edit the text", |p| Ok(p.set_text(&body.text, now))).await?;
    Ok(Json(view))
}

#[derive(Debug, Deserialize)]
struct ResolveRequest {
    resolution: Resolution,
}

async fn resolve_changes(State(state): Shared, Path(id): Path<String>, Json(body): Json<ResolveRequest>) -> AppResult<Json<Value>> {
    let slot = state.slot(&id)?;
    let now = state.now();
    let (_, view) = mutate(&state, &slot, "resolve changes", |p| Ok(p.resolve(&body.resolution, now)?)).await?;
    Ok(Json(view))
}

#[derive(Debug, Deserialize)]
struct CheckoutRequest {
    id: String,
}

async fn checkout(State(state): Shared, Path(id): Path<String>, Json(body): Json<CheckoutRequest>) -> AppResult<Json<Value>> {
    let slot = state.slot(&id)?;
    let (_, view) = mutate(&state, &slot, "check out", |p| {
        p.checkout(&body.id)?;
        Ok(())
    })
    .await?;
    Ok(Json(view))
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct HistoryEntry<'a> {
    id: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    parent_id: Option<&'a str>,
    label: &'a str,
    created_at: chrono::DateTime<chrono::Utc>,
    stale: bool,
}

async fn get_history(State(state): Shared, Path(id): Path<String>) -> AppResult<Json<Value>> {
    let slot = state.slot(&id)?;
    let project = slot.project.read().await;
    let snapshots: Vec<HistoryEntry> = project
        .history
        .snapshots
        .iter()
        .map(|s| HistoryEntry {
            id: &s.id,
            parent_id: s.parent_id.as_deref(),
            label: &s.label,
            created_at: s.created_at,
            stale: s.model.stale,
        })
        .collect();
    Ok(Json(json!({ "currentId": project.current().id, "snapshots": snapshots })))
}

#[derive(Debug, Deserialize)]
struct MappingQuery {
    from: String,
    id: Option<String>,
    start: Option<usize>,
    end: Option<usize>,
}

/// Text ↔ visual highlighting: an event's sentence range, or the events
/// behind a range of text.
async fn mapping(State(state): Shared, Path(id): Path<String>, Query(q): Query<MappingQuery>) -> AppResult<Json<Value>> {
    let slot = state.slot(&id)?;
    let project = slot.project.read().await;
    let model = project.model();
    match q.from.as_str() {
        "event" => {
            let event_id = q.id.ok_or_else(|| ApiError::invalid("`id` is required"))?;
            let span = sentence_for_event(model, &event_id)?;
            Ok(Json(json!({
                "eventId": event_id,
                "sentenceIndex": span.index,
                "charStart": span.char_start,
                "charEnd": span.char_end,
            })))
        }
        "range" => {
            let (start, end) = match (q.start, q.end) {
                (Some(s), Some(e)) => (s, e),
                (Some(s), None) => (s, s),
                _ => return Err(ApiError::invalid("`start` is required")),
            };
            let events = events_for_span(model, start, end)?;
            let mut sentences: Vec<usize> = events.iter().map(|e| e.sentence_index).collect();
            sentences.dedup();
            let ids: Vec<&str> = events.iter().map(|e| e.id.as_str()).collect();
            Ok(Json(json!({ "start": start, "end": end, "eventIds": ids, "sentenceIndices": sentences })))
        }
        other => Err(ApiError::invalid(format!("cannot map from `{other}`; use `event` or `range`"))),
    }
}

async fn spawn_refresh(state: Arc<AppState>, id: String, incremental: bool) -> AppResult<(StatusCode, Json<JobSnapshot>)> {
    let slot = state.slot(&id)?;
    let token = slot.claim("an extraction")?;
    let job = state.jobs.create(&id, JobKind::Extract);
    let snapshot = job.snapshot();
    tokio::spawn(async move {
        job.start();
        let sink = job.clone();
        let options = ExtractionOptions {
            progress: Some(Arc::new(move |p: SentenceProgress| sink.sentence_done(p.sentence_index, p.completed, p.total))),
            ..Default::default()
        };
        let mut project = slot.project.read().await.clone();
        let outcome = project.refresh(&state.gateway, &options, incremental, state.now()).await;
        let result = match outcome {
            Ok(report) => state.persist(&project).map(|()| report),
            Err(e) => Err(e.into()),
        };
        match result {
            Ok(report) => {
                let view = summary(&project);
                *slot.project.write().await = project;
                drop(token);
                job.finish(json!({ "report": report, "project": view }));
            }
            Err(err) => {
                drop(token);
                job.fail(&err);
            }
        }
    });
    Ok((StatusCode::ACCEPTED, Json(snapshot)))
}

async fn refresh_full(State(state): Shared, Path(id): Path<String>) -> AppResult<impl IntoResponse> {
    spawn_refresh(state, id, false).await
}

async fn refresh_incremental(State(state): Shared, Path(id): Path<String>) -> AppResult<impl IntoResponse> {
    spawn_refresh(state, id, true).await
}

#[derive(Debug, Deserialize)]
struct EditRequest {
    intent: EditIntent,
    #[serde(default)]
    scope: Option<EditScope>,
}

async fn spawn_edit(
    state: Arc<AppState>,
    id: String,
    intent: EditIntent,
    scope: Option<EditScope>,
    kind: JobKind,
) -> AppResult<(StatusCode, Json<JobSnapshot>)> {
    let slot = state.slot(&id)?;
    let token = slot.claim("an edit")?;
    // Compile errors are the caller's fault and are reported right away.
    {
        let project = slot.project.read().await;
        storyloom_core::edit::compile(&intent, scope.as_ref(), project.text(), project.model())
            .map_err(|e| ApiError::invalid(e.to_string()))?;
    }
    let job = state.jobs.create(&id, kind);
    let snapshot = job.snapshot();
    tokio::spawn(run_edit(state, slot, job, token, intent, scope));
    Ok((StatusCode::ACCEPTED, Json(snapshot)))
}

async fn run_edit(
    state: Arc<AppState>,
    slot: Arc<Slot>,
    job: Arc<Job>,
    token: crate::state::WriteToken,
    intent: EditIntent,
    scope: Option<EditScope>,
) {
    job.start();
    let mut project = slot.project.read().await.clone();
    let result = match project.edit(&intent, scope.as_ref(), &state.gateway, state.now()).await {
        Ok(outcome) => state.persist(&project).map(|()| outcome),
        Err(e) => Err(e.into()),
    };
    match result {
        Ok(outcome) => {
            let view = summary(&project);
            *slot.project.write().await = project;
            drop(token);
            job.finish(json!({ "outcome": outcome, "project": view }));
        }
        Err(err) => {
            drop(token);
            job.fail(&err);
        }
    }
}

async fn post_edit(State(state): Shared, Path(id): Path<String>, Json(body): Json<EditRequest>) -> AppResult<impl IntoResponse> {
    let kind = match body.intent {
        EditIntent::RewriteFromVisuals => JobKind::Rewrite,
        _ => JobKind::Edit,
    };
    spawn_edit(state, id, body.intent, body.scope, kind).await
}

async fn rewrite_from_visuals(State(state): Shared, Path(id): Path<String>) -> AppResult<impl IntoResponse> {
    spawn_edit(state, id, EditIntent::RewriteFromVisuals, None, JobKind::Rewrite).await
}

fn project_job(state: &AppState, id: &str, job_id: &str) -> AppResult<Arc<Job>> {
    state
        .jobs
        .get(job_id)
        .filter(|job| job.snapshot().project_id == id)
        .ok_or_else(|| ApiError::not_found(format!("no job `{job_id}` in project `{id}`")))
}

async fn get_job(State(state): Shared, Path((id, job_id)): Path<(String, String)>) -> AppResult<Json<JobSnapshot>> {
    Ok(Json(project_job(&state, &id, &job_id)?.snapshot()))
}

async fn job_events(
    State(state): Shared,
    Path((id, job_id)): Path<(String, String)>,
) -> AppResult<Sse<impl Stream<Item = Result<Event, Infallible>>>> {
    let job = project_job(&state, &id, &job_id)?;
    let stream = futures::stream::unfold((job, 0usize), |(job, index)| async move {
        let event = job.event(index).await?;
        let sse = Event::default()
            .event(event.name())
            .json_data(&event)
            .expect("job events serialize");
        Some((Ok(sse), (job, index + 1)))
    });
    Ok(Sse::new(stream).keep_alive(KeepAlive::default()))
}
