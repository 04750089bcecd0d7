//! JSON API under `/api`.

use std::collections::BTreeMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::BytesRejection;
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::Utc;
use serde::{Deserialize, Serialize};
use serde_json::json;
use uuid::Uuid;
use virtlab::dsl::{parse, ParseError, Program};
use virtlab::grading::AssignmentSpec;

use crate::jobs::{ExecError, JobRegistry, Pool, RunResult};
use crate::store::{Submission, SubmissionStore};

/// Largest accepted program source.
pub const MAX_SOURCE_BYTES: usize = 64 * 1024;

#[derive(Clone)]
pub struct AppState {
    pub assignments: Arc<BTreeMap<String, Arc<AssignmentSpec>>>,
    pub jobs: Arc<JobRegistry>,
    pub pool: Pool,
    pub store: Arc<dyn SubmissionStore>,
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/assignments", get(list_assignments))
        .route("/api/assignments/{id}", get(get_assignment))
        .route("/api/assignments/{id}/run", post(start_run))
        .route("/api/assignments/{id}/submit", post(submit))
        .route("/api/runs/{job}", get(get_run))
        .route("/api/submissions", get(list_submissions))
        .layer(DefaultBodyLimit::max(MAX_SOURCE_BYTES))
        .with_state(state)
}

#[derive(Debug)]
pub enum ApiError {
    NotFound(String),
    Parse(Vec<ParseError>),
    TooLarge,
    BadRequest(String),
    StoreUnavailable(String),
    Timeout(String),
    Internal(String),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, body) = match self {
            ApiError::NotFound(m) => (StatusCode::NOT_FOUND, json!({"error": "not_found", "message": m})),
            ApiError::Parse(errors) => {
                let message = errors.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n");
                let list: Vec<_> = errors
                    .iter()
                    .map(|e| json!({"line": e.line, "col": e.col, "message": e.message}))
                    .collect();
                (
                    StatusCode::UNPROCESSABLE_ENTITY,
                    json!({"error": "parse_error", "message": message, "errors": list}),
                )
            }
            ApiError::TooLarge => (
                StatusCode::PAYLOAD_TOO_LARGE,
                json!({"error": "payload_too_large", "message": format!("source exceeds {MAX_SOURCE_BYTES} bytes")}),
            ),
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, json!({"error": "bad_request", "message": m})),
            ApiError::StoreUnavailable(m) => (
                StatusCode::SERVICE_UNAVAILABLE,
                json!({"error": "store_unavailable", "message": m}),
            ),
            ApiError::Timeout(m) => (StatusCode::GATEWAY_TIMEOUT, json!({"error": "timeout", "message": m})),
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, json!({"error": "internal", "message": m})),
        };
        (status, Json(body)).into_response()
    }
}

impl From<ExecError> for ApiError {
    fn from(e: ExecError) -> Self {
        match e {
            ExecError::Timeout(_) => ApiError::Timeout(e.to_string()),
            _ => ApiError::Internal(e.to_string()),
        }
    }
}

#[derive(Serialize)]
struct AssignmentSummary {
    id: String,
    title: String,
}

async fn list_assignments(State(s): State<AppState>) -> Json<Vec<AssignmentSummary>> {
    let out = s
        .assignments
        .values()
        .map(|a| AssignmentSummary {
            id: a.id.clone(),
            title: a.title.clone(),
        })
        .collect();
    Json(out)
}

fn find(s: &AppState, id: &str) -> Result<Arc<AssignmentSpec>, ApiError> {
    s.assignments
        .get(id)
        .cloned()
        .ok_or_else(|| ApiError::NotFound(format!("no assignment {id:?}")))
}

async fn get_assignment(State(s): State<AppState>, Path(id): Path<String>) -> Result<Json<Arc<AssignmentSpec>>, ApiError> {
    find(&s, &id).map(Json)
}

#[derive(Deserialize)]
struct SourceBody {
    source: String,
}

/// The program source, sent as plain text or as `{"source": "..."}`.
fn read_source(headers: &HeaderMap, body: Result<Bytes, BytesRejection>) -> Result<String, ApiError> {
    let bytes = body.map_err(|r| {
        if r.status() == StatusCode::PAYLOAD_TOO_LARGE {
            ApiError::TooLarge
        } else {
            ApiError::BadRequest(r.body_text())
        }
    })?;
    if bytes.len() > MAX_SOURCE_BYTES {
        return Err(ApiError::TooLarge);
    }
    let is_json = headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("application/json"));
    if is_json {
        let b: SourceBody = serde_json::from_slice(&bytes).map_err(|e| ApiError::BadRequest(e.to_string()))?;
        if b.source.len() > MAX_SOURCE_BYTES {
            return Err(ApiError::TooLarge);
        }
        Ok(b.source)
    } else {
        String::from_utf8(bytes.to_vec()).map_err(|_| ApiError::BadRequest("source is not UTF-8".into()))
    }
}

fn prepare(
    s: &AppState,
    id: &str,
    headers: &HeaderMap,
    body: Result<Bytes, BytesRejection>,
) -> Result<(Arc<AssignmentSpec>, String, Program), ApiError> {
    let assignment = find(s, id)?;
    let source = read_source(headers, body)?;
    let program = parse(&source).map_err(|e| ApiError::Parse(e.0))?;
    Ok((assignment, source, program))
}

async fn start_run(
    State(s): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Result<Bytes, BytesRejection>,
) -> Result<Response, ApiError> {
    let (assignment, _, program) = prepare(&s, &id, &headers, body)?;
    let job = s.jobs.create(&id);
    let (jobs, pool, job_id) = (s.jobs.clone(), s.pool.clone(), job.id);
    tokio::spawn(async move {
        let started = jobs.clone();
        let outcome = pool
            .evaluate(assignment, Arc::new(program), move || started.mark_running(job_id))
            .await
            .map(RunResult::from_evaluation)
            .map_err(|e| e.to_string());
        if let Err(e) = &outcome {
            tracing::warn!(job = %job_id, "run failed: {e}");
        }
        jobs.finish(job_id, outcome);
    });
    let location = format!("/api/runs/{}", job.id);
    Ok((StatusCode::ACCEPTED, [(header::LOCATION, location)], Json(job)).into_response())
}

async fn get_run(State(s): State<AppState>, Path(job): Path<String>) -> Result<Response, ApiError> {
    let id = Uuid::parse_str(&job).map_err(|_| ApiError::NotFound(format!("no run {job:?}")))?;
    let job = s.jobs.get(id).ok_or_else(|| ApiError::NotFound(format!("no run {id}")))?;
    Ok(Json(job).into_response())
}

async fn submit(
    State(s): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Result<Bytes, BytesRejection>,
) -> Result<Json<Submission>, ApiError> {
    let (assignment, source, program) = prepare(&s, &id, &headers, body)?;
    let eval = s.pool.evaluate(assignment, Arc::new(program), || {}).await?;
    let submission = Submission {
        id: Uuid::new_v4(),
        assignment_id: id,
        source,
        created_at: Utc::now(),
        trace_digest: eval.trace.digest(),
        report: eval.report,
    };
    let store = s.store.clone();
    let record = submission.clone();
    tokio::task::spawn_blocking(move || store.append(&record))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?
        .map_err(|e| {
            tracing::error!("{e}");
            ApiError::StoreUnavailable(e.to_string())
        })?;
    Ok(Json(submission))
}

#[derive(Deserialize)]
struct HistoryQuery {
    assignment: String,
}

async fn list_submissions(
    State(s): State<AppState>,
    query: Result<Query<HistoryQuery>, axum::extract::rejection::QueryRejection>,
) -> Result<Json<Vec<Submission>>, ApiError> {
    let Query(q) = query.map_err(|_| ApiError::BadRequest("missing ?assignment=<id>".into()))?;
    find(&s, &q.assignment)?;
    let store = s.store.clone();
    let list = tokio::task::spawn_blocking(move || store.list(&q.assignment))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?
        .map_err(|e| ApiError::StoreUnavailable(e.to_string()))?;
    Ok(Json(list))
}
