//! HTTP front end for a reprojection session.
//!
//! | route | reply |
//! |---|---|
//! | `GET /api/layout?rev=latest\|N` | layout JSON, revision in `x-revision` |
//! | `POST /api/reproject` `{"remove": [..]}` | `{"revision": N}` |
//! | `GET /api/docs?concept=..&slice=..` | documents, oldest first |
//! | `GET /api/concepts` | current vocabulary with importance |
//! | `GET /api/session` | revision, topic, removed concepts, vocabulary |
//!
//! Errors come back as `{"error": ".."}` with a 4xx or 5xx status.

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Query, State};
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{any, get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};
use std::path::Path;
use std::sync::Arc;
use tower_http::services::ServeDir;

use conceptflow::pipeline::{docs_for, PipelineError, ReprojectRequest, Session};

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, msg: impl Into<String>) -> Self {
        ApiError { status, body: json!({ "error": msg.into() }) }
    }

    fn bad_request(msg: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, msg)
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        match &e {
            PipelineError::NotFound(_) => ApiError::new(StatusCode::NOT_FOUND, e.to_string()),
            PipelineError::UnknownConcepts(tokens) => ApiError {
                status: StatusCode::BAD_REQUEST,
                body: json!({ "error": e.to_string(), "unknown": tokens }),
            },
            _ => {
                log::error!("{e}");
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
            }
        }
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        ApiError::bad_request(e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Build the router. With `static_dir`, any non-API path is served from it.
pub fn router(session: Arc<Session>, static_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/api/layout", get(layout))
        .route("/api/reproject", post(reproject))
        .route("/api/docs", get(docs))
        .route("/api/concepts", get(concepts))
        .route("/api/session", get(summary))
        .route("/api/{*rest}", any(no_route))
        .with_state(session);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(no_route),
    }
}

async fn no_route() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "no such route")
}

#[derive(Debug, Deserialize)]
struct LayoutQuery {
    rev: Option<String>,
}

fn parse_rev(rev: Option<&str>) -> ApiResult<Option<u64>> {
    match rev {
        None | Some("latest") => Ok(None),
        Some(r) => r
            .parse()
            .map(Some)
            .map_err(|_| ApiError::bad_request(format!("rev must be \"latest\" or a revision number, got {r:?}"))),
    }
}

async fn layout(State(session): State<Arc<Session>>, q: Result<Query<LayoutQuery>, QueryRejection>) -> ApiResult<Response> {
    let Query(q) = q?;
    let rev = parse_rev(q.rev.as_deref())?;
    // Older revisions come from disk.
    let (rev, layout) = tokio::task::spawn_blocking(move || session.layout(rev))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    let mut resp = Json(layout).into_response();
    resp.headers_mut().insert("x-revision", HeaderValue::from(rev));
    Ok(resp)
}

async fn reproject(State(session): State<Arc<Session>>, body: Bytes) -> ApiResult<Json<Value>> {
    let req = ReprojectRequest::from_json(&body).map_err(|e| ApiError::bad_request(format!("invalid body: {e}")))?;
    let state = tokio::task::spawn_blocking(move || session.reproject(&req.remove))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    log::info!("revision {} (removed {})", state.revision, state.removed.len());
    Ok(Json(json!({ "revision": state.revision })))
}

#[derive(Debug, Deserialize)]
struct DocsQuery {
    concept: String,
    slice: usize,
}

async fn docs(State(session): State<Arc<Session>>, q: Result<Query<DocsQuery>, QueryRejection>) -> ApiResult<Response> {
    let Query(q) = q?;
    let snap = session.snapshot();
    let docs = docs_for(&snap, &q.concept, q.slice)?;
    Ok(Json(docs).into_response())
}

async fn concepts(State(session): State<Arc<Session>>) -> Response {
    Json(session.snapshot().concepts()).into_response()
}

async fn summary(State(session): State<Arc<Session>>) -> Response {
    Json(session.snapshot().summary()).into_response()
}
