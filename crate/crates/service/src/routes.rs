use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use causalkit::effectual::{expand_synergy, validate_synergy, SynergySpec};
use causalkit::elicitation::{ElicitationSession, EntryState, MarginalSequence};
use causalkit::inference::{estimate_query, query, Query};
use causalkit::model::ModelDoc;
use causalkit::{CausalModel, EventId, NodeKind};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::store::{ModelRecord, SessionRecord};
use crate::{ApiError, AppState};

type Shared = State<Arc<AppState>>;
type ApiResult<T = Response> = Result<T, ApiError>;

const DEFAULT_SAMPLES: usize = 10_000;

pub fn router() -> Router<Arc<AppState>> {
    Router::new()
        .route("/models", get(list_models).post(create_model))
        .route("/models/{id}", get(get_model).delete(delete_model))
        .route("/models/{id}/query", post(run_query))
        .route("/models/{id}/sessions", post(start_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/range", get(session_range))
        .route("/sessions/{id}/commit", post(commit))
        .route("/sessions/{id}/default", post(default_entry))
        .route("/sessions/{id}/complete", post(complete))
        .route("/synergy/expand", post(expand))
}

fn parse<T: DeserializeOwned>(body: &str) -> ApiResult<T> {
    serde_json::from_str(body).map_err(ApiError::bad_json)
}

fn model(state: &AppState, id: &str) -> ApiResult<ModelRecord> {
    state.models.get(id).ok_or_else(|| ApiError::not_found("model", id))
}

fn raw_json(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

async fn list_models(State(state): Shared) -> Json<Value> {
    let models: Vec<Value> = state
        .models
        .list()
        .into_iter()
        .map(|(id, version)| json!({ "id": id, "version": version }))
        .collect();
    Json(json!({ "models": models }))
}

async fn create_model(State(state): Shared, body: String) -> ApiResult {
    let doc: ModelDoc = parse(&body)?;
    let reserved = doc.events.iter().any(|e| e.id.is_reserved());
    let built = CausalModel::from_doc_with(&doc, reserved)?;
    let rec = state.models.insert(body.trim().to_owned(), built)?;
    tracing::info!(id = %rec.id, "model created");
    Ok((StatusCode::CREATED, Json(json!({ "id": rec.id, "version": rec.version }))).into_response())
}

async fn get_model(State(state): Shared, Path(id): Path<String>) -> ApiResult {
    Ok(raw_json(StatusCode::OK, model(&state, &id)?.envelope()))
}

async fn delete_model(State(state): Shared, Path(id): Path<String>) -> ApiResult<StatusCode> {
    if state.models.remove(&id)? {
        Ok(StatusCode::NO_CONTENT)
    } else {
        Err(ApiError::not_found("model", &id))
    }
}

#[derive(Debug, Default, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum Method {
    #[default]
    Exact,
    Sample,
}

#[derive(Deserialize)]
struct QueryRequest {
    #[serde(flatten)]
    query: Query,
    #[serde(default)]
    method: Method,
    n: Option<usize>,
    seed: Option<u64>,
}

async fn run_query(State(state): Shared, Path(id): Path<String>, body: String) -> ApiResult<Json<Value>> {
    let req: QueryRequest = parse(&body)?;
    let rec = model(&state, &id)?;
    let version = rec.version;
    let out = tokio::task::spawn_blocking(move || match req.method {
        Method::Exact => query(&rec.model, &req.query).map(|p| json!({ "probability": p, "method": "exact" })),
        Method::Sample => estimate_query(&rec.model, &req.query, req.n.unwrap_or(DEFAULT_SAMPLES), req.seed.unwrap_or(0))
            .map(|e| {
                json!({
                    "probability": e.estimate,
                    "std_error": e.std_error,
                    "accepted": e.accepted,
                    "drawn": e.drawn,
                    "method": "sample",
                })
            }),
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", e.to_string()))??;
    let mut out = out;
    out["version"] = json!(version);
    Ok(Json(out))
}

#[derive(Deserialize)]
struct StartRequest {
    process: EventId,
    /// Subsets as comma-separated ids; the standard order when absent.
    order: Option<Vec<String>>,
}

async fn start_session(State(state): Shared, Path(id): Path<String>, body: String) -> ApiResult {
    let req: StartRequest = parse(&body)?;
    let rec = model(&state, &id)?;
    let m = &rec.model;
    let p = m
        .index_of(&req.process)
        .ok_or_else(|| ApiError::not_found("event", req.process.as_str()))?;
    if m.kind(p) != NodeKind::Process {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            "NotProcess",
            format!("`{}` is not a process", req.process),
        ));
    }
    let effects: Vec<EventId> = m.effects_of(p).iter().map(|&e| m.id(e).clone()).collect();
    let session = match &req.order {
        None => ElicitationSession::standard(req.process.clone(), &effects)?,
        Some(order) => {
            let refs: Vec<&str> = order.iter().map(String::as_str).collect();
            let seq = MarginalSequence::parse(effects.clone(), &refs)?;
            ElicitationSession::start(req.process.clone(), &effects, seq)?
        }
    };
    let rec = state.sessions.create(&id, session)?;
    Ok((StatusCode::CREATED, Json(session_view(&rec))).into_response())
}

fn session_view(rec: &SessionRecord) -> Value {
    let s = &rec.session;
    let seq = s.sequence();
    let entries: Vec<Value> = s
        .entries()
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let mut subset: Vec<&EventId> = seq.subset(i);
            subset.sort();
            let (status, value) = match e {
                EntryState::Committed { value } => ("committed", Some(*value)),
                EntryState::Defaulted => ("defaulted", None),
                EntryState::Pending if i == s.position() && !s.is_completed() => ("current", None),
                EntryState::Pending => ("pending", None),
            };
            json!({ "subset": subset, "status": status, "value": value })
        })
        .collect();
    let range = s
        .next_range()
        .ok()
        .map(|r| json!({ "lo": r.lo, "hi": r.hi, "subset": s.current() }));
    json!({
        "id": rec.id,
        "model_id": rec.model_id,
        "process": s.process(),
        "effects": s.effects(),
        "position": s.position(),
        "finished": s.is_finished(),
        "completed": s.is_completed(),
        "sequence": entries,
        "range": range,
        "log": s.log(),
    })
}

fn session(state: &AppState, id: &str) -> ApiResult<SessionRecord> {
    state.sessions.get(id).ok_or_else(|| ApiError::not_found("session", id))
}

async fn get_session(State(state): Shared, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    Ok(Json(session_view(&session(&state, &id)?)))
}

async fn session_range(State(state): Shared, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let rec = session(&state, &id)?;
    let r = rec.session.next_range()?;
    Ok(Json(json!({ "lo": r.lo, "hi": r.hi, "subset": rec.session.current() })))
}

fn check_position(s: &ElicitationSession, expected: Option<usize>) -> ApiResult<()> {
    if s.is_completed() {
        return Err(causalkit::elicitation::ElicitationError::Completed.into());
    }
    match expected {
        Some(p) if p != s.position() => Err(ApiError::new(
            StatusCode::CONFLICT,
            "StalePosition",
            format!("session is at position {}, not {p}", s.position()),
        )
        .with_details(json!({ "position": s.position() }))),
        _ => Ok(()),
    }
}

#[derive(Deserialize)]
struct CommitRequest {
    value: f64,
    /// Conditioning subset: `value` is then `pr(current minus given / given)`.
    given: Option<Vec<EventId>>,
    position: Option<usize>,
}

async fn commit(State(state): Shared, Path(id): Path<String>, body: String) -> ApiResult<Json<Value>> {
    let req: CommitRequest = parse(&body)?;
    let done = state.sessions.mutate(&id, |rec| -> ApiResult<()> {
        let s = &mut rec.session;
        check_position(s, req.position)?;
        match &req.given {
            None => s.commit(req.value)?,
            Some(given) => {
                let head: Vec<EventId> = s
                    .current()
                    .unwrap_or_default()
                    .into_iter()
                    .filter(|e| !given.contains(e))
                    .collect();
                s.commit_conditional(&head, given, req.value)?
            }
        }
        Ok(())
    });
    let (_, rec) = done.ok_or_else(|| ApiError::not_found("session", &id))??;
    Ok(Json(session_view(&rec)))
}

#[derive(Deserialize, Default)]
struct DefaultRequest {
    position: Option<usize>,
}

async fn default_entry(State(state): Shared, Path(id): Path<String>, body: String) -> ApiResult<Json<Value>> {
    let req: DefaultRequest = if body.trim().is_empty() { DefaultRequest::default() } else { parse(&body)? };
    let done = state.sessions.mutate(&id, |rec| -> ApiResult<()> {
        check_position(&rec.session, req.position)?;
        rec.session.default_current()?;
        Ok(())
    });
    let (_, rec) = done.ok_or_else(|| ApiError::not_found("session", &id))??;
    Ok(Json(session_view(&rec)))
}

async fn complete(State(state): Shared, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let done = state.sessions.mutate(&id, |rec| -> ApiResult<Value> {
        let rows = rec.session.complete()?;
        let process = rec.session.process().clone();
        let installed = state
            .models
            .update(&rec.model_id, |m| m.with_causal_table(&process, rows.clone()).map_err(ApiError::from))?
            .ok_or_else(|| ApiError::not_found("model", &rec.model_id))?;
        tracing::info!(model = %installed.id, version = installed.version, "causal table installed");
        Ok(json!({ "model_id": installed.id, "version": installed.version, "table": rows }))
    });
    let (out, _) = done.ok_or_else(|| ApiError::not_found("session", &id))??;
    Ok(Json(out))
}

async fn expand(body: String) -> ApiResult<Json<Value>> {
    let spec: SynergySpec = parse(&body)?;
    let violations = validate_synergy(&spec);
    let rows = if violations.is_empty() {
        Some(expand_synergy(&spec).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "InvalidSpec", e.to_string()))?)
    } else {
        None
    };
    Ok(Json(json!({ "rows": rows, "violations": violations })))
}
