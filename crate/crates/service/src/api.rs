//! HTTP facade over [`Diagnoser`] sessions.
//!
//! | method | path                     |                                   |
//! |--------|--------------------------|-----------------------------------|
//! | POST   | /sessions                | `{sentence, kb_name}` or `{sentence, kb}` |
//! | GET    | /sessions/{id}           | session view                      |
//! | POST   | /sessions/{id}/answers   | `{question_index, answer}`        |
//! | GET    | /sessions/{id}/report    | report JSON, as written by the CLI |
//! | GET    | /sessions/{id}/model     | parse trace and model graph       |
//!
//! Anything else falls through to the static UI directory when one is set.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use inld_core::parsekit::KnowledgeBase;
use inld_core::session::{DiagnosisReport, Question, TranscriptEntry};
use inld_core::strategies::{Diagnoser, EngineState};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::services::ServeDir;
use uuid::Uuid;

pub const DEFAULT_TTL: Duration = Duration::from_secs(60 * 60);

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub ttl: Duration,
    pub ui_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig { ttl: DEFAULT_TTL, ui_dir: None }
    }
}

struct Session {
    id: Uuid,
    engine: Diagnoser,
    created_at: u64,
    touched: Instant,
    /// Response body returned for each accepted answer, keyed by index.
    replies: Vec<(String, Value)>,
}

#[derive(Clone)]
pub struct AppState {
    sessions: Arc<Mutex<HashMap<Uuid, Arc<Mutex<Session>>>>>,
    ttl: Duration,
}

impl AppState {
    pub fn new(ttl: Duration) -> Self {
        AppState { sessions: Arc::default(), ttl }
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().expect("session map poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Drops sessions idle for longer than the TTL.
    pub fn evict_expired(&self) -> usize {
        let mut map = self.sessions.lock().expect("session map poisoned");
        let before = map.len();
        map.retain(|_, s| match s.try_lock() {
            Ok(s) => s.touched.elapsed() < self.ttl,
            // in use right now, so not idle
            Err(_) => true,
        });
        before - map.len()
    }

    fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        let uuid = Uuid::parse_str(id).map_err(|_| ApiError::not_found(id))?;
        self.sessions.lock().expect("session map poisoned").get(&uuid).cloned().ok_or_else(|| ApiError::not_found(id))
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError { status, body: json!({ "error": message.into() }) }
    }

    fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, format!("no session {id}"))
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, r.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

#[derive(Debug, Deserialize)]
pub struct CreateSession {
    pub sentence: String,
    #[serde(default)]
    pub kb_name: Option<String>,
    #[serde(default)]
    pub kb: Option<Value>,
}

#[derive(Debug, Deserialize)]
pub struct SubmitAnswer {
    pub question_index: usize,
    pub answer: String,
}

#[derive(Debug, Serialize)]
pub struct QuestionView<'a> {
    #[serde(flatten)]
    pub question: &'a Question,
    pub instruction: String,
    /// The question as the console prints it.
    pub text: String,
}

impl<'a> QuestionView<'a> {
    pub fn new(question: &'a Question) -> Self {
        QuestionView { question, instruction: question.instruction(), text: question.render() }
    }
}

#[derive(Debug, Serialize)]
pub struct SessionView<'a> {
    pub session_id: String,
    pub state: EngineState,
    pub created_at: u64,
    pub sentence: &'a str,
    pub kb: &'a str,
    pub question_index: usize,
    pub question: Option<QuestionView<'a>>,
    pub transcript: &'a [TranscriptEntry],
    pub transcript_text: String,
    pub report: Option<&'a DiagnosisReport>,
}

fn view(s: &Session) -> Value {
    let e = &s.engine;
    let snapshot = e.snapshot();
    let v = SessionView {
        session_id: s.id.to_string(),
        state: e.state(),
        created_at: s.created_at,
        sentence: &e.trace().sentence,
        kb: &e.kb().name,
        question_index: e.question_index(),
        question: e.pending().map(QuestionView::new),
        transcript: e.transcript(),
        transcript_text: snapshot.transcript_text.clone(),
        report: e.report(),
    };
    serde_json::to_value(v).expect("views serialize")
}

/// Moves the engine on to its next question or its report; the outcome is
/// read back through the view.
fn settle(engine: &mut Diagnoser) {
    let _ = engine.advance();
}

pub fn resolve_kb(kb_name: Option<&str>, inline: Option<Value>) -> Result<KnowledgeBase, String> {
    match (kb_name, inline) {
        (Some(_), Some(_)) => Err("give either kb_name or kb, not both".into()),
        (None, None) => Err("missing kb_name or kb".into()),
        (Some(name), None) => KnowledgeBase::named(name).map_err(|e| e.to_string()),
        (None, Some(v)) => {
            let kb: KnowledgeBase = serde_json::from_value(v).map_err(|e| format!("invalid kb: {e}"))?;
            kb.validate().map_err(|e| format!("invalid kb: {e}"))?;
            Ok(kb)
        }
    }
}

async fn create_session(
    State(state): State<AppState>,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> Result<Response, ApiError> {
    let Json(req) = body?;
    if req.sentence.trim().is_empty() {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "sentence is empty"));
    }
    let kb = resolve_kb(req.kb_name.as_deref(), req.kb).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e))?;
    state.evict_expired();
    let mut engine = Diagnoser::start(&req.sentence, kb);
    settle(&mut engine);
    if engine.trace().fragmented {
        let report = engine.snapshot();
        return Err(ApiError {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            body: json!({ "error": "the sentence does not parse", "report": report }),
        });
    }
    let id = Uuid::new_v4();
    let created_at = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let session = Session { id, engine, created_at, touched: Instant::now(), replies: vec![] };
    let body = view(&session);
    state.sessions.lock().expect("session map poisoned").insert(id, Arc::new(Mutex::new(session)));
    Ok((StatusCode::CREATED, [(header::LOCATION, format!("/sessions/{id}"))], Json(body)).into_response())
}

async fn get_session(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let s = state.get(&id)?;
    let mut s = s.lock().expect("session poisoned");
    s.touched = Instant::now();
    Ok(Json(view(&s)))
}

async fn submit_answer(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<SubmitAnswer>, JsonRejection>,
) -> Result<Json<Value>, ApiError> {
    let s = state.get(&id)?;
    let Json(req) = body?;
    let mut s = s.lock().expect("session poisoned");
    s.touched = Instant::now();
    let current = s.engine.question_index();
    if req.question_index < current {
        return match s.replies.get(req.question_index) {
            Some((answer, reply)) if answer.trim() == req.answer.trim() => Ok(Json(reply.clone())),
            _ => Err(ApiError::new(
                StatusCode::CONFLICT,
                format!("question {} was already answered differently", req.question_index),
            )),
        };
    }
    if req.question_index > current || s.engine.pending().is_none() {
        return Err(ApiError::new(
            StatusCode::CONFLICT,
            format!("question {} is not pending (next index is {current})", req.question_index),
        ));
    }
    s.engine.answer(&req.answer).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()))?;
    settle(&mut s.engine);
    let reply = view(&s);
    s.replies.push((req.answer, reply.clone()));
    Ok(Json(reply))
}

async fn get_report(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let s = state.get(&id)?;
    let mut s = s.lock().expect("session poisoned");
    s.touched = Instant::now();
    let body = s.engine.snapshot().to_json();
    Ok(([(header::CONTENT_TYPE, "application/json")], body).into_response())
}

async fn get_model(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let s = state.get(&id)?;
    let mut s = s.lock().expect("session poisoned");
    s.touched = Instant::now();
    Ok(Json(crate::model_export(&s.engine)))
}

pub fn router(state: AppState, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/answers", post(submit_answer))
        .route("/sessions/{id}/report", get(get_report))
        .route("/sessions/{id}/model", get(get_model))
        .with_state(state);
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir).append_index_html_on_directories(true)),
        None => api,
    }
}

/// Binds `port` on all interfaces and serves until the process exits.
pub async fn serve(port: u16, config: ServiceConfig) -> std::io::Result<()> {
    let state = AppState::new(config.ttl);
    let sweeper = state.clone();
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(60));
        loop {
            tick.tick().await;
            sweeper.evict_expired();
        }
    });
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state, config.ui_dir)).await
}
