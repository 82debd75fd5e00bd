//! HTTP/JSON front end: lessons, templates, stateless practice assessment and
//! forward-only quiz sessions.
//!
//! | method | path                              | body      |
//! |--------|-----------------------------------|-----------|
//! | GET    | /api/lessons                      |           |
//! | GET    | /api/lessons/{id}                 |           |
//! | GET    | /api/characters/{label}/template  |           |
//! | POST   | /api/assess                       | ink       |
//! | POST   | /api/quiz                         | {lessonId}|
//! | GET    | /api/quiz/{sid}                   |           |
//! | POST   | /api/quiz/{sid}/submit            | ink       |
//! | GET    | /api/quiz/{sid}/summary           |           |
//!
//! Assessment responses are the report's canonical serialization, so they
//! are byte-identical to [`AssessmentReport::to_json`] for the same input.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::ThresholdConfig;
use crate::ink::{parse_ink, InkError, Sketch, Stroke};
use crate::quiz::{quiz_summary, QuizReport};
use crate::report::{assess_character, AssessError, AssessmentReport};
use crate::store::{CharacterInfo, Lesson, TemplateStore};

pub const STUDENT_ID_HEADER: &str = "x-student-id";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuizState {
    InProgress,
    Complete,
}

/// One student's pass through a lesson. The cursor only moves forward.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct QuizSession {
    pub session_id: String,
    pub lesson_id: String,
    pub labels: Vec<String>,
    pub cursor: usize,
    #[serde(skip)]
    pub collected: Vec<AssessmentReport>,
    pub state: QuizState,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub student_id: Option<String>,
}

impl QuizSession {
    pub fn new(session_id: String, lesson: &Lesson, student_id: Option<String>) -> Self {
        let state = if lesson.character_labels.is_empty() {
            QuizState::Complete
        } else {
            QuizState::InProgress
        };
        QuizSession {
            session_id,
            lesson_id: lesson.id.clone(),
            labels: lesson.character_labels.clone(),
            cursor: 0,
            collected: Vec::new(),
            state,
            student_id,
        }
    }

    pub fn expected_label(&self) -> Option<&str> {
        self.labels.get(self.cursor).map(String::as_str)
    }

    /// Records the report for the current character and advances.
    pub fn record(&mut self, report: AssessmentReport) -> Result<(), QuizFlowError> {
        if self.state == QuizState::Complete {
            return Err(QuizFlowError::AlreadyComplete);
        }
        self.collected.push(report);
        self.cursor += 1;
        if self.cursor == self.labels.len() {
            self.state = QuizState::Complete;
        }
        Ok(())
    }

    pub fn summary(&self) -> Result<QuizReport, QuizFlowError> {
        if self.state != QuizState::Complete {
            return Err(QuizFlowError::NotComplete {
                cursor: self.cursor,
                total: self.labels.len(),
            });
        }
        quiz_summary(&self.lesson_id, &self.collected).map_err(|_| QuizFlowError::Empty)
    }

    fn status(&self) -> serde_json::Value {
        json!({
            "sessionId": self.session_id,
            "lessonId": self.lesson_id,
            "cursor": self.cursor,
            "total": self.labels.len(),
            "state": self.state,
            "next": self.expected_label(),
        })
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum QuizFlowError {
    #[error("quiz already complete")]
    AlreadyComplete,
    #[error("quiz not complete ({cursor} of {total} submitted)")]
    NotComplete { cursor: usize, total: usize },
    #[error("lesson has no characters")]
    Empty,
}

/// Append-only JSON-lines log of submitted ink and reports.
pub struct Persistence {
    out: Mutex<BufWriter<File>>,
}

impl Persistence {
    pub fn open(dir: &Path) -> std::io::Result<Self> {
        std::fs::create_dir_all(dir)?;
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(dir.join("records.jsonl"))?;
        Ok(Persistence {
            out: Mutex::new(BufWriter::new(file)),
        })
    }

    pub fn append(&self, record: &serde_json::Value) -> std::io::Result<()> {
        let mut out = self.out.lock().expect("persistence lock poisoned");
        serde_json::to_writer(&mut *out, record)?;
        out.write_all(b"\n")?;
        out.flush()
    }
}

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<TemplateStore>,
    pub config: Arc<ThresholdConfig>,
    sessions: Arc<Mutex<HashMap<String, Arc<Mutex<QuizSession>>>>>,
    persistence: Option<Arc<Persistence>>,
}

impl AppState {
    pub fn new(store: TemplateStore, config: ThresholdConfig) -> Self {
        AppState {
            store: Arc::new(store),
            config: Arc::new(config),
            sessions: Arc::default(),
            persistence: None,
        }
    }

    pub fn with_persistence(mut self, persistence: Persistence) -> Self {
        self.persistence = Some(Arc::new(persistence));
        self
    }

    fn session(&self, sid: &str) -> Option<Arc<Mutex<QuizSession>>> {
        self.sessions.lock().expect("session map poisoned").get(sid).cloned()
    }

    fn persist(&self, record: serde_json::Value) {
        if let Some(p) = &self.persistence {
            if let Err(e) = p.append(&record) {
                log::error!("failed to persist record: {e}");
            }
        }
    }

    /// Writes the state of every open session to the persistence log.
    pub fn flush_sessions(&self) {
        if self.persistence.is_none() {
            return;
        }
        let sessions: Vec<_> = self
            .sessions
            .lock()
            .expect("session map poisoned")
            .values()
            .cloned()
            .collect();
        let mut snapshots: Vec<serde_json::Value> = sessions
            .iter()
            .map(|s| {
                let s = s.lock().expect("session poisoned");
                json!({ "kind": "session", "session": &*s })
            })
            .collect();
        snapshots.sort_by(|a, b| a["session"]["sessionId"].as_str().cmp(&b["session"]["sessionId"].as_str()));
        for snap in snapshots {
            self.persist(snap);
        }
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/lessons", get(list_lessons))
        .route("/api/lessons/{id}", get(get_lesson))
        .route("/api/characters/{label}/template", get(get_template))
        .route("/api/assess", post(assess))
        .route("/api/quiz", post(start_quiz))
        .route("/api/quiz/{sid}", get(quiz_status))
        .route("/api/quiz/{sid}/submit", post(submit_quiz))
        .route("/api/quiz/{sid}/summary", get(quiz_summary_handler))
        .with_state(state)
}

/// Serves until `shutdown` resolves, then flushes open sessions.
pub async fn serve(
    listener: tokio::net::TcpListener,
    state: AppState,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let app = router(state.clone());
    axum::serve(listener, app).with_graceful_shutdown(shutdown).await?;
    state.flush_sessions();
    Ok(())
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
    path: Option<String>,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
            path: None,
        }
    }
}

impl From<InkError> for ApiError {
    fn from(e: InkError) -> Self {
        let status = match e {
            InkError::EmptySketch => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::BAD_REQUEST,
        };
        ApiError {
            status,
            path: e.path().map(String::from),
            message: e.to_string(),
        }
    }
}

impl From<AssessError> for ApiError {
    fn from(e: AssessError) -> Self {
        if e.is_empty_sketch() {
            return ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string());
        }
        if e.is_not_found() {
            return ApiError::new(StatusCode::NOT_FOUND, e.to_string());
        }
        match e {
            AssessError::Ink(ink) => ink.into(),
            other => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, other.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": self.message });
        if let Some(path) = self.path {
            body["path"] = json!(path);
        }
        (self.status, axum::Json(body)).into_response()
    }
}

fn json_text(body: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn student_id(headers: &HeaderMap) -> Option<String> {
    headers
        .get(STUDENT_ID_HEADER)
        .and_then(|v| v.to_str().ok())
        .map(String::from)
}

fn parse_body(body: &Bytes) -> Result<Sketch, ApiError> {
    let text = std::str::from_utf8(body)
        .map_err(|_| ApiError::new(StatusCode::BAD_REQUEST, "request body is not UTF-8"))?;
    Ok(parse_ink(text)?)
}

async fn list_lessons(State(state): State<AppState>) -> axum::Json<Vec<Lesson>> {
    axum::Json(state.store.list_lessons().to_vec())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct LessonView<'a> {
    id: &'a str,
    title: &'a str,
    characters: Vec<&'a CharacterInfo>,
}

async fn get_lesson(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> Result<Response, ApiError> {
    let lesson = state
        .store
        .lesson(&id)
        .map_err(|e| ApiError::new(StatusCode::NOT_FOUND, e.to_string()))?;
    let characters = state
        .store
        .lesson_characters(&id)
        .map_err(|e| ApiError::new(StatusCode::NOT_FOUND, e.to_string()))?;
    Ok(axum::Json(LessonView {
        id: &lesson.id,
        title: &lesson.title,
        characters,
    })
    .into_response())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StrokeTiming {
    /// Offset of the stroke's first point from the first point of the
    /// character, ms.
    pub start: u64,
    pub duration: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TemplateView {
    pub label: String,
    pub stroke_count: usize,
    pub resample_points: usize,
    pub size: f64,
    /// Normalized strokes in writing order.
    pub strokes: Vec<Stroke>,
    pub total_duration: u64,
    pub timing: Vec<StrokeTiming>,
}

async fn get_template(State(state): State<AppState>, UrlPath(label): UrlPath<String>) -> Result<Response, ApiError> {
    let t = state
        .store
        .lookup_template(&label)
        .map_err(|e| ApiError::new(StatusCode::NOT_FOUND, e.to_string()))?;
    let origin = t.raw.strokes.first().and_then(Stroke::start_time).unwrap_or(0);
    Ok(axum::Json(TemplateView {
        label: t.label.clone(),
        stroke_count: t.stroke_count,
        resample_points: t.normalized.resample_points,
        size: t.normalized.size,
        strokes: t.normalized.strokes.clone(),
        total_duration: t.total_duration,
        timing: t
            .raw
            .strokes
            .iter()
            .map(|s| StrokeTiming {
                start: s.start_time().unwrap_or(origin) - origin,
                duration: s.duration(),
            })
            .collect(),
    })
    .into_response())
}

async fn assess(State(state): State<AppState>, headers: HeaderMap, body: Bytes) -> Result<Response, ApiError> {
    let sketch = parse_body(&body)?;
    let template = state
        .store
        .lookup_template(sketch.label())
        .map_err(|e| ApiError::new(StatusCode::NOT_FOUND, e.to_string()))?;
    let report = assess_character(template, &sketch, None, &state.config)?;
    let text = report.to_json();
    state.persist(json!({
        "kind": "assess",
        "studentId": student_id(&headers),
        "ink": sketch,
        "report": report,
    }));
    Ok(json_text(text))
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct StartQuiz {
    lesson_id: String,
}

async fn start_quiz(State(state): State<AppState>, headers: HeaderMap, body: Bytes) -> Result<Response, ApiError> {
    let req: StartQuiz = serde_json::from_slice(&body)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, format!("invalid quiz request: {e}")))?;
    let lesson = state
        .store
        .lesson(&req.lesson_id)
        .map_err(|e| ApiError::new(StatusCode::NOT_FOUND, e.to_string()))?;
    let sid = uuid::Uuid::new_v4().to_string();
    let session = QuizSession::new(sid.clone(), lesson, student_id(&headers));
    let status = session.status();
    state
        .sessions
        .lock()
        .expect("session map poisoned")
        .insert(sid, Arc::new(Mutex::new(session)));
    Ok((StatusCode::CREATED, axum::Json(status)).into_response())
}

fn lookup_session(state: &AppState, sid: &str) -> Result<Arc<Mutex<QuizSession>>, ApiError> {
    state
        .session(sid)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("quiz session `{sid}` not found")))
}

async fn quiz_status(State(state): State<AppState>, UrlPath(sid): UrlPath<String>) -> Result<Response, ApiError> {
    let session = lookup_session(&state, &sid)?;
    let status = session.lock().expect("session poisoned").status();
    Ok(axum::Json(status).into_response())
}

async fn submit_quiz(
    State(state): State<AppState>,
    UrlPath(sid): UrlPath<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let session = lookup_session(&state, &sid)?;
    let sketch = parse_body(&body)?;
    let mut session = session.lock().expect("session poisoned");
    let Some(expected) = session.expected_label().map(String::from) else {
        return Err(ApiError::new(StatusCode::CONFLICT, QuizFlowError::AlreadyComplete.to_string()));
    };
    if sketch.label() != expected {
        let message = match session.labels.iter().position(|l| l == sketch.label()) {
            Some(i) if i < session.cursor => format!("`{}` was already submitted; quizzes only move forward", sketch.label()),
            Some(_) => format!("`{}` is out of order; expected `{expected}`", sketch.label()),
            None => format!("`{}` is not part of lesson {}; expected `{expected}`", sketch.label(), session.lesson_id),
        };
        return Err(ApiError::new(StatusCode::CONFLICT, message));
    }
    let template = state
        .store
        .lookup_template(&expected)
        .map_err(|e| ApiError::new(StatusCode::NOT_FOUND, e.to_string()))?;
    let report = assess_character(template, &sketch, None, &state.config)?;
    let index = session.cursor;
    session
        .record(report.clone())
        .map_err(|e| ApiError::new(StatusCode::CONFLICT, e.to_string()))?;
    state.persist(json!({
        "kind": "quiz-submit",
        "studentId": session.student_id,
        "sessionId": session.session_id,
        "index": index,
        "ink": sketch,
        "report": report,
    }));
    let body = format!(
        r#"{{"report":{},"cursor":{},"state":{},"next":{}}}"#,
        report.to_json(),
        session.cursor,
        serde_json::to_string(&session.state).expect("state serializes"),
        serde_json::to_string(&session.expected_label()).expect("label serializes"),
    );
    Ok(json_text(body))
}

async fn quiz_summary_handler(
    State(state): State<AppState>,
    UrlPath(sid): UrlPath<String>,
) -> Result<Response, ApiError> {
    let session = lookup_session(&state, &sid)?;
    let session = session.lock().expect("session poisoned");
    let summary = session
        .summary()
        .map_err(|e| ApiError::new(StatusCode::CONFLICT, e.to_string()))?;
    Ok(axum::Json(summary).into_response())
}
