//! HTTP service for the frame-annotation workflow: a queue of sampled verbs,
//! clause previews for candidate frames, and a frames file that is rewritten
//! atomically on every save.

mod session;

use std::net::SocketAddr;
use std::sync::{Arc, RwLock};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use clausemorph::featkit::Tag;
use clausemorph::grammar::realize_clause;
use clausemorph::lexicon::{Frame, FrameAnnotation};
use clausemorph::paradigm::enumerate_bundles;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use session::{Entry, Session, SessionError, Status};

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("session not initialized")]
    Unavailable,
    #[error("unknown lexeme `{0}`")]
    NotFound(String),
    #[error("{0}")]
    Unprocessable(String),
    #[error("{0}")]
    Conflict(String),
    #[error("{0}")]
    Internal(String),
}

#[derive(Serialize)]
struct ErrorBody {
    error: String,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match self {
            ApiError::Unavailable => StatusCode::SERVICE_UNAVAILABLE,
            ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::Unprocessable(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::Conflict(_) => StatusCode::CONFLICT,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        if status == StatusCode::INTERNAL_SERVER_ERROR {
            log::error!("{self}");
        }
        (status, Json(ErrorBody { error: self.to_string() })).into_response()
    }
}

/// Shared service state. Requests get 503 until a session is installed.
#[derive(Default)]
pub struct AppState {
    session: RwLock<Option<Session>>,
}

impl AppState {
    pub fn uninitialized() -> Arc<AppState> {
        Arc::new(AppState::default())
    }

    pub fn with_session(session: Session) -> Arc<AppState> {
        let state = AppState::uninitialized();
        state.initialize(session);
        state
    }

    pub fn initialize(&self, session: Session) {
        *self.session.write().unwrap_or_else(|e| e.into_inner()) = Some(session);
    }

    fn read<T>(&self, f: impl FnOnce(&Session) -> Result<T, ApiError>) -> Result<T, ApiError> {
        let guard = self.session.read().unwrap_or_else(|e| e.into_inner());
        f(guard.as_ref().ok_or(ApiError::Unavailable)?)
    }

    fn write<T>(&self, f: impl FnOnce(&mut Session) -> Result<T, ApiError>) -> Result<T, ApiError> {
        let mut guard = self.session.write().unwrap_or_else(|e| e.into_inner());
        f(guard.as_mut().ok_or(ApiError::Unavailable)?)
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct LexemeView {
    pub lemma: String,
    pub status: Status,
    pub revision: u64,
    pub frames: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct LexemeList {
    pub language: String,
    pub lexemes: Vec<LexemeView>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PreviewRequest {
    pub frame: Vec<String>,
    pub sample: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PreviewCell {
    pub bundle: String,
    pub clause: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PreviewResponse {
    pub lemma: String,
    pub frame: String,
    /// Cells in the frame's full table.
    pub table_size: usize,
    pub cells: Vec<PreviewCell>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FramesRequest {
    pub frames: Vec<Vec<String>>,
    /// Revision the client last saw; a stale value is rejected with 409.
    #[serde(default)]
    pub revision: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Progress {
    pub total: usize,
    pub pending: usize,
    pub annotated: usize,
    pub skipped: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Inventory {
    pub language: String,
    /// Cases the grammar can realize, in inventory order.
    pub cases: Vec<String>,
    pub agreement: String,
}

fn view(session: &Session, lemma: &str) -> LexemeView {
    let entry = session.entry(lemma).expect("queued lemma has an entry");
    LexemeView {
        lemma: lemma.to_owned(),
        status: entry.status,
        revision: entry.revision,
        frames: session
            .frames(lemma)
            .map(|a| a.frames.iter().map(Frame::to_string).collect())
            .unwrap_or_default(),
    }
}

fn parse_frame(session: &Session, cases: &[String]) -> Result<Frame, ApiError> {
    let inv = &session.spec.inventory;
    let tags: Vec<Tag> = cases.iter().map(|c| Tag::new(&c.trim().to_uppercase())).collect();
    let frame = Frame::new(tags, inv).map_err(ApiError::Unprocessable)?;
    if let Some(c) = frame.cases().iter().find(|c| !session.spec.supports_case(**c)) {
        return Err(ApiError::Unprocessable(format!(
            "case {c} is not realizable in {}",
            session.language()
        )));
    }
    Ok(frame)
}

fn check_lemma(session: &Session, lemma: &str) -> Result<(), ApiError> {
    match session.entry(lemma) {
        Some(_) => Ok(()),
        None => Err(ApiError::NotFound(lemma.to_owned())),
    }
}

async fn list_lexemes(State(state): State<Arc<AppState>>) -> Result<Json<LexemeList>, ApiError> {
    state.read(|s| {
        Ok(Json(LexemeList {
            language: s.language().to_owned(),
            lexemes: s.queue().iter().map(|l| view(s, l)).collect(),
        }))
    })
}

async fn preview(
    State(state): State<Arc<AppState>>,
    Path(lemma): Path<String>,
    Json(req): Json<PreviewRequest>,
) -> Result<Json<PreviewResponse>, ApiError> {
    state.read(|s| {
        check_lemma(s, &lemma)?;
        let frame = parse_frame(s, &req.frame)?;
        let bundles = enumerate_bundles(&s.spec, &frame).map_err(|e| ApiError::Unprocessable(e.to_string()))?;
        let wt = &s.entry(&lemma).expect("checked above").word_table;
        let mut cells = Vec::with_capacity(req.sample.min(bundles.len()));
        for b in bundles.iter().take(req.sample) {
            let clause = realize_clause(&s.spec, wt, &frame, b)
                .map_err(|e| ApiError::Unprocessable(format!("cell {b}: {e}")))?;
            cells.push(PreviewCell {
                bundle: b.serialize(),
                clause,
            });
        }
        Ok(Json(PreviewResponse {
            lemma: lemma.clone(),
            frame: frame.to_string(),
            table_size: bundles.len(),
            cells,
        }))
    })
}

async fn put_frames(
    State(state): State<Arc<AppState>>,
    Path(lemma): Path<String>,
    Json(req): Json<FramesRequest>,
) -> Result<Json<LexemeView>, ApiError> {
    state.write(|s| {
        check_lemma(s, &lemma)?;
        let current = s.entry(&lemma).expect("checked above").revision;
        if let Some(seen) = req.revision {
            if seen != current {
                return Err(ApiError::Conflict(format!(
                    "`{lemma}` is at revision {current}, request was based on {seen}"
                )));
            }
        }
        let frames = req
            .frames
            .iter()
            .map(|f| parse_frame(s, f))
            .collect::<Result<Vec<_>, _>>()?;
        let annotation = FrameAnnotation::new(lemma.clone(), frames).map_err(ApiError::Unprocessable)?;
        for f in &annotation.frames {
            enumerate_bundles(&s.spec, f).map_err(|e| ApiError::Unprocessable(format!("frame {f}: {e}")))?;
        }
        s.annotate(annotation).map_err(|e| ApiError::Internal(e.to_string()))?;
        Ok(Json(view(s, &lemma)))
    })
}

async fn skip(State(state): State<Arc<AppState>>, Path(lemma): Path<String>) -> Result<Json<LexemeView>, ApiError> {
    state.write(|s| {
        check_lemma(s, &lemma)?;
        if s.entry(&lemma).expect("checked above").status == Status::Annotated {
            return Err(ApiError::Conflict(format!("`{lemma}` is already annotated")));
        }
        s.skip(&lemma);
        Ok(Json(view(s, &lemma)))
    })
}

async fn progress(State(state): State<Arc<AppState>>) -> Result<Json<Progress>, ApiError> {
    state.read(|s| {
        Ok(Json(Progress {
            total: s.queue().len(),
            pending: s.count(Status::Pending),
            annotated: s.count(Status::Annotated),
            skipped: s.count(Status::Skipped),
        }))
    })
}

async fn inventory(State(state): State<Arc<AppState>>) -> Result<Json<Inventory>, ApiError> {
    state.read(|s| {
        Ok(Json(Inventory {
            language: s.language().to_owned(),
            cases: s
                .spec
                .inventory
                .cases()
                .iter()
                .filter(|c| s.spec.supports_case(**c))
                .map(Tag::to_string)
                .collect(),
            agreement: s.spec.agreement.to_string(),
        }))
    })
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/lexemes", get(list_lexemes))
        .route("/lexemes/{lemma}/preview", post(preview))
        .route("/lexemes/{lemma}/frames", put(put_frames))
        .route("/lexemes/{lemma}/skip", post(skip))
        .route("/progress", get(progress))
        .route("/inventory", get(inventory))
        .with_state(state)
}

/// Serves `state` on `addr` until the process ends.
pub async fn serve(state: Arc<AppState>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("annotation service listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}
