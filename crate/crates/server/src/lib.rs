//! HTTP API over task sessions. Every acknowledged command has been written
//! and synced to the session's log file before the response is sent.

use std::collections::HashMap;
use std::future::Future;
use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use pbt_core::{Canvas, PatternCorpus};
use pbt_session::{
    write_log, Clock, Mode, Session, SessionError, SessionState, SessionStore, StoreError,
    SystemClock,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::net::TcpListener;
use tokio::sync::RwLock;

type SessionCell = Arc<RwLock<Session>>;

pub struct AppState {
    corpus: Option<Arc<PatternCorpus>>,
    store: SessionStore,
    clock: Arc<dyn Clock>,
    sessions: RwLock<HashMap<String, SessionCell>>,
}

impl AppState {
    /// Opens the store and replays any sessions already in it.
    pub fn open(
        corpus: Option<Arc<PatternCorpus>>,
        store: SessionStore,
    ) -> Result<Self, StoreError> {
        AppState::with_clock(corpus, store, Arc::new(SystemClock))
    }

    pub fn with_clock(
        corpus: Option<Arc<PatternCorpus>>,
        store: SessionStore,
        clock: Arc<dyn Clock>,
    ) -> Result<Self, StoreError> {
        let sessions = store
            .load_all(corpus.clone())?
            .into_iter()
            .map(|s| (s.id().to_string(), Arc::new(RwLock::new(s))))
            .collect();
        Ok(AppState {
            corpus,
            store,
            clock,
            sessions: RwLock::new(sessions),
        })
    }

    pub async fn session_count(&self) -> usize {
        self.sessions.read().await.len()
    }

    async fn cell(&self, id: &str) -> Result<SessionCell, ApiError> {
        self.sessions
            .read()
            .await
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(id.to_string()))
    }

    /// Runs `command` on a copy of the session, persists the new events,
    /// then publishes the copy. Requests on one session are serialized by
    /// its write lock.
    async fn mutate<T>(
        &self,
        id: &str,
        command: impl FnOnce(&mut Session, &dyn Clock) -> Result<T, SessionError>,
    ) -> Result<(T, SessionState), ApiError> {
        let cell = self.cell(id).await?;
        let mut guard = cell.write().await;
        let mut draft = guard.clone();
        let before = draft.events().len();
        let out = command(&mut draft, self.clock.as_ref())?;
        self.store.append(&draft.events()[before..])?;
        *guard = draft;
        Ok((out, guard.state().clone()))
    }
}

#[derive(Debug)]
enum ApiError {
    NotFound(String),
    Session(SessionError),
    Store(StoreError),
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        ApiError::Session(e)
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        ApiError::Store(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, message) = match self {
            ApiError::NotFound(id) => (StatusCode::NOT_FOUND, format!("unknown session `{id}`")),
            ApiError::Session(e @ SessionError::Complete) => (StatusCode::CONFLICT, e.to_string()),
            ApiError::Session(e @ SessionError::NoCorpus) => {
                (StatusCode::SERVICE_UNAVAILABLE, e.to_string())
            }
            ApiError::Session(e) => (StatusCode::UNPROCESSABLE_ENTITY, e.to_string()),
            ApiError::Store(e) => {
                tracing::error!("session store: {e}");
                (
                    StatusCode::INTERNAL_SERVER_ERROR,
                    "could not persist the session log".to_string(),
                )
            }
        };
        (status, Json(json!({ "error": message }))).into_response()
    }
}

#[derive(Debug, Serialize)]
struct CanvasView {
    name: Option<String>,
    canvas: String,
}

#[derive(Debug, Serialize)]
struct StepView {
    index: usize,
    program: String,
    canvas: String,
}

fn text(c: Canvas) -> String {
    c.to_text()
}

/// The JSON snapshot clients render from. Canvases are 10-line text.
pub fn state_json(st: &SessionState, n_trials: Option<usize>) -> Value {
    json!({
        "session_id": st.session_id,
        "mode": st.mode,
        "trial_index": st.trial_index,
        "trial_id": st.trial_id,
        "n_trials": n_trials,
        "target": st.target.map(text),
        "steps": st.steps.iter().map(|s| StepView {
            index: s.index,
            program: s.program.to_string(),
            canvas: text(s.canvas),
        }).collect::<Vec<_>>(),
        "helpers": st.helpers.helpers().iter().map(|h| CanvasView {
            name: Some(h.name.clone()),
            canvas: text(h.canvas),
        }).collect::<Vec<_>>(),
        "points": st.points,
        "gallery": st.gallery.iter().map(|g| CanvasView {
            name: g.name.clone(),
            canvas: text(g.canvas),
        }).collect::<Vec<_>>(),
        "complete": st.complete,
        "created_at": st.created_at,
    })
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}", get(get_session))
        .route("/api/sessions/{id}/steps", post(add_step))
        .route("/api/sessions/{id}/helpers", post(save_helper))
        .route("/api/sessions/{id}/helpers/{name}", delete(remove_helper))
        .route("/api/sessions/{id}/submit", post(submit))
        .route("/api/sessions/{id}/gallery", post(submit_gallery))
        .route("/api/sessions/{id}/log", get(export_log))
        .with_state(state)
}

/// Serves until `shutdown` resolves, then finishes in-flight requests.
pub async fn serve(
    listener: TcpListener,
    state: Arc<AppState>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await
}

#[derive(Deserialize)]
struct CreateBody {
    mode: Mode,
}

#[derive(Deserialize)]
struct StepBody {
    program: String,
}

#[derive(Deserialize)]
struct HelperBody {
    step: usize,
    #[serde(default)]
    name: Option<String>,
}

#[derive(Deserialize, Default)]
struct GalleryBody {
    #[serde(default)]
    name: Option<String>,
}

fn n_trials(app: &AppState, st: &SessionState) -> Option<usize> {
    (st.mode == Mode::Task).then(|| app.corpus.as_ref().map_or(0, |c| c.len()))
}

async fn create_session(
    State(app): State<Arc<AppState>>,
    Json(body): Json<CreateBody>,
) -> Result<(StatusCode, Json<Value>), ApiError> {
    let session = Session::create(body.mode, app.corpus.clone(), app.clock.as_ref())?;
    app.store.append(session.events())?;
    let id = session.id().to_string();
    let view = state_json(session.state(), n_trials(&app, session.state()));
    app.sessions
        .write()
        .await
        .insert(id.clone(), Arc::new(RwLock::new(session)));
    tracing::info!(session = %id, mode = ?body.mode, "session created");
    Ok((
        StatusCode::CREATED,
        Json(json!({ "session_id": id, "state": view })),
    ))
}

async fn get_session(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Json<Value>, ApiError> {
    let cell = app.cell(&id).await?;
    let guard = cell.read().await;
    Ok(Json(state_json(
        guard.state(),
        n_trials(&app, guard.state()),
    )))
}

async fn add_step(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(body): Json<StepBody>,
) -> Result<Json<Value>, ApiError> {
    let ((index, canvas), _) = app.mutate(&id, |s, c| s.add_step(&body.program, c)).await?;
    Ok(Json(json!({ "index": index, "canvas": text(canvas) })))
}

async fn save_helper(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(body): Json<HelperBody>,
) -> Result<Json<Value>, ApiError> {
    let (name, _) = app
        .mutate(&id, |s, c| {
            s.save_helper(body.step, body.name.as_deref(), c)
        })
        .await?;
    Ok(Json(json!({ "name": name })))
}

async fn remove_helper(
    State(app): State<Arc<AppState>>,
    Path((id, name)): Path<(String, String)>,
) -> Result<Json<Value>, ApiError> {
    app.mutate(&id, |s, c| s.remove_helper(&name, c)).await?;
    Ok(Json(json!({})))
}

async fn submit(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Json<Value>, ApiError> {
    let (out, _) = app.mutate(&id, |s, c| s.submit(c)).await?;
    Ok(Json(json!({
        "accuracy": out.accuracy,
        "points": out.points,
        "next_trial": out.next_trial,
        "complete": out.complete,
    })))
}

async fn submit_gallery(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Option<Json<GalleryBody>>,
) -> Result<Json<Value>, ApiError> {
    let body = body.map(|Json(b)| b).unwrap_or_default();
    let (entry, _) = app
        .mutate(&id, |s, c| s.submit_gallery(body.name.as_deref(), c))
        .await?;
    Ok(Json(
        json!({ "name": entry.name, "canvas": text(entry.canvas) }),
    ))
}

async fn export_log(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<impl IntoResponse, ApiError> {
    let cell = app.cell(&id).await?;
    let log = write_log(cell.read().await.events());
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], log))
}

/// Resolves on ctrl-c or, on Unix, SIGTERM.
pub async fn shutdown_signal() {
    let ctrl_c = async {
        if let Err(e) = tokio::signal::ctrl_c().await {
            tracing::error!("ctrl-c handler: {e}");
            std::future::pending::<()>().await;
        }
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(e) => {
                tracing::error!("SIGTERM handler: {e}");
                std::future::pending::<()>().await;
            }
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = term => {}
    }
    tracing::info!("shutting down");
}
