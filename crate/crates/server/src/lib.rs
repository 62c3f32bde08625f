//! HTTP and WebSocket front end over a [`SessionRegistry`].
//!
//! | route                 | purpose                                     |
//! |-----------------------|---------------------------------------------|
//! | `POST /session`       | create a session, returns its id + greeting |
//! | `GET /spots`          | catalog summary                             |
//! | `GET /session/{id}`   | WebSocket carrying JSON client/server messages |
//! | `GET /metrics/{id}`   | per-session metrics                         |

use std::sync::Arc;
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use persona_dialog::service::{
    CreateSessionRequest, CreateSessionResponse, ErrorCode, ServiceError, SessionMetrics,
    SessionRegistry, SpotSummary, TransportBinding,
};
use tokio::net::TcpListener;
use tokio::task::JoinHandle;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ServerOptions {
    /// How often a connected socket checks for a pending estimate.
    pub tick_interval: Duration,
    /// How often idle sessions are swept.
    pub sweep_interval: Duration,
}

impl Default for ServerOptions {
    fn default() -> Self {
        Self {
            tick_interval: Duration::from_millis(50),
            sweep_interval: Duration::from_secs(1),
        }
    }
}

#[derive(Debug, Clone)]
struct AppState {
    registry: Arc<SessionRegistry>,
    options: ServerOptions,
}

struct ApiError(ServiceError);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match self.0.code() {
            ErrorCode::NotFound => StatusCode::NOT_FOUND,
            ErrorCode::Gone => StatusCode::GONE,
            ErrorCode::Protocol => StatusCode::BAD_REQUEST,
            ErrorCode::Invalid => StatusCode::UNPROCESSABLE_ENTITY,
            ErrorCode::Conflict => StatusCode::CONFLICT,
        };
        (status, Json(self.0.to_message())).into_response()
    }
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        ApiError(e)
    }
}

pub fn router(registry: Arc<SessionRegistry>, options: ServerOptions) -> Router {
    Router::new()
        .route("/session", post(create_session))
        .route("/session/{id}", get(connect))
        .route("/spots", get(spots))
        .route("/metrics/{id}", get(metrics))
        .with_state(AppState { registry, options })
}

/// Serves until the listener fails, sweeping idle sessions alongside.
pub async fn serve(
    listener: TcpListener,
    registry: Arc<SessionRegistry>,
    options: ServerOptions,
) -> std::io::Result<()> {
    let sweeper = spawn_sweeper(Arc::clone(&registry), options.sweep_interval);
    let result = axum::serve(listener, router(registry, options)).await;
    sweeper.abort();
    result
}

pub fn spawn_sweeper(registry: Arc<SessionRegistry>, every: Duration) -> JoinHandle<()> {
    tokio::spawn(async move {
        let mut interval = tokio::time::interval(every);
        loop {
            interval.tick().await;
            for id in registry.expire_idle() {
                tracing::info!(%id, "session expired");
            }
        }
    })
}

async fn create_session(
    State(app): State<AppState>,
    body: Result<Json<CreateSessionRequest>, axum::extract::rejection::JsonRejection>,
) -> Result<(StatusCode, Json<CreateSessionResponse>), ApiError> {
    let Json(request) = body.map_err(|e| ServiceError::Protocol(e.body_text()))?;
    let (id, messages) = app.registry.create_session(&request)?;
    tracing::info!(%id, mode = ?request.mode, "session created");
    Ok((
        StatusCode::CREATED,
        Json(CreateSessionResponse {
            session_id: id.to_string(),
            messages,
        }),
    ))
}

async fn spots(State(app): State<AppState>) -> Json<Vec<SpotSummary>> {
    Json(
        app.registry
            .engine()
            .catalog()
            .spots()
            .iter()
            .map(SpotSummary::from)
            .collect(),
    )
}

async fn metrics(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<SessionMetrics>, ApiError> {
    let id = SessionRegistry::parse_id(&id)?;
    Ok(Json(app.registry.metrics(id)?))
}

async fn connect(
    State(app): State<AppState>,
    Path(id): Path<String>,
    ws: WebSocketUpgrade,
) -> Result<Response, ApiError> {
    let id = SessionRegistry::parse_id(&id)?;
    // Claim the transport before upgrading so a second socket is refused
    // with a plain HTTP status.
    let binding = app.registry.bind(id)?;
    Ok(ws.on_upgrade(move |socket| run_socket(socket, app, binding)))
}

async fn run_socket(mut socket: WebSocket, app: AppState, binding: TransportBinding) {
    let id = binding.id();
    let mut ticker = tokio::time::interval(app.options.tick_interval);
    loop {
        let (replies, done) = tokio::select! {
            incoming = socket.recv() => match incoming {
                Some(Ok(Message::Text(text))) => (app.registry.dispatch_json(id, text.as_str()), false),
                Some(Ok(Message::Binary(_))) => (
                    vec![ServiceError::Protocol("messages must be JSON text".into()).to_message()],
                    false,
                ),
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                Some(Ok(_)) => continue,
            },
            // A tick only fails once the session has left the registry.
            _ = ticker.tick() => match app.registry.tick(id) {
                Ok(replies) => (replies, false),
                Err(e) => (vec![e.to_message()], true),
            },
        };
        for m in replies {
            if socket.send(Message::Text(m.to_json().into())).await.is_err() {
                return;
            }
        }
        if done {
            let _ = socket.send(Message::Close(None)).await;
            break;
        }
    }
    drop(binding);
}
