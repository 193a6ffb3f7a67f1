//! HTTP front end: a websocket at `/ws` and a request/response endpoint at
//! `/api`, both speaking the same JSON messages.

use std::sync::Arc;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use parlor_core::gateway::{parse_client, ErrorCode, ServerMessage, SessionManager};

pub fn router(manager: Arc<SessionManager>) -> Router {
    Router::new()
        .route("/ws", get(ws_upgrade))
        .route("/api", post(api))
        .with_state(manager)
}

fn status(msg: &ServerMessage) -> StatusCode {
    match msg {
        ServerMessage::Error { code, .. } => match code {
            ErrorCode::Capacity => StatusCode::SERVICE_UNAVAILABLE,
            ErrorCode::Closed => StatusCode::CONFLICT,
            ErrorCode::BadRequest => StatusCode::BAD_REQUEST,
        },
        _ => StatusCode::OK,
    }
}

async fn api(State(manager): State<Arc<SessionManager>>, body: String) -> Response {
    let reply = match parse_client(&body) {
        Ok(msg) => manager.handle(msg, None),
        Err(e) => e,
    };
    (status(&reply), Json(reply)).into_response()
}

async fn ws_upgrade(State(manager): State<Arc<SessionManager>>, ws: WebSocketUpgrade) -> Response {
    ws.on_upgrade(move |socket| connection(manager, socket))
}

/// One connection serves one session at a time. Messages are handled in
/// arrival order, so each session's turns are serial. A dropped
/// connection closes its session.
async fn connection(manager: Arc<SessionManager>, mut socket: WebSocket) {
    let mut bound: Option<String> = None;
    while let Some(Ok(frame)) = socket.recv().await {
        let text = match frame {
            Message::Text(t) => t.to_string(),
            Message::Binary(b) => String::from_utf8_lossy(&b).into_owned(),
            Message::Close(_) => break,
            Message::Ping(_) | Message::Pong(_) => continue,
        };
        let reply = match parse_client(&text) {
            Ok(msg) => manager.handle(msg, bound.as_deref()),
            Err(e) => e,
        };
        if let ServerMessage::SessionOpened { session_id, .. } = &reply {
            bound = Some(session_id.clone());
        }
        let json = serde_json::to_string(&reply).expect("server messages serialize");
        if socket.send(Message::Text(json.into())).await.is_err() {
            break;
        }
    }
    if let Some(id) = bound {
        let _ = manager.close(&id);
    }
}
