//! Chat wire protocol: JSON objects tagged by `kind`.

use serde::{Deserialize, Serialize};

use crate::activity::{Expects, Signature};
use crate::dialogue::SystemTurn;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClientMessage {
    UserTurn {
        session_id: String,
        /// Missing text is answered with a `bad_request` error.
        #[serde(default)]
        text: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        asr_confidence: Option<f64>,
    },
    Rate {
        session_id: String,
        rating: i64,
    },
    Open,
    /// Over a persistent connection the session may be implied.
    Close {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        session_id: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    Capacity,
    Closed,
    BadRequest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ServerMessage {
    SystemTurn {
        session_id: String,
        text: String,
        signature: Signature,
        expects: Expects,
        elapsed_ms: f64,
    },
    SessionOpened {
        session_id: String,
        greeting: String,
    },
    Error {
        code: ErrorCode,
        detail: String,
    },
    /// Acknowledges a rating or a close.
    Ack {
        session_id: String,
    },
}

impl ServerMessage {
    pub fn system_turn(session_id: &str, turn: &SystemTurn) -> Self {
        ServerMessage::SystemTurn {
            session_id: session_id.to_string(),
            text: turn.text.clone(),
            signature: turn.signature.clone(),
            expects: turn.expects,
            elapsed_ms: turn.elapsed_ms,
        }
    }

    pub fn error(code: ErrorCode, detail: impl Into<String>) -> Self {
        ServerMessage::Error {
            code,
            detail: detail.into(),
        }
    }
}

/// Parses a client message; anything unparseable is a `bad_request`.
pub fn parse_client(src: &str) -> Result<ClientMessage, ServerMessage> {
    serde_json::from_str(src).map_err(|e| ServerMessage::error(ErrorCode::BadRequest, e.to_string()))
}
