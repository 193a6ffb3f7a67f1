//! Session lifecycle, the chat wire protocol, and transcript replay.

pub mod replay;
pub mod session;
pub mod wire;

pub use session::{GatewayError, Session, SessionManager, DEFAULT_ASR_CONFIDENCE, DEFAULT_MAX_SESSIONS};
pub use wire::{parse_client, ClientMessage, ErrorCode, ServerMessage};
