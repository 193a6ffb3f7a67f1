//! Session lifecycle over a shared engine.
//!
//! The engine is shared immutably; each session owns its dialogue context
//! behind its own lock, so one session's turns are processed serially while
//! different sessions proceed in parallel.

use std::collections::{HashMap, HashSet};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use chrono::{DateTime, Utc};
use thiserror::Error;

use crate::dialogue::{DialogueContext, Engine, SystemTurn};
use crate::gateway::wire::{ClientMessage, ErrorCode, ServerMessage};
use crate::nlu::UserUtterance;
use crate::telemetry::{LogRecord, LogSink, NullSink, RatingRecord, TurnLogRecord};

pub const DEFAULT_MAX_SESSIONS: usize = 256;

/// Confidence assumed when a client sends none.
pub const DEFAULT_ASR_CONFIDENCE: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GatewayError {
    #[error("session limit of {0} reached")]
    Capacity(usize),
    #[error("session {0} is closed")]
    Closed(String),
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error("{0}")]
    BadRequest(String),
}

impl GatewayError {
    pub fn code(&self) -> ErrorCode {
        match self {
            GatewayError::Capacity(_) => ErrorCode::Capacity,
            GatewayError::Closed(_) => ErrorCode::Closed,
            GatewayError::UnknownSession(_) | GatewayError::BadRequest(_) => ErrorCode::BadRequest,
        }
    }

    pub fn to_message(&self) -> ServerMessage {
        ServerMessage::error(self.code(), self.to_string())
    }
}

pub struct Session {
    pub id: String,
    pub ctx: DialogueContext,
    pub open: bool,
    pub rated: bool,
    pub created_at: DateTime<Utc>,
    next_index: u64,
}

pub struct SessionManager {
    engine: Arc<Engine>,
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
    /// Ids of sessions that were closed and rated and then dropped.
    retired: Mutex<HashSet<String>>,
    next_id: AtomicU64,
    max_sessions: usize,
    sink: Arc<dyn LogSink>,
    log_failures: AtomicU64,
}

fn now_ms() -> i64 {
    Utc::now().timestamp_millis()
}

impl SessionManager {
    pub fn new(engine: Arc<Engine>, max_sessions: usize) -> Self {
        SessionManager {
            engine,
            sessions: Mutex::new(HashMap::new()),
            retired: Mutex::new(HashSet::new()),
            next_id: AtomicU64::new(1),
            max_sessions,
            sink: Arc::new(NullSink),
            log_failures: AtomicU64::new(0),
        }
    }

    pub fn with_sink(mut self, sink: Arc<dyn LogSink>) -> Self {
        self.sink = sink;
        self
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    /// Records that could not be written; logging never fails a turn.
    pub fn log_failures(&self) -> u64 {
        self.log_failures.load(Ordering::Relaxed)
    }

    pub fn open_sessions(&self) -> usize {
        let map = self.sessions.lock().expect("session map lock");
        map.values().filter(|s| s.lock().expect("session lock").open).count()
    }

    fn log(&self, rec: LogRecord) {
        if self.sink.append(&rec).is_err() {
            self.log_failures.fetch_add(1, Ordering::Relaxed);
        }
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, GatewayError> {
        self.sessions
            .lock()
            .expect("session map lock")
            .get(id)
            .cloned()
            .ok_or_else(|| {
                if self.retired.lock().expect("retired lock").contains(id) {
                    GatewayError::Closed(id.to_string())
                } else {
                    GatewayError::UnknownSession(id.to_string())
                }
            })
    }

    fn retire(&self, id: &str) {
        self.retired.lock().expect("retired lock").insert(id.to_string());
        self.sessions.lock().expect("session map lock").remove(id);
    }

    /// Opens a session and produces its greeting.
    pub fn open(&self) -> Result<(String, SystemTurn), GatewayError> {
        let mut map = self.sessions.lock().expect("session map lock");
        let open = map.values().filter(|s| s.lock().expect("session lock").open).count();
        if open >= self.max_sessions {
            return Err(GatewayError::Capacity(self.max_sessions));
        }
        let id = format!("s{:06}", self.next_id.fetch_add(1, Ordering::Relaxed));
        let mut ctx = DialogueContext::new(&id);
        let greeting = self.engine.greet(&mut ctx);
        self.log(LogRecord::Turn(TurnLogRecord::system(&id, 0, &greeting, now_ms())));
        let session = Session {
            id: id.clone(),
            ctx,
            open: true,
            rated: false,
            created_at: Utc::now(),
            next_index: 1,
        };
        map.insert(id.clone(), Arc::new(Mutex::new(session)));
        Ok((id, greeting))
    }

    /// Answers one user turn. `elapsed_ms` is measured here, around the
    /// engine call.
    pub fn user_turn(&self, id: &str, text: &str, asr_confidence: Option<f64>) -> Result<SystemTurn, GatewayError> {
        let utt = UserUtterance::new(text, asr_confidence.unwrap_or(DEFAULT_ASR_CONFIDENCE))
            .map_err(|e| GatewayError::BadRequest(e.to_string()))?;
        let handle = self.session(id)?;
        let mut s = handle.lock().expect("session lock");
        if !s.open {
            return Err(GatewayError::Closed(id.to_string()));
        }
        let received = now_ms();
        let start = Instant::now();
        let (nlu, mut turn) = self.engine.respond(&mut s.ctx, &utt);
        turn.elapsed_ms = start.elapsed().as_secs_f64() * 1000.0;
        let i = s.next_index;
        s.next_index += 2;
        self.log(LogRecord::Turn(TurnLogRecord::user(id, i, &utt, &nlu, received)));
        self.log(LogRecord::Turn(TurnLogRecord::system(id, i + 1, &turn, now_ms())));
        Ok(turn)
    }

    /// Records the session's 1–5 rating; allowed once, before or after close.
    pub fn rate(&self, id: &str, rating: i64) -> Result<(), GatewayError> {
        let rating = u8::try_from(rating)
            .ok()
            .filter(|r| (1..=5).contains(r))
            .ok_or_else(|| GatewayError::BadRequest(format!("rating {rating} outside 1..=5")))?;
        let handle = self.session(id)?;
        let mut s = handle.lock().expect("session lock");
        if s.rated {
            return Err(GatewayError::BadRequest(format!("session {id} is already rated")));
        }
        s.rated = true;
        let record = RatingRecord::new(id, rating).map_err(|e| GatewayError::BadRequest(e.to_string()))?;
        self.log(LogRecord::Rating(record));
        if !s.open {
            drop(s);
            self.retire(id);
        }
        Ok(())
    }

    /// Closes the session. It stays known until rated, so a rating can follow.
    pub fn close(&self, id: &str) -> Result<(), GatewayError> {
        let handle = self.session(id)?;
        let mut s = handle.lock().expect("session lock");
        if !s.open {
            return Err(GatewayError::Closed(id.to_string()));
        }
        s.open = false;
        if s.rated {
            drop(s);
            self.retire(id);
        }
        Ok(())
    }

    /// Dispatches a wire message. `implied` is the session bound to the
    /// connection, used when a close names none.
    pub fn handle(&self, msg: ClientMessage, implied: Option<&str>) -> ServerMessage {
        let result = match msg {
            ClientMessage::Open => self.open().map(|(session_id, greeting)| ServerMessage::SessionOpened {
                session_id,
                greeting: greeting.text,
            }),
            ClientMessage::UserTurn {
                session_id,
                text,
                asr_confidence,
            } => match text {
                None => Err(GatewayError::BadRequest("user_turn without text".into())),
                Some(text) => self
                    .user_turn(&session_id, &text, asr_confidence)
                    .map(|t| ServerMessage::system_turn(&session_id, &t)),
            },
            ClientMessage::Rate { session_id, rating } => self.rate(&session_id, rating).map(|()| ServerMessage::Ack { session_id }),
            ClientMessage::Close { session_id } => match session_id.or(implied.map(str::to_string)) {
                None => Err(GatewayError::BadRequest("close without session".into())),
                Some(session_id) => self.close(&session_id).map(|()| ServerMessage::Ack { session_id }),
            },
        };
        result.unwrap_or_else(|e| e.to_message())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activity::Activity;
    use crate::dialogue::EngineConfig;
    use crate::telemetry::{ConversationLog, MemorySink};

    fn manager(max: usize) -> (SessionManager, Arc<MemorySink>) {
        let sink = Arc::new(MemorySink::default());
        let m = SessionManager::new(Arc::new(Engine::bundled(EngineConfig::default())), max).with_sink(sink.clone());
        (m, sink)
    }

    #[test]
    fn greeting_introduces_and_suggests_three_topics() {
        let (m, _) = manager(4);
        let (id, g) = m.open().unwrap();
        assert!(g.text.contains("I can talk to you about things you are interested in"));
        let suggestions = g.text.split("Such as ").nth(1).unwrap();
        assert_eq!(suggestions.split([',']).count(), 3, "{}", g.text);
        let (id2, _) = m.open().unwrap();
        assert_ne!(id, id2);
    }

    #[test]
    fn capacity_is_enforced_and_freed_by_close() {
        let (m, _) = manager(1);
        let (id, _) = m.open().unwrap();
        assert_eq!(m.open().unwrap_err().code(), ErrorCode::Capacity);
        m.close(&id).unwrap();
        assert!(m.open().is_ok());
    }

    #[test]
    fn closed_sessions_reject_turns_but_take_a_rating() {
        let (m, sink) = manager(4);
        let (id, _) = m.open().unwrap();
        m.user_turn(&id, "dinosaurs", None).unwrap();
        m.close(&id).unwrap();
        assert_eq!(m.user_turn(&id, "yes", None).unwrap_err(), GatewayError::Closed(id.clone()));
        assert!(matches!(m.rate(&id, 9), Err(GatewayError::BadRequest(_))));
        m.rate(&id, 4).unwrap();
        assert!(m.rate(&id, 5).is_err());
        assert_eq!(m.user_turn(&id, "yes", None).unwrap_err(), GatewayError::Closed(id.clone()));
        assert_eq!(m.user_turn("s999999", "yes", None).unwrap_err().code(), ErrorCode::BadRequest);
        let log = ConversationLog::from_records(sink.records()).unwrap();
        assert_eq!(log.turns.len(), 3);
        assert_eq!(log.ratings, vec![RatingRecord::new(id, 4).unwrap()]);
    }

    #[test]
    fn yes_after_a_trivia_offer_gives_more_trivia() {
        let (m, _) = manager(4);
        let (id, _) = m.open().unwrap();
        let first = m.user_turn(&id, "history", None).unwrap();
        assert_eq!(first.signature.activity, Activity::Chitchat);
        assert!(first.text.contains("Want to hear some more trivia?"), "{}", first.text);
        let next = m.user_turn(&id, "yes", None).unwrap();
        assert_eq!(next.signature.activity, Activity::Chitchat);
        assert_ne!(next.signature.source_id, first.signature.source_id);
        assert!(next.elapsed_ms >= 0.0);
    }

    #[test]
    fn thousand_sequential_wire_turns_are_non_empty() {
        let (m, _) = manager(1);
        let ServerMessage::SessionOpened { session_id, .. } = m.handle(ClientMessage::Open, None) else {
            panic!("expected session_opened")
        };
        let lines = ["yes", "no", "dinosaurs", "let's play a game", "tell me a story", "who is neil armstrong", "stop", "hmm"];
        for i in 0..1000 {
            let msg = ClientMessage::UserTurn {
                session_id: session_id.clone(),
                text: Some(lines[(i * 7 + i / 3) % lines.len()].into()),
                asr_confidence: Some(if i % 11 == 0 { 0.2 } else { 0.9 }),
            };
            match m.handle(msg, None) {
                ServerMessage::SystemTurn { text, elapsed_ms, .. } => {
                    assert!(!text.trim().is_empty(), "turn {i}");
                    assert!(elapsed_ms >= 0.0);
                }
                other => panic!("turn {i}: {other:?}"),
            }
        }
    }

    #[test]
    fn wire_dispatch() {
        let (m, _) = manager(4);
        let ServerMessage::SessionOpened { session_id, .. } = m.handle(ClientMessage::Open, None) else {
            panic!("expected session_opened")
        };
        let missing = m.handle(
            ClientMessage::UserTurn {
                session_id: session_id.clone(),
                text: None,
                asr_confidence: None,
            },
            None,
        );
        assert!(matches!(missing, ServerMessage::Error { code: ErrorCode::BadRequest, .. }));
        let bad_conf = m.handle(
            ClientMessage::UserTurn {
                session_id: session_id.clone(),
                text: Some("hi".into()),
                asr_confidence: Some(3.0),
            },
            None,
        );
        assert!(matches!(bad_conf, ServerMessage::Error { code: ErrorCode::BadRequest, .. }));
        let close = m.handle(ClientMessage::Close { session_id: None }, Some(&session_id));
        assert_eq!(close, ServerMessage::Ack { session_id: session_id.clone() });
        let after = m.handle(
            ClientMessage::UserTurn {
                session_id,
                text: Some("hi".into()),
                asr_confidence: None,
            },
            None,
        );
        assert!(matches!(after, ServerMessage::Error { code: ErrorCode::Closed, .. }));
    }

    #[test]
    fn concurrent_sessions_stay_isolated_and_alternating() {
        let (m, sink) = manager(64);
        let m = Arc::new(m);
        let handles: Vec<_> = (0..8)
            .map(|t| {
                let m = m.clone();
                std::thread::spawn(move || {
                    let (id, _) = m.open().unwrap();
                    for i in 0..30 {
                        let text = if (i + t) % 3 == 0 { "tell me a story" } else { "yes" };
                        assert!(!m.user_turn(&id, text, None).unwrap().text.is_empty());
                    }
                    id
                })
            })
            .collect();
        let ids: Vec<String> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        // the reader enforces per-conversation alternation and ordering
        let log = ConversationLog::from_records(sink.records()).unwrap();
        for id in &ids {
            assert_eq!(log.turns.iter().filter(|t| &t.conversation_id == id).count(), 61);
        }
    }
}
