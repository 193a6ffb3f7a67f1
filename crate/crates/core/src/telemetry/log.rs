//! Conversation logs: one JSON record per line, turn records and rating
//! records interleaved. A record with a `rating` field is a rating; anything
//! else must be a turn.

use std::collections::{HashMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::activity::Signature;
use crate::dialogue::SystemTurn;
use crate::nlu::{NluResult, NluSummary, UserUtterance};

#[derive(Debug, Error)]
pub enum LogError {
    #[error("{}line {line}: {message}", source_prefix(.file))]
    Malformed {
        file: Option<PathBuf>,
        line: usize,
        message: String,
    },
    #[error("invalid record: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn source_prefix(file: &Option<PathBuf>) -> String {
    file.as_ref().map(|p| format!("{}: ", p.display())).unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Speaker {
    User,
    System,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TurnLogRecord {
    pub conversation_id: String,
    pub turn_index: u64,
    pub speaker: Speaker,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signature: Option<Signature>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub asr_confidence: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nlu: Option<NluSummary>,
    pub timestamp_ms: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response_delay_ms: Option<f64>,
}

impl TurnLogRecord {
    pub fn user(conversation_id: &str, turn_index: u64, utt: &UserUtterance, nlu: &NluResult, timestamp_ms: i64) -> Self {
        TurnLogRecord {
            conversation_id: conversation_id.to_string(),
            turn_index,
            speaker: Speaker::User,
            text: utt.text.clone(),
            signature: None,
            asr_confidence: Some(utt.asr_confidence),
            nlu: Some(nlu.into()),
            timestamp_ms,
            response_delay_ms: None,
        }
    }

    pub fn system(conversation_id: &str, turn_index: u64, turn: &SystemTurn, timestamp_ms: i64) -> Self {
        TurnLogRecord {
            conversation_id: conversation_id.to_string(),
            turn_index,
            speaker: Speaker::System,
            text: turn.text.clone(),
            signature: Some(turn.signature.clone()),
            asr_confidence: None,
            nlu: None,
            timestamp_ms,
            response_delay_ms: Some(turn.elapsed_ms),
        }
    }

    fn validate(&self) -> Result<(), String> {
        match self.speaker {
            Speaker::System => {
                if self.signature.is_none() {
                    return Err("system turn without signature".into());
                }
                if self.asr_confidence.is_some() {
                    return Err("system turn with asr_confidence".into());
                }
                if let Some(d) = self.response_delay_ms {
                    if !(d.is_finite() && d >= 0.0) {
                        return Err(format!("response_delay_ms {d} is not a non-negative number"));
                    }
                }
            }
            Speaker::User => {
                if self.signature.is_some() {
                    return Err("user turn with signature".into());
                }
                if self.response_delay_ms.is_some() {
                    return Err("user turn with response_delay_ms".into());
                }
                if let Some(c) = self.asr_confidence {
                    if !(0.0..=1.0).contains(&c) {
                        return Err(format!("asr_confidence {c} outside [0, 1]"));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatingRecord {
    pub conversation_id: String,
    pub rating: u8,
}

impl RatingRecord {
    pub fn new(conversation_id: impl Into<String>, rating: u8) -> Result<Self, LogError> {
        if !(1..=5).contains(&rating) {
            return Err(LogError::Invalid(format!("rating {rating} outside 1..=5")));
        }
        Ok(RatingRecord {
            conversation_id: conversation_id.into(),
            rating,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum LogRecord {
    Turn(TurnLogRecord),
    Rating(RatingRecord),
}

impl LogRecord {
    pub fn conversation_id(&self) -> &str {
        match self {
            LogRecord::Turn(t) => &t.conversation_id,
            LogRecord::Rating(r) => &r.conversation_id,
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("log records serialize")
    }

    /// Parses one line, checking the record on its own.
    pub fn parse_line(line: &str) -> Result<LogRecord, String> {
        let value: serde_json::Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let is_rating = value.get("rating").is_some();
        if is_rating {
            let r: RatingRecord = serde_json::from_value(value).map_err(|e| format!("rating record: {e}"))?;
            if !(1..=5).contains(&r.rating) {
                return Err(format!("rating {} outside 1..=5", r.rating));
            }
            Ok(LogRecord::Rating(r))
        } else {
            let t: TurnLogRecord = serde_json::from_value(value).map_err(|e| format!("turn record: {e}"))?;
            t.validate()?;
            Ok(LogRecord::Turn(t))
        }
    }
}

/// Records of one or more log files, validated across lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConversationLog {
    pub turns: Vec<TurnLogRecord>,
    pub ratings: Vec<RatingRecord>,
}

/// Cross-record checks: per conversation, turn indices strictly increase,
/// speakers alternate, and at most one rating is given.
#[derive(Default)]
struct Checker {
    last: HashMap<String, (u64, Speaker)>,
    rated: HashSet<String>,
}

impl Checker {
    fn check(&mut self, rec: &LogRecord) -> Result<(), String> {
        match rec {
            LogRecord::Turn(t) => {
                if let Some(&(idx, speaker)) = self.last.get(&t.conversation_id) {
                    if t.turn_index <= idx {
                        return Err(format!(
                            "conversation {:?}: turn_index {} does not follow {idx}",
                            t.conversation_id, t.turn_index
                        ));
                    }
                    if t.speaker == speaker {
                        return Err(format!("conversation {:?}: two {:?} turns in a row", t.conversation_id, speaker));
                    }
                }
                self.last.insert(t.conversation_id.clone(), (t.turn_index, t.speaker));
            }
            LogRecord::Rating(r) => {
                if !self.rated.insert(r.conversation_id.clone()) {
                    return Err(format!("conversation {:?} rated twice", r.conversation_id));
                }
            }
        }
        Ok(())
    }
}

impl ConversationLog {
    pub fn from_records(records: impl IntoIterator<Item = LogRecord>) -> Result<Self, LogError> {
        let mut log = ConversationLog::default();
        let mut checker = Checker::default();
        for rec in records {
            checker.check(&rec).map_err(LogError::Invalid)?;
            log.push(rec);
        }
        Ok(log)
    }

    fn push(&mut self, rec: LogRecord) {
        match rec {
            LogRecord::Turn(t) => self.turns.push(t),
            LogRecord::Rating(r) => self.ratings.push(r),
        }
    }

    /// Reads JSONL from `reader`. Blank lines are skipped.
    pub fn read(reader: impl BufRead) -> Result<Self, LogError> {
        let mut log = ConversationLog::default();
        log.read_into(reader, None, &mut Checker::default())?;
        Ok(log)
    }

    /// Reads every `*.jsonl` file in `dir`, in file-name order.
    pub fn read_dir(dir: &Path) -> Result<Self, LogError> {
        let mut files: Vec<PathBuf> = fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        files.sort();
        let mut log = ConversationLog::default();
        let mut checker = Checker::default();
        for path in files {
            let reader = BufReader::new(File::open(&path)?);
            log.read_into(reader, Some(&path), &mut checker)?;
        }
        Ok(log)
    }

    fn read_into(&mut self, reader: impl BufRead, file: Option<&Path>, checker: &mut Checker) -> Result<(), LogError> {
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let malformed = |message: String| LogError::Malformed {
                file: file.map(Path::to_path_buf),
                line: i + 1,
                message,
            };
            let rec = LogRecord::parse_line(&line).map_err(malformed)?;
            checker.check(&rec).map_err(malformed)?;
            self.push(rec);
        }
        Ok(())
    }

    pub fn write(&self, mut out: impl Write) -> io::Result<()> {
        for t in &self.turns {
            writeln!(out, "{}", LogRecord::Turn(t.clone()).to_line())?;
        }
        for r in &self.ratings {
            writeln!(out, "{}", LogRecord::Rating(r.clone()).to_line())?;
        }
        Ok(())
    }
}

/// Append-only destination for records from many concurrent sessions.
pub trait LogSink: Send + Sync {
    fn append(&self, record: &LogRecord) -> Result<(), LogError>;
}

/// Discards everything.
pub struct NullSink;

impl LogSink for NullSink {
    fn append(&self, _: &LogRecord) -> Result<(), LogError> {
        Ok(())
    }
}

/// Keeps records in memory, in arrival order.
#[derive(Default)]
pub struct MemorySink {
    records: Mutex<Vec<LogRecord>>,
}

impl MemorySink {
    pub fn records(&self) -> Vec<LogRecord> {
        self.records.lock().expect("sink lock").clone()
    }
}

impl LogSink for MemorySink {
    fn append(&self, record: &LogRecord) -> Result<(), LogError> {
        self.records.lock().expect("sink lock").push(record.clone());
        Ok(())
    }
}

/// Appends one line per record to a file. Each line is written and flushed
/// under a lock, so lines from different sessions never interleave.
pub struct JsonlSink {
    path: PathBuf,
    file: Mutex<File>,
}

impl JsonlSink {
    pub fn open(path: impl Into<PathBuf>) -> Result<Self, LogError> {
        let path = path.into();
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(JsonlSink {
            path,
            file: Mutex::new(file),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

impl LogSink for JsonlSink {
    fn append(&self, record: &LogRecord) -> Result<(), LogError> {
        let mut line = record.to_line();
        line.push('\n');
        let mut f = self.file.lock().expect("sink lock");
        f.write_all(line.as_bytes())?;
        f.flush()?;
        Ok(())
    }
}
