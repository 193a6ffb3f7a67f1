//! Conversation logs, ratings, and the statistics computed over them.

pub mod log;
pub mod report;
pub mod stats;
pub mod synth;

pub use log::{ConversationLog, JsonlSink, LogError, LogRecord, LogSink, MemorySink, NullSink, RatingRecord, Speaker, TurnLogRecord};
pub use report::{summarize, ModuleStats, Report};
pub use stats::{mann_whitney, pearson, CorrelationResult, StatsError, Summary, UTestResult};
pub use synth::{synthesize, ModuleTarget, SynthConfig, FIELD_TRIAL_TARGETS};
