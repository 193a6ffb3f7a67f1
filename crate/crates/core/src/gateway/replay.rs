//! Transcript replay for structural regression tests.
//!
//! A transcript is plain text, one user turn per line. A turn may carry an
//! ASR confidence after a tab. Lines starting with `#` are comments, except
//! for these directives:
//!
//! ```text
//! # seed: 7
//! # topics: Science Fiction, Dinosaurs, Music
//! # expect: chitchat storytelling storytelling
//! ```
//!
//! `topics` pins the greeting's suggestions; `expect` lists the activity of
//! each system turn after the greeting.

use std::str::FromStr;

use thiserror::Error;

use crate::activity::Activity;
use crate::content::Topic;
use crate::dialogue::{DialogueContext, Engine, SystemTurn};
use crate::nlu::UserUtterance;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TranscriptError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Transcript {
    pub seed: Option<u64>,
    pub topics: Option<Vec<Topic>>,
    pub expect: Option<Vec<Activity>>,
    pub turns: Vec<UserUtterance>,
}

fn parse_activity(s: &str) -> Option<Activity> {
    Activity::ALL.into_iter().find(|a| a.as_str() == s)
}

impl FromStr for Transcript {
    type Err = TranscriptError;

    fn from_str(src: &str) -> Result<Self, Self::Err> {
        let mut t = Transcript::default();
        for (i, raw) in src.lines().enumerate() {
            let line = i + 1;
            let err = |message: String| TranscriptError::Parse { line, message };
            let trimmed = raw.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(comment) = trimmed.strip_prefix('#') {
                let Some((key, value)) = comment.split_once(':') else {
                    continue;
                };
                let value = value.trim();
                match key.trim() {
                    "seed" => t.seed = Some(value.parse().map_err(|e| err(format!("bad seed: {e}")))?),
                    "topics" => {
                        t.topics = Some(
                            value
                                .split(',')
                                .map(str::trim)
                                .filter(|s| !s.is_empty())
                                .map(Topic::from)
                                .collect(),
                        )
                    }
                    "expect" => {
                        let acts = value
                            .split_whitespace()
                            .map(|w| parse_activity(w).ok_or_else(|| err(format!("unknown activity {w:?}"))))
                            .collect::<Result<Vec<_>, _>>()?;
                        t.expect = Some(acts);
                    }
                    _ => {}
                }
                continue;
            }
            let utt = match raw.split_once('\t') {
                Some((text, conf)) => {
                    let c: f64 = conf.trim().parse().map_err(|e| err(format!("bad confidence: {e}")))?;
                    UserUtterance::new(text.trim(), c).map_err(|e| err(e.to_string()))?
                }
                None => UserUtterance::text(trimmed),
            };
            t.turns.push(utt);
        }
        Ok(t)
    }
}

/// Output of a replay: the greeting plus one system turn per user turn.
#[derive(Debug, Clone)]
pub struct ReplayRun {
    pub greeting: SystemTurn,
    pub turns: Vec<SystemTurn>,
}

impl ReplayRun {
    /// Activity of each system turn after the greeting.
    pub fn activities(&self) -> Vec<Activity> {
        self.turns.iter().map(|t| t.signature.activity).collect()
    }
}

/// Feeds the transcript's user turns through a fresh session.
pub fn replay(engine: &Engine, transcript: &Transcript) -> ReplayRun {
    let engine = engine.reconfigured(|c| {
        if let Some(seed) = transcript.seed {
            c.seed = seed;
        }
        if let Some(topics) = &transcript.topics {
            c.greeting_topics = Some(topics.clone());
        }
    });
    let mut ctx = DialogueContext::new("replay");
    let greeting = engine.greet(&mut ctx);
    let turns = transcript
        .turns
        .iter()
        .map(|u| engine.respond(&mut ctx, u).1)
        .collect();
    ReplayRun { greeting, turns }
}
