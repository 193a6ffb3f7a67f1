//! Candidate ranking.
//!
//! Candidates are ordered by tier first; within a tier by
//!
//! ```text
//! total = w_s·salience + w_n·novelty − w_r·redundancy − w_v·verbosity
//! ```
//!
//! descending, and finally by source id. Totals are compared after dividing
//! by the weight sum and snapping to a fixed grid, so multiplying every
//! weight by the same positive constant never reorders candidates through
//! floating-point noise.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::activity::Signature;
use crate::content::Topic;
use crate::dialogue::DialogueContext;
use crate::text;

/// Preference class of a candidate; earlier variants always win.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    HandcraftedActive,
    FlowPrompt,
    ScoredContent,
    Fallback,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankWeights {
    pub salience: f64,
    pub novelty: f64,
    pub redundancy: f64,
    pub verbosity: f64,
    /// Words beyond which a candidate starts paying the verbosity penalty.
    pub verbosity_cap: usize,
}

impl Default for RankWeights {
    fn default() -> Self {
        RankWeights {
            salience: 1.0,
            novelty: 2.0,
            redundancy: 1.0,
            verbosity: 0.5,
            verbosity_cap: 80,
        }
    }
}

impl RankWeights {
    pub fn scaled(self, k: f64) -> Self {
        RankWeights {
            salience: self.salience * k,
            novelty: self.novelty * k,
            redundancy: self.redundancy * k,
            verbosity: self.verbosity * k,
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreParts {
    pub salience: f64,
    pub novelty: f64,
    pub redundancy: f64,
    pub verbosity: f64,
}

impl ScoreParts {
    pub fn total(&self, w: &RankWeights) -> f64 {
        w.salience * self.salience + w.novelty * self.novelty
            - w.redundancy * self.redundancy
            - w.verbosity * self.verbosity
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub text: String,
    pub signature: Signature,
    pub tier: Tier,
    pub topics: Vec<Topic>,
    pub entities: Vec<String>,
    pub verbosity: usize,
    /// Long-form content (story installments) pays no verbosity penalty.
    pub verbosity_exempt: bool,
    pub parts: ScoreParts,
}

impl Candidate {
    pub fn new(text: impl Into<String>, signature: Signature, tier: Tier) -> Self {
        let text = text.into();
        Candidate {
            verbosity: text::word_count(&text),
            text,
            signature,
            tier,
            topics: Vec::new(),
            entities: Vec::new(),
            verbosity_exempt: false,
            parts: ScoreParts::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RankError {
    #[error("no candidates to rank")]
    Empty,
}

/// Share of the candidate's distinct content words that already appeared
/// in the recent system turns.
pub fn redundancy(candidate_text: &str, recent: &[&str]) -> f64 {
    let words = text::content_words(candidate_text);
    if words.is_empty() {
        return 0.0;
    }
    let seen: BTreeSet<String> = recent.iter().flat_map(|t| text::content_words(t)).collect();
    words.iter().filter(|w| seen.contains(*w)).count() as f64 / words.len() as f64
}

/// Computes the score components of `c` against the conversation state.
pub fn score(c: &Candidate, ctx: &DialogueContext, w: &RankWeights) -> ScoreParts {
    let topic_hits = c.topics.iter().filter(|t| ctx.topic_stack.contains(t)).count();
    let focus: HashSet<String> = ctx.focus_entities.iter().map(|e| text::entity_key(e)).collect();
    let entity_hits = c
        .entities
        .iter()
        .map(|e| text::entity_key(e))
        .collect::<HashSet<_>>()
        .intersection(&focus)
        .count();
    let recent: Vec<&str> = ctx.recent_system_texts.iter().map(String::as_str).collect();
    let cap = w.verbosity_cap.max(1) as f64;
    ScoreParts {
        salience: (topic_hits + entity_hits) as f64,
        novelty: if ctx.used_content_ids.contains(&c.signature.source_id) { 0.0 } else { 1.0 },
        redundancy: redundancy(&c.text, &recent),
        verbosity: if c.verbosity_exempt {
            0.0
        } else {
            (c.verbosity as f64 - cap).max(0.0) / cap
        },
    }
}

const GRID: f64 = 4_294_967_296.0;

fn sort_key(parts: &ScoreParts, w: &RankWeights) -> i128 {
    let norm = w.salience.abs() + w.novelty.abs() + w.redundancy.abs() + w.verbosity.abs();
    if norm == 0.0 || !norm.is_finite() {
        return 0;
    }
    (parts.total(w) / norm * GRID).round() as i128
}

/// Orders candidates by the comparison in [`compare`].
pub fn order(mut candidates: Vec<Candidate>, w: &RankWeights) -> Vec<Candidate> {
    candidates.sort_by(|a, b| compare(a, b, w));
    candidates
}

/// Tier, then normalized total descending, then source id ascending.
pub fn compare(a: &Candidate, b: &Candidate, w: &RankWeights) -> Ordering {
    a.tier
        .cmp(&b.tier)
        .then_with(|| sort_key(&b.parts, w).cmp(&sort_key(&a.parts, w)))
        .then_with(|| a.signature.source_id.cmp(&b.signature.source_id))
}

/// Scores and orders candidates, best first.
pub fn rank(mut candidates: Vec<Candidate>, ctx: &DialogueContext, w: &RankWeights) -> Result<Vec<Candidate>, RankError> {
    if candidates.is_empty() {
        return Err(RankError::Empty);
    }
    for c in &mut candidates {
        c.parts = score(c, ctx, w);
    }
    Ok(order(candidates, w))
}
