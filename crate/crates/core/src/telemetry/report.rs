//! Per-module and overall conversation statistics.
//!
//! A conversation counts toward every activity that produced at least one of
//! its system turns; system turns before the first user turn (the greeting)
//! are not attributed. "Turns" are user turns. Duration runs from the first
//! to the last record of the conversation.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::activity::Activity;
use crate::telemetry::log::{ConversationLog, Speaker, TurnLogRecord};
use crate::telemetry::stats::{self, mean, median, CorrelationResult, Summary, UTestResult};
use crate::text;

/// Row label used in the module table.
pub fn module_label(a: Activity) -> &'static str {
    match a {
        Activity::Search => "Combined Search",
        Activity::Chitchat => "Topic-oriented Chit-chat",
        Activity::Games => "Interactive Games",
        Activity::Storytelling => "Storytelling",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuleStats {
    pub module: Activity,
    pub n_conversations: usize,
    /// Attributed conversations that carry a rating.
    pub n_rated: usize,
    pub mean_rating: f64,
    pub median_rating: f64,
    pub mean_total_turns: f64,
    pub median_total_turns: f64,
    pub mean_time_s: f64,
    pub median_time_s: f64,
    /// User turns answered by this module, per attributed conversation.
    pub mean_module_turns: f64,
    pub median_module_turns: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverallStats {
    pub conversations: usize,
    pub rated: usize,
    pub rating: Summary,
    pub total_turns: Summary,
    pub duration_s: Summary,
    pub user_turn_words: Summary,
    pub response_delay_s: Summary,
    /// Conversation length against rating, over rated conversations.
    pub length_vs_rating: Option<CorrelationResult>,
    /// Mean user-turn word count against rating.
    pub turn_words_vs_rating: Option<CorrelationResult>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Rating,
    TotalTurns,
    TimeS,
}

/// U test between the conversations involving two modules on one metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub a: Activity,
    pub b: Activity,
    pub metric: Metric,
    pub test: UTestResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub modules: Vec<ModuleStats>,
    pub overall: OverallStats,
    pub comparisons: Vec<Comparison>,
}

/// Facts about one conversation.
#[derive(Debug, Clone, PartialEq)]
pub struct ConversationFacts {
    pub id: String,
    pub rating: Option<u8>,
    pub user_turns: usize,
    pub duration_s: f64,
    pub modules: BTreeMap<Activity, usize>,
    pub user_words: Vec<f64>,
    pub delays_s: Vec<f64>,
}

/// Groups the log into conversations, ordered by id.
pub fn conversations(log: &ConversationLog) -> Vec<ConversationFacts> {
    let mut by_id: BTreeMap<&str, Vec<&TurnLogRecord>> = BTreeMap::new();
    for t in &log.turns {
        by_id.entry(&t.conversation_id).or_default().push(t);
    }
    let ratings: BTreeMap<&str, u8> = log.ratings.iter().map(|r| (r.conversation_id.as_str(), r.rating)).collect();
    for id in ratings.keys() {
        by_id.entry(id).or_default();
    }
    by_id
        .into_iter()
        .map(|(id, mut turns)| {
            turns.sort_by_key(|t| t.turn_index);
            let mut modules = BTreeMap::new();
            let mut seen_user = false;
            let mut user_words = Vec::new();
            let mut delays_s = Vec::new();
            for t in &turns {
                match t.speaker {
                    Speaker::User => {
                        seen_user = true;
                        user_words.push(text::word_count(&t.text) as f64);
                    }
                    Speaker::System => {
                        if let Some(d) = t.response_delay_ms {
                            delays_s.push(d / 1000.0);
                        }
                        if let (true, Some(sig)) = (seen_user, &t.signature) {
                            *modules.entry(sig.activity).or_insert(0) += 1;
                        }
                    }
                }
            }
            let duration_s = match (turns.iter().map(|t| t.timestamp_ms).min(), turns.iter().map(|t| t.timestamp_ms).max()) {
                (Some(lo), Some(hi)) => (hi - lo) as f64 / 1000.0,
                _ => 0.0,
            };
            ConversationFacts {
                id: id.to_string(),
                rating: ratings.get(id).copied(),
                user_turns: user_words.len(),
                duration_s,
                modules,
                user_words,
                delays_s,
            }
        })
        .collect()
}

fn module_stats(module: Activity, convs: &[&ConversationFacts]) -> ModuleStats {
    let ratings: Vec<f64> = convs.iter().filter_map(|c| c.rating.map(f64::from)).collect();
    let turns: Vec<f64> = convs.iter().map(|c| c.user_turns as f64).collect();
    let times: Vec<f64> = convs.iter().map(|c| c.duration_s).collect();
    let local: Vec<f64> = convs.iter().map(|c| c.modules.get(&module).copied().unwrap_or(0) as f64).collect();
    ModuleStats {
        module,
        n_conversations: convs.len(),
        n_rated: ratings.len(),
        mean_rating: mean(&ratings),
        median_rating: median(&ratings),
        mean_total_turns: mean(&turns),
        median_total_turns: median(&turns),
        mean_time_s: mean(&times),
        median_time_s: median(&times),
        mean_module_turns: mean(&local),
        median_module_turns: median(&local),
    }
}

fn metric_values(convs: &[&ConversationFacts], metric: Metric) -> Vec<f64> {
    match metric {
        Metric::Rating => convs.iter().filter_map(|c| c.rating.map(f64::from)).collect(),
        Metric::TotalTurns => convs.iter().map(|c| c.user_turns as f64).collect(),
        Metric::TimeS => convs.iter().map(|c| c.duration_s).collect(),
    }
}

/// Computes the module table, overall statistics and pairwise U tests.
pub fn summarize(log: &ConversationLog) -> Report {
    let convs = conversations(log);
    let involving = |m: Activity| -> Vec<&ConversationFacts> { convs.iter().filter(|c| c.modules.contains_key(&m)).collect() };
    let modules = Activity::ALL.iter().map(|&m| module_stats(m, &involving(m))).collect();

    let mut comparisons = Vec::new();
    for (i, &a) in Activity::ALL.iter().enumerate() {
        for &b in &Activity::ALL[i + 1..] {
            let (ca, cb) = (involving(a), involving(b));
            for metric in [Metric::Rating, Metric::TotalTurns, Metric::TimeS] {
                if let Ok(test) = stats::mann_whitney(&metric_values(&ca, metric), &metric_values(&cb, metric)) {
                    comparisons.push(Comparison { a, b, metric, test });
                }
            }
        }
    }

    let rated: Vec<&ConversationFacts> = convs.iter().filter(|c| c.rating.is_some()).collect();
    let rating_of = |c: &&ConversationFacts| f64::from(c.rating.unwrap_or_default());
    let ratings: Vec<f64> = rated.iter().map(rating_of).collect();
    let lengths: Vec<f64> = rated.iter().map(|c| c.user_turns as f64).collect();
    let rated_words: Vec<(f64, f64)> = rated
        .iter()
        .filter(|c| !c.user_words.is_empty())
        .map(|c| (mean(&c.user_words), rating_of(c)))
        .collect();
    let (word_means, word_ratings): (Vec<f64>, Vec<f64>) = rated_words.into_iter().unzip();
    let all_words: Vec<f64> = convs.iter().flat_map(|c| c.user_words.iter().copied()).collect();
    let all_delays: Vec<f64> = convs.iter().flat_map(|c| c.delays_s.iter().copied()).collect();

    let overall = OverallStats {
        conversations: convs.len(),
        rated: rated.len(),
        rating: Summary::of(&ratings),
        total_turns: Summary::of(&convs.iter().map(|c| c.user_turns as f64).collect::<Vec<_>>()),
        duration_s: Summary::of(&convs.iter().map(|c| c.duration_s).collect::<Vec<_>>()),
        user_turn_words: Summary::of(&all_words),
        response_delay_s: Summary::of(&all_delays),
        length_vs_rating: stats::pearson(&lengths, &ratings).ok(),
        turn_words_vs_rating: stats::pearson(&word_means, &word_ratings).ok(),
    };
    Report {
        modules,
        overall,
        comparisons,
    }
}

impl Report {
    pub fn module(&self, m: Activity) -> &ModuleStats {
        self.modules.iter().find(|s| s.module == m).expect("every module has a row")
    }

    /// Module table: mean(median) of rating, total turns and time.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<26} | {:>5} | {:>12} | {:>14} | {:>16}",
            "Dialogue module", "n", "User rating", "Total turns", "Time [s]"
        );
        let _ = writeln!(out, "{}", "-".repeat(87));
        for m in &self.modules {
            let _ = writeln!(
                out,
                "{:<26} | {:>5} | {:>12} | {:>14} | {:>16}",
                module_label(m.module),
                m.n_conversations,
                format!("{:.2}({:.1})", m.mean_rating, m.median_rating),
                format!("{:.2}({:.1})", m.mean_total_turns, m.median_total_turns),
                format!("{:.2}({:.2})", m.mean_time_s, m.median_time_s),
            );
        }
        let o = &self.overall;
        let _ = writeln!(out);
        let _ = writeln!(out, "conversations: {} ({} rated)", o.conversations, o.rated);
        let line = |name: &str, s: &Summary| format!("{name}: mean {:.2}, median {:.2}, std {:.2}\n", s.mean, s.median, s.std);
        out.push_str(&line("rating", &o.rating));
        out.push_str(&line("turns", &o.total_turns));
        out.push_str(&line("duration [s]", &o.duration_s));
        out.push_str(&line("user turn words", &o.user_turn_words));
        out.push_str(&line("response delay [s]", &o.response_delay_s));
        if let Some(c) = &o.length_vs_rating {
            let _ = writeln!(out, "length vs rating: r = {:.3}, p = {:.3e}, n = {}", c.r, c.p, c.n);
        }
        if let Some(c) = &o.turn_words_vs_rating {
            let _ = writeln!(out, "turn words vs rating: r = {:.3}, p = {:.3e}, n = {}", c.r, c.p, c.n);
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activity::Signature;
    use crate::telemetry::log::RatingRecord;

    fn turn(conv: &str, idx: u64, speaker: Speaker, act: Activity, ts: i64) -> TurnLogRecord {
        TurnLogRecord {
            conversation_id: conv.into(),
            turn_index: idx,
            speaker,
            text: "so what do you think".into(),
            signature: (speaker == Speaker::System).then(|| Signature::new("x", act)),
            asr_confidence: None,
            nlu: None,
            timestamp_ms: ts,
            response_delay_ms: (speaker == Speaker::System).then_some(200.0),
        }
    }

    /// Greeting, then `n` user/system pairs answered by `act`.
    fn conv(id: &str, act: Activity, n: u64, rating: u8) -> ConversationLog {
        let mut turns = vec![turn(id, 0, Speaker::System, Activity::Chitchat, 0)];
        for i in 0..n {
            turns.push(turn(id, 2 * i + 1, Speaker::User, act, (2 * i + 1) as i64 * 1000));
            turns.push(turn(id, 2 * i + 2, Speaker::System, act, (2 * i + 2) as i64 * 1000));
        }
        ConversationLog {
            turns,
            ratings: vec![RatingRecord::new(id, rating).unwrap()],
        }
    }

    #[test]
    fn single_storytelling_conversation() {
        let r = summarize(&conv("c", Activity::Storytelling, 4, 5));
        let s = r.module(Activity::Storytelling);
        assert_eq!((s.n_conversations, s.mean_rating, s.mean_total_turns), (1, 5.0, 4.0));
        assert_eq!(s.mean_time_s, 8.0);
        // the greeting's chit-chat signature is not attributed
        assert_eq!(r.module(Activity::Chitchat).n_conversations, 0);
        assert_eq!(r.overall.total_turns.mean, 4.0);
        assert_eq!(r.overall.response_delay_s.mean, 0.2);
    }

    #[test]
    fn empty_log_gives_zero_rows() {
        let r = summarize(&ConversationLog::default());
        assert_eq!(r.modules.len(), 4);
        for m in &r.modules {
            assert_eq!(m.n_conversations, 0);
            assert_eq!(m.mean_rating, 0.0);
        }
        assert_eq!(r.overall.conversations, 0);
        assert!(r.comparisons.is_empty());
    }

    #[test]
    fn conversations_count_toward_every_module_they_touch() {
        let mut log = conv("a", Activity::Search, 1, 2);
        log.turns.push(turn("a", 3, Speaker::User, Activity::Games, 3000));
        log.turns.push(turn("a", 4, Speaker::System, Activity::Games, 4000));
        let other = conv("b", Activity::Games, 3, 4);
        log.turns.extend(other.turns);
        log.ratings.extend(other.ratings);
        let r = summarize(&log);
        assert_eq!(r.module(Activity::Search).n_conversations, 1);
        let g = r.module(Activity::Games);
        assert_eq!(g.n_conversations, 2);
        assert_eq!(g.mean_rating, 3.0);
        assert_eq!(g.median_total_turns, 2.0);
        assert_eq!((g.mean_module_turns, g.median_module_turns), (2.0, 1.0));
        assert!(r.render_table().contains("Interactive Games"));
    }
}
