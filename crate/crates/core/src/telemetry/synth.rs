//! Synthetic conversation logs whose per-module statistics hit given
//! targets exactly (up to millisecond rounding of durations).
//!
//! Every synthetic conversation involves a single module, so each module's
//! rows are fitted independently. For each metric we build an integer sample
//! whose lower median and sum are fixed, then spread it by moving mass from
//! below the median to above it in equal amounts.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::activity::{Activity, Signature};
use crate::telemetry::log::{ConversationLog, RatingRecord, Speaker, TurnLogRecord};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("{module} {metric}: {reason}")]
    Infeasible {
        module: Activity,
        metric: &'static str,
        reason: String,
    },
    #[error("need at least one conversation per module")]
    Empty,
}

/// Mean and median of rating, user turns and duration for one module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModuleTarget {
    pub module: Activity,
    pub mean_rating: f64,
    pub median_rating: f64,
    pub mean_turns: f64,
    pub median_turns: f64,
    pub mean_time_s: f64,
    pub median_time_s: f64,
}

/// Per-module means and medians observed in the original field trial.
pub const FIELD_TRIAL_TARGETS: [ModuleTarget; 4] = [
    ModuleTarget {
        module: Activity::Search,
        mean_rating: 3.01,
        median_rating: 3.0,
        mean_turns: 5.30,
        median_turns: 3.0,
        mean_time_s: 45.12,
        median_time_s: 29.38,
    },
    ModuleTarget {
        module: Activity::Chitchat,
        mean_rating: 3.12,
        median_rating: 3.0,
        mean_turns: 14.65,
        median_turns: 10.0,
        mean_time_s: 102.39,
        median_time_s: 73.15,
    },
    ModuleTarget {
        module: Activity::Games,
        mean_rating: 3.20,
        median_rating: 3.0,
        mean_turns: 15.34,
        median_turns: 8.0,
        mean_time_s: 104.42,
        median_time_s: 57.78,
    },
    ModuleTarget {
        module: Activity::Storytelling,
        mean_rating: 3.62,
        median_rating: 4.0,
        mean_turns: 8.51,
        median_turns: 6.0,
        mean_time_s: 105.78,
        median_time_s: 74.01,
    },
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub conversations_per_module: usize,
    pub seed: u64,
    pub targets: Vec<ModuleTarget>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            conversations_per_module: 100,
            seed: 0,
            targets: FIELD_TRIAL_TARGETS.to_vec(),
        }
    }
}

const USER_LINES: [&str; 8] = [
    "yes",
    "no",
    "sure",
    "tell me more",
    "I like dinosaurs",
    "what is your favorite movie",
    "let's play a game",
    "tell me a story please",
];

/// Integer sample of size `n` in `[lo, hi]` with lower median `median` and
/// total `sum`.
pub fn fit_sample(n: usize, median: i64, sum: i64, lo: i64, hi: i64, rng: &mut impl Rng) -> Result<Vec<i64>, String> {
    if n == 0 {
        return Err("empty sample".into());
    }
    if !(lo..=hi).contains(&median) {
        return Err(format!("median {median} outside [{lo}, {hi}]"));
    }
    let k = (n - 1) / 2;
    let mut v = vec![median; n];
    let mut delta = sum - median * n as i64;
    // Indices below k may only go down, indices above k only up.
    let (range, room) = if delta >= 0 {
        (k + 1..n, hi - median)
    } else {
        (0..k, median - lo)
    };
    if (range.len() as i64) * room < delta.abs() {
        return Err(format!("sum {sum} unreachable with median {median} in [{lo}, {hi}]"));
    }
    let slots = range.len().max(1) as i64;
    let (base, mut extra) = (delta.abs() / slots, delta.abs() % slots);
    for i in range {
        let step = (base + i64::from(extra > 0)).min(room).min(delta.abs());
        extra -= 1;
        v[i] += step * delta.signum();
        delta -= step * delta.signum();
    }
    // Move mass outward in matched pairs: sum and median are unchanged.
    if k > 0 && k + 1 < n {
        for _ in 0..2 * n {
            let i = rng.random_range(0..k);
            let j = rng.random_range(k + 1..n);
            let cap = (v[i] - lo).min(hi - v[j]);
            if cap > 0 {
                let d = rng.random_range(0..=cap);
                v[i] -= d;
                v[j] += d;
            }
        }
    }
    v.shuffle(rng);
    Ok(v)
}

/// One metric's target: mean and median in display units, the factor to
/// integer sample units, and the sample bounds.
struct MetricTarget {
    name: &'static str,
    mean: f64,
    median: f64,
    scale: f64,
    bounds: (i64, i64),
}

fn fit(module: Activity, n: usize, m: MetricTarget, rng: &mut impl Rng) -> Result<Vec<i64>, SynthError> {
    let sum = (m.mean * m.scale * n as f64).round() as i64;
    let med = (m.median * m.scale).round() as i64;
    fit_sample(n, med, sum, m.bounds.0, m.bounds.1, rng).map_err(|reason| SynthError::Infeasible {
        module,
        metric: m.name,
        reason,
    })
}

/// Builds a log whose per-module means and medians equal the targets.
pub fn synthesize(cfg: &SynthConfig) -> Result<ConversationLog, SynthError> {
    let n = cfg.conversations_per_module;
    if n == 0 {
        return Err(SynthError::Empty);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut log = ConversationLog::default();
    for t in &cfg.targets {
        let ratings = fit(
            t.module,
            n,
            MetricTarget {
                name: "rating",
                mean: t.mean_rating,
                median: t.median_rating,
                scale: 1.0,
                bounds: (1, 5),
            },
            &mut rng,
        )?;
        let turns = fit(
            t.module,
            n,
            MetricTarget {
                name: "turns",
                mean: t.mean_turns,
                median: t.median_turns,
                scale: 1.0,
                bounds: (1, 10_000),
            },
            &mut rng,
        )?;
        let times = fit(
            t.module,
            n,
            MetricTarget {
                name: "time",
                mean: t.mean_time_s,
                median: t.median_time_s,
                scale: 1000.0,
                bounds: (0, 86_400_000),
            },
            &mut rng,
        )?;
        for i in 0..n {
            let id = format!("synth-{}-{i:04}", t.module);
            push_conversation(&mut log, &id, t.module, turns[i] as u64, times[i], &mut rng);
            log.ratings.push(RatingRecord {
                conversation_id: id,
                rating: ratings[i] as u8,
            });
        }
    }
    Ok(log)
}

/// Greeting, then `user_turns` exchanges answered by `module`, spanning
/// exactly `duration_ms`.
fn push_conversation(log: &mut ConversationLog, id: &str, module: Activity, user_turns: u64, duration_ms: i64, rng: &mut impl Rng) {
    let records = 2 * user_turns + 1;
    let start = 1_535_760_000_000 + rng.random_range(0..86_400_000i64);
    for idx in 0..records {
        let ts = start + duration_ms * idx as i64 / (records - 1) as i64;
        let rec = if idx % 2 == 1 {
            TurnLogRecord {
                conversation_id: id.into(),
                turn_index: idx,
                speaker: Speaker::User,
                text: USER_LINES[rng.random_range(0..USER_LINES.len())].into(),
                signature: None,
                asr_confidence: Some(rng.random_range(0.5..=1.0)),
                nlu: None,
                timestamp_ms: ts,
                response_delay_ms: None,
            }
        } else {
            let (source, activity) = if idx == 0 {
                ("greeting".to_string(), Activity::Chitchat)
            } else {
                (format!("synth/{module}/{idx}"), module)
            };
            TurnLogRecord {
                conversation_id: id.into(),
                turn_index: idx,
                speaker: Speaker::System,
                text: "Synthetic system turn.".into(),
                signature: Some(Signature::new(source, activity)),
                asr_confidence: None,
                nlu: None,
                timestamp_ms: ts,
                response_delay_ms: Some(rng.random_range(20.0..800.0)),
            }
        };
        log.turns.push(rec);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fitted_samples_hit_median_and_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (n, med, sum, lo, hi) in [(100, 3, 301, 1, 5), (100, 4, 362, 1, 5), (7, 10, 200, 1, 1000), (1, 5, 5, 1, 9), (2, 2, 9, 1, 9)] {
            let mut v = fit_sample(n, med, sum, lo, hi, &mut rng).unwrap();
            assert_eq!(v.iter().sum::<i64>(), sum);
            v.sort();
            assert_eq!(v[(n - 1) / 2], med);
            assert!(v.iter().all(|x| (lo..=hi).contains(x)));
        }
    }

    #[test]
    fn impossible_targets_are_reported() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(fit_sample(10, 5, 10, 1, 5, &mut rng).is_err());
        assert!(fit_sample(10, 1, 60, 1, 5, &mut rng).is_err());
        assert!(fit_sample(1, 5, 6, 1, 9, &mut rng).is_err());
        let cfg = SynthConfig {
            conversations_per_module: 0,
            ..Default::default()
        };
        assert_eq!(synthesize(&cfg), Err(SynthError::Empty));
    }

    #[test]
    fn samples_are_spread_out() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let v = fit_sample(100, 3, 301, 1, 5, &mut rng).unwrap();
        assert!(v.contains(&1) && v.contains(&5));
    }
}
