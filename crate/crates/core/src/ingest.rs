//! Builds content packs from forum dumps: quality filtering, keyword topic
//! annotation, and pack assembly.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::PathBuf;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::content::{Genre, ItemRecord, PackDocument, PackError, Source, Topic, TopicRegistry};
use crate::text;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("config: {0}")]
    Config(String),
    #[error("keyword map names unknown topic {0:?}")]
    UnknownTopic(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Pack(#[from] PackError),
}

/// A post from a community forum dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPost {
    pub text: String,
    pub score: u64,
    pub source_name: String,
    pub created_at: DateTime<Utc>,
}

/// Parses a JSONL dump, one post per line. Negative scores are rejected.
pub fn parse_dump(src: &str) -> Result<Vec<RawPost>, IngestError> {
    let mut out = Vec::new();
    for (i, line) in src.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| IngestError::Malformed { line: i + 1, message };
        let value: serde_json::Value = serde_json::from_str(line).map_err(|e| malformed(e.to_string()))?;
        if let Some(s) = value.get("score").and_then(serde_json::Value::as_i64) {
            if s < 0 {
                return Err(malformed(format!("negative score {s}")));
            }
        }
        out.push(serde_json::from_value(value).map_err(|e| malformed(e.to_string()))?);
    }
    Ok(out)
}

/// Where raw posts come from.
pub trait PostSource {
    fn posts(&self) -> Result<Vec<RawPost>, IngestError>;
}

/// Posts read from a JSONL dump file.
pub struct FileDump(pub PathBuf);

impl PostSource for FileDump {
    fn posts(&self) -> Result<Vec<RawPost>, IngestError> {
        let src = std::fs::read_to_string(&self.0).map_err(|source| IngestError::Io {
            path: self.0.clone(),
            source,
        })?;
        parse_dump(&src)
    }
}

const IMPERATIVES: &[&str] = &[
    "ask", "check", "don't", "find", "give", "go", "guess", "help", "imagine", "let's", "look", "make",
    "name", "please", "show", "stop", "tell", "try",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    pub min_score: u64,
    pub min_words: usize,
    pub max_words: usize,
    /// Case-insensitive substrings that disqualify a post.
    pub blocklist: Vec<String>,
    /// Reject questions and imperatives.
    pub require_statement: bool,
    pub imperatives: Vec<String>,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            min_score: 50,
            min_words: 8,
            max_words: 60,
            blocklist: Vec::new(),
            require_statement: true,
            imperatives: IMPERATIVES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<(), IngestError> {
        if self.min_words > self.max_words {
            return Err(IngestError::Config(format!(
                "min_words {} exceeds max_words {}",
                self.min_words, self.max_words
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PackConfig {
    /// Score at which a post reaches quality 1.0.
    pub score_cap: u64,
    /// Extra keywords per topic, on top of the registry's names and aliases.
    pub keywords: BTreeMap<String, Vec<String>>,
    /// Topic for posts that match no keyword.
    pub fallback_topic: String,
}

impl Default for PackConfig {
    fn default() -> Self {
        PackConfig {
            score_cap: 500,
            keywords: BTreeMap::new(),
            fallback_topic: "Fun Facts".into(),
        }
    }
}

/// The ingest configuration file: `[filter]` and `[pack]` tables.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    pub filter: FilterConfig,
    pub pack: PackConfig,
}

impl IngestConfig {
    pub fn from_toml(src: &str) -> Result<Self, IngestError> {
        let cfg: IngestConfig = toml::from_str(src).map_err(|e| IngestError::Config(e.to_string()))?;
        cfg.filter.validate()?;
        if cfg.pack.score_cap == 0 {
            return Err(IngestError::Config("score_cap must be positive".into()));
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    Score,
    Length,
    Blocklist,
    Statement,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RejectReason::Score => "score",
            RejectReason::Length => "length",
            RejectReason::Blocklist => "blocklist",
            RejectReason::Statement => "statement",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FilterOutcome {
    pub accepted: Vec<RawPost>,
    pub rejected: Vec<(RawPost, RejectReason)>,
}

fn is_statement(text: &str, imperatives: &[String]) -> bool {
    if text.trim_end().ends_with('?') {
        return false;
    }
    match text::tokens(text).first() {
        Some(first) => !imperatives.iter().any(|v| v.eq_ignore_ascii_case(first)),
        None => false,
    }
}

/// First failing rule, checked in the order score, length, blocklist,
/// statement.
pub fn check_post(post: &RawPost, cfg: &FilterConfig) -> Option<RejectReason> {
    let words = text::word_count(&post.text);
    let lower = post.text.to_lowercase();
    if post.score < cfg.min_score {
        Some(RejectReason::Score)
    } else if words < cfg.min_words || words > cfg.max_words {
        Some(RejectReason::Length)
    } else if cfg.blocklist.iter().any(|b| !b.is_empty() && lower.contains(&b.to_lowercase())) {
        Some(RejectReason::Blocklist)
    } else if cfg.require_statement && !is_statement(&post.text, &cfg.imperatives) {
        Some(RejectReason::Statement)
    } else {
        None
    }
}

/// Splits posts into accepted and rejected, each rejection with its reason.
pub fn filter_posts(posts: Vec<RawPost>, cfg: &FilterConfig) -> FilterOutcome {
    let mut out = FilterOutcome::default();
    for post in posts {
        match check_post(&post, cfg) {
            None => out.accepted.push(post),
            Some(reason) => out.rejected.push((post, reason)),
        }
    }
    out
}

/// Topic -> keyword phrases, tokenized.
#[derive(Debug, Clone, Default)]
pub struct KeywordMap {
    phrases: BTreeMap<Topic, Vec<Vec<String>>>,
}

impl KeywordMap {
    /// Keywords given explicitly; every topic must be registered.
    pub fn new(registry: &TopicRegistry, map: &BTreeMap<String, Vec<String>>) -> Result<Self, IngestError> {
        let mut out = KeywordMap::default();
        out.extend(registry, map)?;
        Ok(out)
    }

    /// Every topic's name and aliases as keywords.
    pub fn from_registry(registry: &TopicRegistry) -> Self {
        let mut out = KeywordMap::default();
        for (phrase, topic) in registry.alias_phrases() {
            out.phrases.entry(topic).or_default().push(phrase);
        }
        out
    }

    pub fn extend(&mut self, registry: &TopicRegistry, map: &BTreeMap<String, Vec<String>>) -> Result<(), IngestError> {
        for (name, words) in map {
            let topic = registry.lookup(name).ok_or_else(|| IngestError::UnknownTopic(name.clone()))?;
            let entry = self.phrases.entry(topic.clone()).or_default();
            entry.extend(words.iter().map(|w| text::tokens(w)).filter(|p| !p.is_empty()));
        }
        Ok(())
    }
}

/// Topics whose keywords occur in `text`, in registry order.
pub fn annotate_topics(text: &str, registry: &TopicRegistry, keywords: &KeywordMap) -> Vec<Topic> {
    let tokens = text::tokens(text);
    let mut hits: Vec<&Topic> = keywords
        .phrases
        .iter()
        .filter(|(_, phrases)| phrases.iter().any(|p| text::find_phrase(&tokens, p, 0).is_some()))
        .map(|(t, _)| t)
        .collect();
    hits.sort_by_key(|t| registry.position(t).unwrap_or(usize::MAX));
    hits.into_iter().cloned().collect()
}

fn fnv1a(s: &str) -> u64 {
    s.bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

fn slug(s: &str) -> String {
    let t = text::tokens(s).join("-");
    if t.is_empty() {
        "forum".into()
    } else {
        t
    }
}

/// Curated records first, then one fact item per accepted post. Posts with
/// identical text are kept once. Quality is min(1, score / score_cap).
pub fn build_pack(
    accepted: &[RawPost],
    curated: Vec<ItemRecord>,
    registry: &TopicRegistry,
    keywords: &KeywordMap,
    cfg: &PackConfig,
) -> Result<PackDocument, IngestError> {
    let fallback = registry
        .lookup(&cfg.fallback_topic)
        .ok_or_else(|| IngestError::UnknownTopic(cfg.fallback_topic.clone()))?
        .clone();
    let cap = cfg.score_cap.max(1) as f64;
    let mut records = curated;
    let mut seen = HashSet::new();
    for post in accepted {
        let text = post.text.trim();
        if !seen.insert(text::normalize(text)) {
            continue;
        }
        let mut topics = annotate_topics(text, registry, keywords);
        if topics.is_empty() {
            topics.push(fallback.clone());
        }
        let names: Vec<&str> = topics.iter().map(Topic::as_str).collect();
        let id = format!("{}-{:016x}", slug(&post.source_name), fnv1a(text));
        let quality = (post.score as f64 / cap).min(1.0);
        records.push(ItemRecord::plain(&id, text, &names, Genre::Fact, Source::Forum, quality));
    }
    let doc = PackDocument {
        items: records.into_iter().enumerate().map(|(i, r)| (i + 1, r)).collect(),
        ..Default::default()
    };
    // Surface validation failures now rather than at load time.
    crate::content::ContentStore::from_document(&doc)?;
    Ok(doc)
}
