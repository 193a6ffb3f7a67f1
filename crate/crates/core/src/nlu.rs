//! Rule-based understanding of user utterances.
//!
//! Utterances arrive as text plus a simulated recognizer confidence. Below
//! the restate threshold nothing is interpreted; otherwise an intent is
//! picked by the first rule that fires, in this priority order:
//!
//! 1. stop phrase anywhere in the utterance
//! 2. bare affirm/deny (only lexicon phrases and filler words; deny wins ties)
//! 3. story or game cue outside any topic mention
//! 4. topic mention with a request cue, or a bare topic mention
//! 5. question form (leading wh-word or auxiliary inversion)
//! 6. first-person statement
//! 7. unknown
//!
//! Topics and entities are extracted for every utterance regardless of intent.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::content::{Topic, TopicRegistry};
use crate::games::GameKind;
use crate::text;

const DEFAULT_LEXICONS: &str = include_str!("../config/lexicons.toml");

#[derive(Debug, Error)]
pub enum NluError {
    #[error("asr confidence {0} outside [0, 1]")]
    Confidence(f64),
    #[error("lexicon file: {0}")]
    Lexicon(#[from] toml::de::Error),
}

/// Raw user input: recognized text and the recognizer's confidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserUtterance {
    pub text: String,
    pub asr_confidence: f64,
}

impl UserUtterance {
    pub fn new(text: impl Into<String>, asr_confidence: f64) -> Result<Self, NluError> {
        if !(0.0..=1.0).contains(&asr_confidence) {
            return Err(NluError::Confidence(asr_confidence));
        }
        Ok(UserUtterance {
            text: text.into(),
            asr_confidence,
        })
    }

    /// Text at full confidence.
    pub fn text(text: impl Into<String>) -> Self {
        UserUtterance {
            text: text.into(),
            asr_confidence: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum Intent {
    Affirm,
    Deny,
    TopicRequest(Topic),
    EntityQuery(String),
    StoryRequest,
    GameRequest(Option<GameKind>),
    StopRequest,
    SelfDisclosure,
    Unknown,
}

/// Payload-free intent discriminant, for flow conditions and logs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntentKind {
    Affirm,
    Deny,
    TopicRequest,
    EntityQuery,
    StoryRequest,
    GameRequest,
    StopRequest,
    SelfDisclosure,
    Unknown,
}

impl Intent {
    pub fn kind(&self) -> IntentKind {
        match self {
            Intent::Affirm => IntentKind::Affirm,
            Intent::Deny => IntentKind::Deny,
            Intent::TopicRequest(_) => IntentKind::TopicRequest,
            Intent::EntityQuery(_) => IntentKind::EntityQuery,
            Intent::StoryRequest => IntentKind::StoryRequest,
            Intent::GameRequest(_) => IntentKind::GameRequest,
            Intent::StopRequest => IntentKind::StopRequest,
            Intent::SelfDisclosure => IntentKind::SelfDisclosure,
            Intent::Unknown => IntentKind::Unknown,
        }
    }
}

impl fmt::Display for IntentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("intent kinds serialize");
        f.write_str(s.as_str().unwrap_or("unknown"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NluResult {
    pub tokens: Vec<String>,
    pub intent: Intent,
    pub topics: Vec<Topic>,
    /// Canonical names of gazetteer entities found in the utterance.
    pub entities: Vec<String>,
    pub needs_restate: bool,
}

impl NluResult {
    /// A result carrying only an intent, for driving modules directly.
    pub fn with_intent(intent: Intent) -> Self {
        NluResult {
            tokens: Vec::new(),
            intent,
            topics: Vec::new(),
            entities: Vec::new(),
            needs_restate: false,
        }
    }

    pub fn has_token(&self, token: &str) -> bool {
        self.tokens.iter().any(|t| t == token)
    }
}

/// Compact form of an analysis for turn logs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NluSummary {
    pub intent: IntentKind,
    pub topics: Vec<Topic>,
    pub entities: Vec<String>,
    pub needs_restate: bool,
}

impl From<&NluResult> for NluSummary {
    fn from(r: &NluResult) -> Self {
        NluSummary {
            intent: r.intent.kind(),
            topics: r.topics.clone(),
            entities: r.entities.clone(),
            needs_restate: r.needs_restate,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct LexiconFile {
    affirm: Vec<String>,
    deny: Vec<String>,
    filler: Vec<String>,
    stop: Vec<String>,
    story: Vec<String>,
    game: Vec<String>,
    topic_request: Vec<String>,
    topic_filler: Vec<String>,
    question_words: Vec<String>,
    auxiliaries: Vec<String>,
    first_person: Vec<String>,
    game_kinds: BTreeMap<GameKind, Vec<String>>,
}

type Phrase = Vec<String>;

fn phrases(list: &[String]) -> Vec<Phrase> {
    let mut out: Vec<Phrase> = list
        .iter()
        .map(|s| text::tokens(s))
        .filter(|p| !p.is_empty())
        .collect();
    out.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    out.dedup();
    out
}

/// Keyword lists driving intent detection.
#[derive(Debug, Clone)]
pub struct Lexicons {
    affirm: Vec<Phrase>,
    deny: Vec<Phrase>,
    filler: Vec<Phrase>,
    stop: Vec<Phrase>,
    story: Vec<Phrase>,
    game: Vec<Phrase>,
    topic_request: Vec<Phrase>,
    topic_filler: Vec<String>,
    question_words: Vec<String>,
    auxiliaries: Vec<String>,
    first_person: Vec<String>,
    game_kinds: Vec<(Phrase, GameKind)>,
}

impl Lexicons {
    pub fn from_toml(src: &str) -> Result<Self, NluError> {
        let f: LexiconFile = toml::from_str(src)?;
        let single = |v: &[String]| v.iter().map(|s| text::normalize(s)).collect::<Vec<_>>();
        let mut game_kinds: Vec<(Phrase, GameKind)> = f
            .game_kinds
            .iter()
            .flat_map(|(k, v)| phrases(v).into_iter().map(move |p| (p, *k)))
            .collect();
        game_kinds.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        Ok(Lexicons {
            affirm: phrases(&f.affirm),
            deny: phrases(&f.deny),
            filler: phrases(&f.filler),
            stop: phrases(&f.stop),
            story: phrases(&f.story),
            game: phrases(&f.game),
            topic_request: phrases(&f.topic_request),
            topic_filler: single(&f.topic_filler),
            question_words: single(&f.question_words),
            auxiliaries: single(&f.auxiliaries),
            first_person: single(&f.first_person),
            game_kinds,
        })
    }

    /// True if `token` belongs to any intent lexicon. Used to keep intent
    /// words out of keyword follow-ups.
    pub fn is_lexicon_word(&self, token: &str) -> bool {
        let lists = [
            &self.affirm,
            &self.deny,
            &self.filler,
            &self.stop,
            &self.story,
            &self.game,
        ];
        lists
            .iter()
            .any(|l| l.iter().any(|p| p.len() == 1 && p[0] == token))
    }
}

impl Default for Lexicons {
    fn default() -> Self {
        Lexicons::from_toml(DEFAULT_LEXICONS).expect("bundled lexicons parse")
    }
}

/// Entity alias table: entity key -> canonical name.
#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    /// (key tokens, canonical), longest first
    phrases: Vec<(Vec<String>, String)>,
}

impl Gazetteer {
    pub fn new(table: &HashMap<String, String>) -> Self {
        let mut g = Gazetteer::default();
        g.extend(table.iter().map(|(k, v)| (k.clone(), v.clone())));
        g
    }

    /// Adds (alias, canonical) pairs; aliases are normalized to entity keys.
    pub fn extend(&mut self, pairs: impl IntoIterator<Item = (String, String)>) {
        let mut known: HashSet<Vec<String>> = self.phrases.iter().map(|(k, _)| k.clone()).collect();
        for (alias, canonical) in pairs {
            let key = text::entity_key(&alias);
            if key.is_empty() {
                continue;
            }
            let toks: Vec<String> = key.split(' ').map(str::to_string).collect();
            if known.insert(toks.clone()) {
                self.phrases.push((toks, canonical));
            }
        }
        self.phrases
            .sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    pub fn contains_canonical(&self, name: &str) -> bool {
        self.phrases.iter().any(|(_, c)| c == name)
    }

    /// Canonical names found in `utterance`, in order of appearance, using
    /// longest non-overlapping matches.
    pub fn find(&self, utterance: &str) -> Vec<String> {
        let key = text::entity_key(utterance);
        if key.is_empty() {
            return Vec::new();
        }
        let toks: Vec<String> = key.split(' ').map(str::to_string).collect();
        let spans = longest_spans(&toks, self.phrases.iter().map(|(p, c)| (p.as_slice(), c)));
        let mut out: Vec<String> = Vec::new();
        for (_, _, c) in spans {
            if !out.contains(c) {
                out.push(c.clone());
            }
        }
        out
    }
}

/// Non-overlapping phrase matches, longest phrase first, sorted by position.
fn longest_spans<'a, T>(
    toks: &[String],
    phrases: impl Iterator<Item = (&'a [String], T)>,
) -> Vec<(usize, usize, T)> {
    let mut taken = vec![false; toks.len()];
    let mut spans = Vec::new();
    for (phrase, payload) in phrases {
        let mut from = 0;
        while let Some(start) = text::find_phrase(toks, phrase, from) {
            let end = start + phrase.len();
            if taken[start..end].iter().all(|t| !t) {
                taken[start..end].iter_mut().for_each(|t| *t = true);
                spans.push((start, end, payload));
                break;
            }
            from = start + 1;
        }
    }
    spans.sort_by_key(|s| s.0);
    spans
}

fn find_any(toks: &[String], list: &[Phrase], mask: &[bool]) -> Option<usize> {
    list.iter()
        .filter_map(|p| {
            let mut from = 0;
            while let Some(i) = text::find_phrase(toks, p, from) {
                if mask[i..i + p.len()].iter().all(|m| !m) {
                    return Some(i);
                }
                from = i + 1;
            }
            None
        })
        .min()
}

#[derive(Debug, Clone)]
pub struct Nlu {
    lexicons: Lexicons,
    restate_threshold: f64,
}

pub const DEFAULT_RESTATE_THRESHOLD: f64 = 0.45;

impl Default for Nlu {
    fn default() -> Self {
        Nlu::new(Lexicons::default(), DEFAULT_RESTATE_THRESHOLD)
    }
}

impl Nlu {
    pub fn new(lexicons: Lexicons, restate_threshold: f64) -> Self {
        Nlu {
            lexicons,
            restate_threshold,
        }
    }

    pub fn lexicons(&self) -> &Lexicons {
        &self.lexicons
    }

    pub fn restate_threshold(&self) -> f64 {
        self.restate_threshold
    }

    pub fn analyze(
        &self,
        utterance: &UserUtterance,
        registry: &TopicRegistry,
        gazetteer: &Gazetteer,
    ) -> NluResult {
        let tokens = text::tokens(&utterance.text);
        let alias_phrases = registry.alias_phrases();
        let topic_spans = longest_spans(
            &tokens,
            alias_phrases.iter().map(|(p, t)| (p.as_slice(), t)),
        );
        let mut topics: Vec<Topic> = Vec::new();
        for (_, _, t) in &topic_spans {
            if !topics.contains(t) {
                topics.push((*t).clone());
            }
        }
        let mut topic_mask = vec![false; tokens.len()];
        for (s, e, _) in &topic_spans {
            topic_mask[*s..*e].iter_mut().for_each(|m| *m = true);
        }
        let entities = gazetteer.find(&utterance.text);

        let needs_restate = utterance.asr_confidence < self.restate_threshold;
        let intent = if needs_restate {
            Intent::Unknown
        } else {
            self.classify(&tokens, &topics, &topic_mask)
        };
        NluResult {
            tokens,
            intent,
            topics,
            entities,
            needs_restate,
        }
    }

    fn classify(&self, toks: &[String], topics: &[Topic], topic_mask: &[bool]) -> Intent {
        let lx = &self.lexicons;
        let no_mask = vec![false; toks.len()];
        if toks.is_empty() {
            return Intent::Unknown;
        }

        if let Some(i) = find_any(toks, &lx.stop, topic_mask) {
            let negated = i > 0 && matches!(toks[i - 1].as_str(), "don't" | "dont" | "never" | "not");
            if !negated {
                return Intent::StopRequest;
            }
        }

        if let Some(intent) = self.bare_response(toks) {
            return intent;
        }

        let story_at = find_any(toks, &lx.story, topic_mask);
        let game_at = find_any(toks, &lx.game, topic_mask);
        match (story_at, game_at) {
            (Some(s), Some(g)) if g < s => return Intent::GameRequest(self.game_kind(toks, topic_mask)),
            (Some(_), _) => return Intent::StoryRequest,
            (None, Some(_)) => return Intent::GameRequest(self.game_kind(toks, topic_mask)),
            (None, None) => {}
        }

        if let Some(first) = topics.first() {
            let cued = find_any(toks, &lx.topic_request, &no_mask).is_some();
            let bare = toks.iter().zip(topic_mask).all(|(t, &in_topic)| {
                in_topic || text::is_stopword(t) || lx.topic_filler.contains(t)
            });
            if cued || bare {
                return Intent::TopicRequest(first.clone());
            }
        }

        let lead = toks[0].as_str();
        let wh = lx.question_words.iter().any(|w| w == lead);
        let inverted = lx.auxiliaries.iter().any(|w| w == lead) && toks.len() > 1;
        if wh || inverted {
            return Intent::EntityQuery(toks.join(" "));
        }

        if lx.first_person.iter().any(|w| w == lead) {
            return Intent::SelfDisclosure;
        }
        Intent::Unknown
    }

    /// Affirm/Deny when the utterance is made only of response phrases and
    /// filler. Deny wins if both kinds appear.
    fn bare_response(&self, toks: &[String]) -> Option<Intent> {
        let lx = &self.lexicons;
        let (mut affirm, mut deny) = (false, false);
        let mut i = 0;
        'outer: while i < toks.len() {
            for (list, flag) in [(&lx.deny, 1u8), (&lx.affirm, 2u8), (&lx.filler, 0u8)] {
                if let Some(p) = list
                    .iter()
                    .find(|p| toks.len() - i >= p.len() && toks[i..i + p.len()] == p[..])
                {
                    match flag {
                        1 => deny = true,
                        2 => affirm = true,
                        _ => {}
                    }
                    i += p.len();
                    continue 'outer;
                }
            }
            return None;
        }
        if deny {
            Some(Intent::Deny)
        } else if affirm {
            Some(Intent::Affirm)
        } else {
            None
        }
    }

    fn game_kind(&self, toks: &[String], mask: &[bool]) -> Option<GameKind> {
        self.lexicons
            .game_kinds
            .iter()
            .filter_map(|(p, k)| find_any(toks, std::slice::from_ref(p), mask).map(|i| (i, *k)))
            .min_by_key(|(i, _)| *i)
            .map(|(_, k)| k)
    }
}
