//! Question answering over knowledge providers, and the fall-back ladder
//! used when no activity has anything to say.
//!
//! The ladder's rungs are tried top to bottom; the first applicable one
//! produces the turn:
//!
//! 1. `qa_lookup` — answer the user's question from a provider
//! 2. `article_first_sentence` — summary sentence for an entity in focus
//! 3. `keyword_followup` — "What can you tell me about X?"
//! 4. `opinion_elicitation` — "I like X because Y. How do you feel about X?"
//! 5. `topic_menu` — suggest three topics not yet explored (always applies)

use std::collections::{HashMap, HashSet};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::activity::{Activity, Expects};
use crate::content::{ContentStore, Genre, PackError, Topic, TopicRegistry};
use crate::nlu::{Intent, NluResult};
use crate::text;

pub const DEFAULT_PROVIDER_BUDGET: Duration = Duration::from_millis(1500);

/// A local knowledge record as stored in a content pack.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KbRecord {
    pub id: String,
    pub entity: String,
    #[serde(default)]
    pub aliases: Vec<String>,
    /// What the answer is about, e.g. `birth_date`.
    pub attribute: String,
    /// Words that mark a question as asking for this attribute.
    #[serde(default)]
    pub cues: Vec<String>,
    pub answer_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary_first_sentence: Option<String>,
    #[serde(default)]
    pub topics: Vec<String>,
}

impl KbRecord {
    pub fn keys(&self) -> Vec<String> {
        let mut keys: Vec<String> = std::iter::once(&self.entity)
            .chain(&self.aliases)
            .map(|s| text::entity_key(s))
            .filter(|k| !k.is_empty())
            .collect();
        keys.sort();
        keys.dedup();
        keys
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KbAnswer {
    pub text: String,
    pub source_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProviderError {
    #[error("provider {0} timed out")]
    Timeout(String),
    #[error("provider {provider} failed: {reason}")]
    Failed { provider: String, reason: String },
}

/// What a provider sees of the user's question.
#[derive(Debug, Clone, Copy)]
pub struct KbQuery<'a> {
    pub text: &'a str,
    pub tokens: &'a [String],
    /// Canonical entity names recognized in the question.
    pub entities: &'a [String],
}

/// A source of answers. Lookups must be side-effect free and safe to call
/// from many sessions at once.
pub trait KnowledgeProvider: Send + Sync {
    fn name(&self) -> &str;
    fn answer(&self, query: &KbQuery<'_>) -> Result<Option<KbAnswer>, ProviderError>;
    /// One-sentence description of an entity.
    fn summary(&self, entity: &str) -> Result<Option<KbAnswer>, ProviderError>;
}

/// In-memory provider over pack knowledge records.
#[derive(Debug, Clone, Default)]
pub struct LocalKb {
    records: Vec<KbRecord>,
    by_key: HashMap<String, Vec<usize>>,
}

impl LocalKb {
    pub fn new(records: Vec<KbRecord>, registry: &TopicRegistry) -> Result<Self, PackError> {
        let mut by_key: HashMap<String, Vec<usize>> = HashMap::new();
        let mut ids = HashSet::new();
        for (i, r) in records.iter().enumerate() {
            let invalid = |reason: &str| PackError::InvalidKb {
                id: r.id.clone(),
                reason: reason.to_string(),
            };
            if r.id.trim().is_empty() {
                return Err(invalid("id is empty"));
            }
            if !ids.insert(r.id.clone()) {
                return Err(PackError::DuplicateId(r.id.clone()));
            }
            if r.answer_text.trim().is_empty() {
                return Err(invalid("answer_text is empty"));
            }
            if r.summary_first_sentence.as_deref().is_some_and(|s| s.trim().is_empty()) {
                return Err(invalid("summary_first_sentence is empty"));
            }
            if let Some(t) = r.topics.iter().find(|t| registry.lookup(t).is_none()) {
                return Err(invalid(&format!("unknown topic {t:?}")));
            }
            let keys = r.keys();
            if keys.is_empty() {
                return Err(invalid("entity is empty"));
            }
            for k in keys {
                by_key.entry(k).or_default().push(i);
            }
        }
        Ok(LocalKb { records, by_key })
    }

    pub fn records(&self) -> &[KbRecord] {
        &self.records
    }

    /// (alias, canonical) pairs for the NLU gazetteer.
    pub fn aliases(&self) -> impl Iterator<Item = (String, String)> + '_ {
        self.records.iter().flat_map(|r| {
            std::iter::once(&r.entity)
                .chain(&r.aliases)
                .map(move |a| (a.clone(), r.entity.clone()))
        })
    }

    fn for_entity(&self, entity: &str) -> impl Iterator<Item = &KbRecord> {
        self.by_key
            .get(&text::entity_key(entity))
            .into_iter()
            .flatten()
            .map(|&i| &self.records[i])
    }
}

impl KnowledgeProvider for LocalKb {
    fn name(&self) -> &str {
        "local_kb"
    }

    /// Answers when the question names a known entity and contains one of
    /// the record's attribute cues.
    fn answer(&self, q: &KbQuery<'_>) -> Result<Option<KbAnswer>, ProviderError> {
        let mut seen = HashSet::new();
        for e in q.entities {
            for r in self.for_entity(e) {
                if !seen.insert(&r.id) {
                    continue;
                }
                let cued = r
                    .cues
                    .iter()
                    .map(|c| text::tokens(c))
                    .any(|c| text::find_phrase(q.tokens, &c, 0).is_some());
                if cued {
                    return Ok(Some(KbAnswer {
                        text: r.answer_text.clone(),
                        source_id: r.id.clone(),
                    }));
                }
            }
        }
        Ok(None)
    }

    fn summary(&self, entity: &str) -> Result<Option<KbAnswer>, ProviderError> {
        Ok(self.for_entity(entity).find_map(|r| {
            r.summary_first_sentence.as_ref().map(|s| KbAnswer {
                text: s.clone(),
                source_id: format!("{}#summary", r.id),
            })
        }))
    }
}

fn within_budget<T>(
    provider: &dyn KnowledgeProvider,
    budget: Duration,
    f: impl FnOnce() -> Result<Option<T>, ProviderError>,
) -> Result<Option<T>, ProviderError> {
    let start = Instant::now();
    let out = f()?;
    if start.elapsed() > budget {
        return Err(ProviderError::Timeout(provider.name().to_string()));
    }
    Ok(out)
}

/// Asks providers in order; the first answer wins. A provider that fails
/// or overruns `budget` counts as having no answer.
pub fn answer_query(query: &KbQuery<'_>, providers: &[&dyn KnowledgeProvider], budget: Duration) -> Option<KbAnswer> {
    if query.text.trim().is_empty() {
        return None;
    }
    providers
        .iter()
        .find_map(|p| within_budget(*p, budget, || p.answer(query)).ok().flatten())
}

/// First summary for `entity` across providers, in order.
pub fn summarize_entity(entity: &str, providers: &[&dyn KnowledgeProvider], budget: Duration) -> Option<KbAnswer> {
    providers
        .iter()
        .find_map(|p| within_budget(*p, budget, || p.summary(entity)).ok().flatten())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rung {
    QaLookup,
    ArticleFirstSentence,
    KeywordFollowup,
    OpinionElicitation,
    TopicMenu,
}

impl Rung {
    pub const LADDER: [Rung; 5] = [
        Rung::QaLookup,
        Rung::ArticleFirstSentence,
        Rung::KeywordFollowup,
        Rung::OpinionElicitation,
        Rung::TopicMenu,
    ];
}

/// Everything the ladder needs to know about the conversation.
#[derive(Debug, Clone, Copy)]
pub struct LadderInput<'a> {
    pub nlu: &'a NluResult,
    /// Most recent last.
    pub focus_entities: &'a [String],
    pub current_topic: Option<&'a Topic>,
    pub used: &'a HashSet<String>,
    /// Topics already talked about this session.
    pub explored: &'a HashSet<Topic>,
    /// Turn at which each topic was last suggested.
    pub offered_at: &'a HashMap<Topic, u64>,
    /// Topics that have chit-chat, game or story material.
    pub with_content: &'a HashSet<Topic>,
    /// Words that never make a good follow-up subject.
    pub excluded_words: &'a HashSet<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FallbackTurn {
    pub text: String,
    pub source_id: String,
    pub expects: Expects,
    pub rung: Rung,
    /// Rungs attempted, in order, ending with `rung`.
    pub trace: Vec<Rung>,
    /// Topics suggested by this turn, first one preferred.
    pub offered: Vec<Topic>,
    /// True when `source_id` names content that must not be replayed.
    pub consumes: bool,
}

/// Tokens too generic to ask about.
const GENERIC_WORDS: &[&str] = &[
    "anything", "cool", "everything", "good", "great", "guess", "interesting", "know", "lot",
    "maybe", "nice", "nothing", "okay", "really", "something", "stuff", "talk", "tell", "thing",
    "things", "think", "want", "well", "yeah",
];

pub struct FallbackLadder<'a> {
    pub store: &'a ContentStore,
    pub providers: &'a [&'a dyn KnowledgeProvider],
    pub budget: Duration,
}

impl FallbackLadder<'_> {
    /// Runs the ladder from `start` down. Never fails; the topic menu is
    /// total.
    pub fn turn(&self, input: &LadderInput<'_>, start: Rung) -> FallbackTurn {
        let mut trace = Vec::new();
        for rung in Rung::LADDER.into_iter().filter(|r| *r >= start) {
            trace.push(rung);
            let hit = match rung {
                Rung::QaLookup => self.qa(input),
                Rung::ArticleFirstSentence => self.article(input),
                Rung::KeywordFollowup => keyword_followup(input),
                Rung::OpinionElicitation => self.opinion(input),
                Rung::TopicMenu => Some(self.menu(input)),
            };
            if let Some(mut t) = hit {
                t.rung = rung;
                t.trace = trace;
                return t;
            }
        }
        unreachable!("topic menu always applies")
    }

    fn qa(&self, input: &LadderInput<'_>) -> Option<FallbackTurn> {
        let Intent::EntityQuery(q) = &input.nlu.intent else {
            return None;
        };
        let query = KbQuery {
            text: q,
            tokens: &input.nlu.tokens,
            entities: &input.nlu.entities,
        };
        let a = answer_query(&query, self.providers, self.budget)?;
        Some(partial(a.text, a.source_id, Expects::None, true))
    }

    fn article(&self, input: &LadderInput<'_>) -> Option<FallbackTurn> {
        let candidates = input.nlu.entities.iter().chain(input.focus_entities.iter().rev());
        for e in candidates {
            if let Some(a) = summarize_entity(e, self.providers, self.budget) {
                if !input.used.contains(&a.source_id) {
                    return Some(partial(a.text, a.source_id, Expects::None, true));
                }
            }
        }
        None
    }

    fn opinion(&self, input: &LadderInput<'_>) -> Option<FallbackTurn> {
        let topic = input.current_topic.or(input.nlu.topics.first())?;
        let spoken = self.store.registry().spoken(topic);
        let reason = self
            .store
            .by_genre(Genre::Prompt, Some(topic))
            .into_iter()
            .filter(|it| it.handcrafted_for == Some(Activity::Search))
            .find(|it| !input.used.contains(&it.id))
            .map(|it| (it.id.clone(), it.text.trim().to_string()))
            .or_else(|| {
                let id = format!("opinion-generic#{topic}");
                (!input.used.contains(&id))
                    .then(|| (id, format!("I like {spoken} because there is always something new to learn about it.")))
            })?;
        let mut t = partial(
            format!("{} How do you feel about {spoken}?", reason.1),
            reason.0,
            Expects::Open,
            true,
        );
        t.offered = vec![topic.clone()];
        Some(t)
    }

    fn menu(&self, input: &LadderInput<'_>) -> FallbackTurn {
        let offered = topic_menu(self.store.registry(), input, 3);
        let names: Vec<String> = offered.iter().map(|t| self.store.registry().spoken(t)).collect();
        let text = match names.as_slice() {
            [] => "What would you like to talk about?".to_string(),
            [one] => format!("We could talk about {one}. What would you like to talk about?"),
            [init @ .., last] => format!(
                "I can talk about lots of things, such as {}, or {last}. What would you like to talk about?",
                init.join(", ")
            ),
        };
        let mut t = partial(text, "topic-menu".to_string(), Expects::Open, false);
        t.offered = offered;
        t
    }
}

fn partial(text: String, source_id: String, expects: Expects, consumes: bool) -> FallbackTurn {
    FallbackTurn {
        text,
        source_id,
        expects,
        rung: Rung::TopicMenu,
        trace: Vec::new(),
        offered: Vec::new(),
        consumes,
    }
}

fn keyword_followup(input: &LadderInput<'_>) -> Option<FallbackTurn> {
    let word = salient_keyword(&input.nlu.tokens, input.excluded_words)?;
    let id = format!("followup#{word}");
    if input.used.contains(&id) {
        return None;
    }
    Some(partial(format!("What can you tell me about {word}?"), id, Expects::Open, true))
}

/// The last token that is a plausible subject: alphabetic, at least three
/// letters, not a stopword, generic word, or excluded word.
pub fn salient_keyword(tokens: &[String], excluded: &HashSet<String>) -> Option<String> {
    tokens
        .iter()
        .rev()
        .find(|t| {
            t.chars().count() >= 3
                && t.chars().all(|c| c.is_alphabetic() || c == '-')
                && !text::is_stopword(t)
                && !GENERIC_WORDS.contains(&t.as_str())
                && !excluded.contains(*t)
        })
        .cloned()
}

/// Up to `n` unexplored topics: never-offered before least-recently
/// offered, topics with material before those without, then registry
/// order. Falls back to explored topics if too few remain.
pub fn topic_menu(registry: &TopicRegistry, input: &LadderInput<'_>, n: usize) -> Vec<Topic> {
    let key = |t: &Topic| {
        (
            input.offered_at.get(t).map_or(0, |&turn| turn + 1),
            !input.with_content.contains(t),
            registry.position(t).unwrap_or(usize::MAX),
        )
    };
    let mut fresh: Vec<&Topic> = registry.topics().filter(|t| !input.explored.contains(*t)).collect();
    fresh.sort_by_key(|t| key(t));
    let mut out: Vec<Topic> = fresh.into_iter().take(n).cloned().collect();
    if out.len() < n {
        let mut rest: Vec<&Topic> = registry.topics().filter(|t| input.explored.contains(*t)).collect();
        rest.sort_by_key(|t| key(t));
        out.extend(rest.into_iter().take(n - out.len()).cloned());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::content::ContentItem;

    fn casals() -> KbRecord {
        KbRecord {
            id: "kb-casals-born".into(),
            entity: "Pau Casals".into(),
            aliases: vec!["pablo casals".into()],
            attribute: "birth_date".into(),
            cues: vec!["born".into(), "birthday".into()],
            answer_text: "Pau Casals was born on December 29, 1876.".into(),
            summary_first_sentence: Some("Pau Casals was a Catalan cellist and conductor.".into()),
            topics: vec!["Music".into()],
        }
    }

    fn kb(records: Vec<KbRecord>) -> LocalKb {
        LocalKb::new(records, &TopicRegistry::builtin()).unwrap()
    }

    fn question(text: &str, entities: &[&str]) -> (Vec<String>, Vec<String>) {
        (text::tokens(text), entities.iter().map(|s| s.to_string()).collect())
    }

    #[test]
    fn answers_birth_date_question() {
        let kb = kb(vec![casals()]);
        let (tokens, entities) = question("when was pablo casals born", &["Pau Casals"]);
        let q = KbQuery {
            text: "when was pablo casals born",
            tokens: &tokens,
            entities: &entities,
        };
        let a = answer_query(&q, &[&kb], DEFAULT_PROVIDER_BUDGET).unwrap();
        assert_eq!(a.text, "Pau Casals was born on December 29, 1876.");
        assert_eq!(a.source_id, "kb-casals-born");
    }

    #[test]
    fn unknown_entity_has_no_answer() {
        let kb = kb(vec![casals()]);
        let (tokens, entities) = question("when was ada lovelace born", &["Ada Lovelace"]);
        let q = KbQuery {
            text: "when was ada lovelace born",
            tokens: &tokens,
            entities: &entities,
        };
        assert_eq!(answer_query(&q, &[&kb], DEFAULT_PROVIDER_BUDGET), None);
        assert_eq!(answer_query(&q, &[], DEFAULT_PROVIDER_BUDGET), None);
    }

    #[test]
    fn earlier_provider_wins() {
        let first = kb(vec![casals()]);
        let mut other = casals();
        other.id = "kb-other".into();
        other.answer_text = "Someone else's answer.".into();
        let second = kb(vec![other]);
        let (tokens, entities) = question("when was pau casals born", &["Pau Casals"]);
        let q = KbQuery {
            text: "when was pau casals born",
            tokens: &tokens,
            entities: &entities,
        };
        assert_eq!(answer_query(&q, &[&first, &second], DEFAULT_PROVIDER_BUDGET).unwrap().source_id, "kb-casals-born");
        assert_eq!(answer_query(&q, &[&second, &first], DEFAULT_PROVIDER_BUDGET).unwrap().source_id, "kb-other");
    }

    struct Broken;
    impl KnowledgeProvider for Broken {
        fn name(&self) -> &str {
            "broken"
        }
        fn answer(&self, _: &KbQuery<'_>) -> Result<Option<KbAnswer>, ProviderError> {
            Err(ProviderError::Failed {
                provider: "broken".into(),
                reason: "offline".into(),
            })
        }
        fn summary(&self, _: &str) -> Result<Option<KbAnswer>, ProviderError> {
            Err(ProviderError::Timeout("broken".into()))
        }
    }

    struct Slow;
    impl KnowledgeProvider for Slow {
        fn name(&self) -> &str {
            "slow"
        }
        fn answer(&self, _: &KbQuery<'_>) -> Result<Option<KbAnswer>, ProviderError> {
            std::thread::sleep(Duration::from_millis(30));
            Ok(Some(KbAnswer {
                text: "late".into(),
                source_id: "slow".into(),
            }))
        }
        fn summary(&self, _: &str) -> Result<Option<KbAnswer>, ProviderError> {
            Ok(None)
        }
    }

    #[test]
    fn failing_and_slow_providers_are_skipped() {
        let local = kb(vec![casals()]);
        let (tokens, entities) = question("when was pau casals born", &["Pau Casals"]);
        let q = KbQuery {
            text: "when was pau casals born",
            tokens: &tokens,
            entities: &entities,
        };
        let a = answer_query(&q, &[&Broken, &Slow, &local], Duration::from_millis(5)).unwrap();
        assert_eq!(a.source_id, "kb-casals-born");
        let a = answer_query(&q, &[&Slow, &local], Duration::from_secs(5)).unwrap();
        assert_eq!(a.source_id, "slow");
    }

    #[test]
    fn kb_validation() {
        let reg = TopicRegistry::builtin();
        let mut bad = casals();
        bad.answer_text = " ".into();
        assert!(LocalKb::new(vec![bad], &reg).is_err());
        assert_eq!(
            LocalKb::new(vec![casals(), casals()], &reg).unwrap_err(),
            PackError::DuplicateId("kb-casals-born".into())
        );
        let mut bad = casals();
        bad.topics = vec!["Knitting".into()];
        assert!(LocalKb::new(vec![bad], &reg).is_err());
    }

    struct Fixture {
        store: ContentStore,
        kb: LocalKb,
        used: HashSet<String>,
        explored: HashSet<Topic>,
        offered_at: HashMap<Topic, u64>,
        with_content: HashSet<Topic>,
        excluded: HashSet<String>,
    }

    impl Fixture {
        fn new() -> Self {
            let opinion = ContentItem::new(
                "op-pirates",
                "I like pirates because they had the best hats.",
                vec![Topic::from("Pirates")],
                Genre::Prompt,
            )
            .handcrafted_for(Activity::Search);
            Fixture {
                store: ContentStore::from_items(TopicRegistry::builtin(), vec![opinion]).unwrap(),
                kb: kb(vec![casals()]),
                used: HashSet::new(),
                explored: HashSet::new(),
                offered_at: HashMap::new(),
                with_content: HashSet::new(),
                excluded: HashSet::new(),
            }
        }

        fn run(&self, nlu: &NluResult, focus: &[String], topic: Option<&Topic>) -> FallbackTurn {
            let providers: [&dyn KnowledgeProvider; 1] = [&self.kb];
            let ladder = FallbackLadder {
                store: &self.store,
                providers: &providers,
                budget: DEFAULT_PROVIDER_BUDGET,
            };
            ladder.turn(
                &LadderInput {
                    nlu,
                    focus_entities: focus,
                    current_topic: topic,
                    used: &self.used,
                    explored: &self.explored,
                    offered_at: &self.offered_at,
                    with_content: &self.with_content,
                    excluded_words: &self.excluded,
                },
                Rung::QaLookup,
            )
        }
    }

    fn utter(text: &str, intent: Intent) -> NluResult {
        let mut r = NluResult::with_intent(intent);
        r.tokens = text::tokens(text);
        r
    }

    #[test]
    fn focus_entity_gets_summary() {
        let f = Fixture::new();
        let t = f.run(&utter("hmm", Intent::Unknown), &["Pau Casals".into()], None);
        assert_eq!(t.text, "Pau Casals was a Catalan cellist and conductor.");
        assert_eq!(t.rung, Rung::ArticleFirstSentence);
        assert_eq!(t.trace, [Rung::QaLookup, Rung::ArticleFirstSentence]);
        assert_eq!(t.source_id, "kb-casals-born#summary");
    }

    #[test]
    fn keyword_followup_question() {
        let f = Fixture::new();
        let t = f.run(&utter("i saw some pirates", Intent::SelfDisclosure), &[], None);
        assert_eq!(t.text, "What can you tell me about pirates?");
        assert_eq!(t.rung, Rung::KeywordFollowup);
    }

    #[test]
    fn opinion_then_menu() {
        let mut f = Fixture::new();
        let pirates = Topic::from("Pirates");
        let t = f.run(&utter("", Intent::Unknown), &[], Some(&pirates));
        assert_eq!(t.text, "I like pirates because they had the best hats. How do you feel about pirates?");
        assert_eq!(t.offered, vec![pirates.clone()]);
        f.used.insert(t.source_id);
        let t = f.run(&utter("", Intent::Unknown), &[], Some(&pirates));
        assert_eq!(t.source_id, "opinion-generic#Pirates");
        f.used.insert(t.source_id);
        let t = f.run(&utter("", Intent::Unknown), &[], Some(&pirates));
        assert_eq!(t.rung, Rung::TopicMenu);
        assert_eq!(t.trace, Rung::LADDER);
    }

    #[test]
    fn empty_context_menu_names_three_unexplored_topics() {
        let mut f = Fixture::new();
        f.explored.insert(Topic::from("Animals"));
        f.with_content.insert(Topic::from("Dinosaurs"));
        f.with_content.insert(Topic::from("Music"));
        f.offered_at.insert(Topic::from("Music"), 3);
        let t = f.run(&utter("", Intent::Unknown), &[], None);
        assert_eq!(t.rung, Rung::TopicMenu);
        assert_eq!(
            t.offered,
            vec![Topic::from("Dinosaurs"), Topic::from("Astronomy"), Topic::from("Board Games")]
        );
        assert_eq!(
            t.text,
            "I can talk about lots of things, such as dinosaurs, astronomy, or board games. What would you like to talk about?"
        );
    }

    #[test]
    fn hint_skips_upper_rungs() {
        let f = Fixture::new();
        let providers: [&dyn KnowledgeProvider; 1] = [&f.kb];
        let ladder = FallbackLadder {
            store: &f.store,
            providers: &providers,
            budget: DEFAULT_PROVIDER_BUDGET,
        };
        let nlu = utter("i saw some pirates", Intent::Unknown);
        let input = LadderInput {
            nlu: &nlu,
            focus_entities: &[],
            current_topic: None,
            used: &f.used,
            explored: &f.explored,
            offered_at: &f.offered_at,
            with_content: &f.with_content,
            excluded_words: &f.excluded,
        };
        let t = ladder.turn(&input, Rung::OpinionElicitation);
        assert_eq!(t.trace, [Rung::OpinionElicitation, Rung::TopicMenu]);
    }
}
