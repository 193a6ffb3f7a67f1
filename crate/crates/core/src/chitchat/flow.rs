//! Per-topic flow graphs.
//!
//! A flow is a directed graph of prompts. Each state lists guarded
//! transitions that are tried in order against the user's reply; the first
//! one that holds picks the next state. A state without a matching
//! transition (and no `default`) ends the flow: the topic is exhausted.
//!
//! Prompts may contain slots, filled at render time from a [`FlowEnv`]:
//!
//! | slot        | filled with                                  |
//! |-------------|----------------------------------------------|
//! | `{topic}`   | the topic's spoken form                       |
//! | `{trivia}`  | an unused trivia item in the trivia frame     |
//! | `{elicit}`  | an unused opinion-elicitation prompt          |
//! | `{entity}`  | the entity most recently in focus             |
//! | `{keyword}` | a salient word from the user's last utterance |
//!
//! A slot that cannot be filled skips its state along the state's default
//! transition.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::activity::Expects;
use crate::content::{PackError, Topic, TopicRegistry};
use crate::nlu::{IntentKind, NluResult};
use crate::text;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    KeywordMatch(Vec<String>),
    IntentIs(IntentKind),
    EntityPresent,
    CallableResult(String),
    Default,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionSpec {
    pub cond: Condition,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowStateSpec {
    pub id: String,
    pub prompt: String,
    #[serde(default)]
    pub expects: Expects,
    #[serde(default)]
    pub transitions: Vec<TransitionSpec>,
}

/// Flow record as stored in a content pack.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    pub topic: String,
    pub start: String,
    pub states: Vec<FlowStateSpec>,
}

/// A filled content slot: rendered text plus the content it consumed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotFill {
    pub text: String,
    pub source_id: Option<String>,
}

impl SlotFill {
    pub fn plain(text: impl Into<String>) -> Self {
        SlotFill {
            text: text.into(),
            source_id: None,
        }
    }
}

/// Read-only view of session and store used to fill slots and evaluate
/// named predicates. Implementations must be deterministic.
pub trait FlowEnv {
    fn spoken_topic(&self, topic: &Topic) -> String;
    fn trivia(&self, topic: &Topic) -> Option<SlotFill>;
    fn elicit(&self, topic: &Topic) -> Option<SlotFill>;
    fn entity(&self, nlu: &NluResult) -> Option<String>;
    fn keyword(&self, nlu: &NluResult) -> Option<String>;
}

pub type Predicate = fn(&NluResult, &Topic, &dyn FlowEnv) -> bool;

/// Named predicates available to `callable_result` conditions.
#[derive(Clone)]
pub struct PredicateTable {
    table: HashMap<String, Predicate>,
}

impl fmt::Debug for PredicateTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut names: Vec<&String> = self.table.keys().collect();
        names.sort();
        f.debug_struct("PredicateTable").field("names", &names).finish()
    }
}

impl PredicateTable {
    pub fn empty() -> Self {
        PredicateTable {
            table: HashMap::new(),
        }
    }

    pub fn register(&mut self, name: &str, p: Predicate) {
        self.table.insert(name.to_string(), p);
    }

    pub fn get(&self, name: &str) -> Option<Predicate> {
        self.table.get(name).copied()
    }
}

impl Default for PredicateTable {
    /// Built-ins: `trivia_available`, `elicit_available`,
    /// `keyword_available`, `long_reply` (five or more tokens).
    fn default() -> Self {
        let mut t = PredicateTable::empty();
        t.register("trivia_available", |_, topic, env| env.trivia(topic).is_some());
        t.register("elicit_available", |_, topic, env| env.elicit(topic).is_some());
        t.register("keyword_available", |nlu, _, env| env.keyword(nlu).is_some());
        t.register("long_reply", |nlu, _, _| nlu.tokens.len() >= 5);
        t
    }
}

const SLOTS: [&str; 5] = ["topic", "trivia", "elicit", "entity", "keyword"];

#[derive(Debug, Clone)]
enum Cond {
    Keywords(Vec<Vec<String>>),
    Intent(IntentKind),
    EntityPresent,
    Callable(Predicate),
    Default,
}

#[derive(Debug, Clone)]
pub struct FlowState {
    pub id: String,
    pub prompt: String,
    pub expects: Expects,
    transitions: Vec<(Cond, usize)>,
}

impl FlowState {
    fn default_target(&self) -> Option<usize> {
        self.transitions
            .iter()
            .find(|(c, _)| matches!(c, Cond::Default))
            .map(|&(_, t)| t)
    }
}

/// Validated, immutable flow graph.
#[derive(Debug, Clone)]
pub struct FlowGraph {
    topic: Topic,
    start: usize,
    states: Vec<FlowState>,
    by_id: HashMap<String, usize>,
}

/// Result of moving through a flow.
#[derive(Debug, Clone, PartialEq)]
pub enum Advance {
    Next {
        state_id: String,
        text: String,
        expects: Expects,
        /// Content consumed by slots.
        consumed: Vec<String>,
        /// Every state entered, including ones skipped over.
        path: Vec<String>,
    },
    Exhausted {
        /// States skipped before running out.
        path: Vec<String>,
    },
}

impl FlowGraph {
    pub fn new(spec: &FlowSpec, registry: &TopicRegistry, predicates: &PredicateTable) -> Result<Self, PackError> {
        let invalid = |reason: String| PackError::InvalidFlow {
            topic: spec.topic.clone(),
            reason,
        };
        let topic = registry
            .lookup(&spec.topic)
            .cloned()
            .ok_or_else(|| invalid("topic is not registered".into()))?;
        let mut by_id = HashMap::new();
        for (i, s) in spec.states.iter().enumerate() {
            if s.id.trim().is_empty() {
                return Err(invalid(format!("state {i} has an empty id")));
            }
            if by_id.insert(s.id.clone(), i).is_some() {
                return Err(invalid(format!("duplicate state id {:?}", s.id)));
            }
        }
        let start = *by_id
            .get(&spec.start)
            .ok_or_else(|| invalid(format!("start state {:?} does not exist", spec.start)))?;

        let mut states = Vec::with_capacity(spec.states.len());
        for s in &spec.states {
            if s.prompt.trim().is_empty() {
                return Err(invalid(format!("state {:?} has an empty prompt", s.id)));
            }
            for slot in slot_names(&s.prompt) {
                if !SLOTS.contains(&slot.as_str()) {
                    return Err(invalid(format!("state {:?} uses unknown slot {{{slot}}}", s.id)));
                }
            }
            let mut transitions = Vec::with_capacity(s.transitions.len());
            for (k, t) in s.transitions.iter().enumerate() {
                let target = *by_id.get(&t.target).ok_or_else(|| {
                    invalid(format!("state {:?} transitions to missing state {:?}", s.id, t.target))
                })?;
                let cond = match &t.cond {
                    Condition::KeywordMatch(words) => {
                        let phrases: Vec<Vec<String>> = words
                            .iter()
                            .map(|w| text::tokens(w))
                            .filter(|p| !p.is_empty())
                            .collect();
                        if phrases.is_empty() {
                            return Err(invalid(format!("state {:?} has an empty keyword set", s.id)));
                        }
                        Cond::Keywords(phrases)
                    }
                    Condition::IntentIs(kind) => Cond::Intent(*kind),
                    Condition::EntityPresent => Cond::EntityPresent,
                    Condition::CallableResult(name) => {
                        let p = predicates
                            .get(name)
                            .ok_or_else(|| invalid(format!("state {:?} uses unknown predicate {name:?}", s.id)))?;
                        Cond::Callable(p)
                    }
                    Condition::Default => {
                        if k + 1 != s.transitions.len() {
                            return Err(invalid(format!("state {:?}: default must be the last transition", s.id)));
                        }
                        Cond::Default
                    }
                };
                transitions.push((cond, target));
            }
            states.push(FlowState {
                id: s.id.clone(),
                prompt: s.prompt.clone(),
                expects: s.expects,
                transitions,
            });
        }

        let graph = FlowGraph {
            topic,
            start,
            states,
            by_id,
        };
        let reachable = graph.reachable();
        if let Some(s) = graph.states.iter().enumerate().find(|(i, _)| !reachable.contains(i)) {
            return Err(invalid(format!("state {:?} is unreachable from the start state", s.1.id)));
        }
        if graph.states.iter().all(|s| s.default_target().is_some()) {
            return Err(invalid("every state has a default transition, so the flow can never end".into()));
        }
        Ok(graph)
    }

    fn reachable(&self) -> HashSet<usize> {
        let mut seen = HashSet::from([self.start]);
        let mut queue = VecDeque::from([self.start]);
        while let Some(i) = queue.pop_front() {
            for &(_, t) in &self.states[i].transitions {
                if seen.insert(t) {
                    queue.push_back(t);
                }
            }
        }
        seen
    }

    pub fn topic(&self) -> &Topic {
        &self.topic
    }

    pub fn start_id(&self) -> &str {
        &self.states[self.start].id
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, id: &str) -> Option<&FlowState> {
        self.by_id.get(id).map(|&i| &self.states[i])
    }

    pub fn states(&self) -> impl Iterator<Item = &FlowState> {
        self.states.iter()
    }

    /// True if some transition leads from `from` to `to`.
    pub fn has_edge(&self, from: &str, to: &str) -> bool {
        match (self.by_id.get(from), self.by_id.get(to)) {
            (Some(&f), Some(&t)) => self.states[f].transitions.iter().any(|&(_, x)| x == t),
            _ => false,
        }
    }

    /// Renders the start state.
    pub fn enter(&self, env: &dyn FlowEnv, nlu: &NluResult) -> Advance {
        self.land(self.start, env, nlu, Vec::new())
    }

    /// Moves from `position` on the user's reply.
    pub fn advance(&self, position: &str, nlu: &NluResult, env: &dyn FlowEnv) -> Advance {
        let Some(&cur) = self.by_id.get(position) else {
            return Advance::Exhausted { path: Vec::new() };
        };
        let target = self.states[cur]
            .transitions
            .iter()
            .find(|(c, _)| self.holds(c, nlu, env))
            .map(|&(_, t)| t);
        match target {
            Some(t) => self.land(t, env, nlu, Vec::new()),
            None => Advance::Exhausted { path: Vec::new() },
        }
    }

    fn holds(&self, cond: &Cond, nlu: &NluResult, env: &dyn FlowEnv) -> bool {
        match cond {
            Cond::Keywords(phrases) => phrases.iter().any(|p| text::find_phrase(&nlu.tokens, p, 0).is_some()),
            Cond::Intent(kind) => nlu.intent.kind() == *kind,
            Cond::EntityPresent => !nlu.entities.is_empty(),
            Cond::Callable(p) => p(nlu, &self.topic, env),
            Cond::Default => true,
        }
    }

    /// Renders `state`, following default transitions past states whose
    /// slots cannot be filled.
    fn land(&self, mut state: usize, env: &dyn FlowEnv, nlu: &NluResult, mut path: Vec<String>) -> Advance {
        for _ in 0..=self.states.len() {
            let s = &self.states[state];
            path.push(s.id.clone());
            match self.render(&s.prompt, env, nlu) {
                Some((text, consumed)) => {
                    return Advance::Next {
                        state_id: s.id.clone(),
                        text,
                        expects: s.expects,
                        consumed,
                        path,
                    }
                }
                None => match s.default_target() {
                    Some(next) => state = next,
                    None => return Advance::Exhausted { path },
                },
            }
        }
        Advance::Exhausted { path }
    }

    fn render(&self, template: &str, env: &dyn FlowEnv, nlu: &NluResult) -> Option<(String, Vec<String>)> {
        let mut out = String::with_capacity(template.len());
        let mut consumed = Vec::new();
        let mut rest = template;
        while let Some(open) = rest.find('{') {
            out.push_str(&rest[..open]);
            let after = &rest[open + 1..];
            let Some(close) = after.find('}') else {
                out.push_str(&rest[open..]);
                rest = "";
                break;
            };
            let fill = match &after[..close] {
                "topic" => SlotFill::plain(env.spoken_topic(&self.topic)),
                "trivia" => env.trivia(&self.topic)?,
                "elicit" => env.elicit(&self.topic)?,
                "entity" => SlotFill::plain(env.entity(nlu)?),
                "keyword" => SlotFill::plain(env.keyword(nlu)?),
                other => SlotFill::plain(format!("{{{other}}}")),
            };
            out.push_str(&fill.text);
            consumed.extend(fill.source_id);
            rest = &after[close + 1..];
        }
        out.push_str(rest);
        let text = out.split_whitespace().collect::<Vec<_>>().join(" ");
        (!text.is_empty()).then_some((text, consumed))
    }
}

fn slot_names(template: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        let after = &rest[open + 1..];
        match after.find('}') {
            Some(close) => {
                out.push(after[..close].to_string());
                rest = &after[close + 1..];
            }
            None => break,
        }
    }
    out
}
