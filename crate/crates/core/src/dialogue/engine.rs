//! The turn loop.
//!
//! Each user turn goes through [`arbitrate`]; the chosen activity renders a
//! reply, or reports exhaustion and the engine rotates to the next content
//! slot on the same topic (flow, games, story, trivia), and finally to the
//! fall-back ladder. Every path ends in exactly one signed turn.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;
use std::time::{Duration, Instant};

use chrono::Utc;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::activity::{Activity, Expects, Signature};
use crate::chitchat::{self, Advance, FlowEnv, FlowGraph, FlowSpec, PredicateTable, SlotFill};
use crate::content::{ContentItem, ContentStore, Genre, PackDocument, PackError, Payload, Topic};
use crate::dialogue::rank::{rank, Candidate, RankWeights, Tier};
use crate::dialogue::{arbitrate, ActiveState, ChitchatMode, Decision, DialogueContext, SystemTurn};
use crate::games::{self, GameKind, GameOutcome, GameRules, GameState};
use crate::nlu::{Gazetteer, Intent, Lexicons, Nlu, NluResult, UserUtterance, DEFAULT_RESTATE_THRESHOLD};
use crate::search::{
    answer_query, salient_keyword, FallbackLadder, KbQuery, KbRecord, KnowledgeProvider, LadderInput, LocalKb,
    Rung, DEFAULT_PROVIDER_BUDGET,
};
use crate::storytelling::{self, StoryState, StoryStep, KEEP_GOING};

pub const BOT_NAME: &str = "Parlor";
pub const RESTATE_PROMPT: &str = "Sorry, I didn't catch that. Could you say it again?";
const STOP_ACK: &str = "Okay, let's do something else.";
const LEAVE_STORY: &str = "Okay, let's leave the story there.";

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    /// Root of every stochastic choice.
    pub seed: u64,
    pub weights: RankWeights,
    pub restate_threshold: f64,
    /// Restatement prompts allowed in a row before moving on.
    pub max_consecutive_restates: u32,
    pub provider_budget: Duration,
    /// Topics named in the greeting; drawn from the seed when unset.
    pub greeting_topics: Option<Vec<Topic>>,
    pub game_rules: GameRules,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            seed: 0,
            weights: RankWeights::default(),
            restate_threshold: DEFAULT_RESTATE_THRESHOLD,
            max_consecutive_restates: 2,
            provider_budget: DEFAULT_PROVIDER_BUDGET,
            greeting_topics: None,
            game_rules: GameRules::default(),
        }
    }
}

/// Content slots tried, in order, when a topic is entered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Flow,
    Games,
    Story,
    Trivia,
}

const SLOTS: [Slot; 4] = [Slot::Flow, Slot::Games, Slot::Story, Slot::Trivia];

const GAME_GENRES: [Genre; 4] = [Genre::WouldYouRather, Genre::Hypothetical, Genre::Riddle, Genre::Joke];

#[derive(Debug)]
struct Reply {
    text: String,
    signature: Signature,
    tier: Tier,
    expects: Expects,
    consumed: Vec<String>,
    trace: Vec<Rung>,
    offered: Vec<Topic>,
}

impl Reply {
    fn new(text: String, signature: Signature, tier: Tier, expects: Expects) -> Self {
        Reply {
            text,
            signature,
            tier,
            expects,
            consumed: Vec::new(),
            trace: Vec::new(),
            offered: Vec::new(),
        }
    }

    fn prefixed(mut self, prefix: Option<String>) -> Self {
        if let Some(p) = prefix {
            self.text = format!("{} {}", p.trim(), self.text);
        }
        self
    }
}

/// Shared, immutable dialogue engine. All per-conversation state lives in
/// [`DialogueContext`].
#[derive(Clone)]
pub struct Engine {
    store: ContentStore,
    flows: HashMap<Topic, FlowGraph>,
    kb: LocalKb,
    extra_providers: Vec<Arc<dyn KnowledgeProvider>>,
    nlu: Nlu,
    gazetteer: Gazetteer,
    config: EngineConfig,
    /// Topics with flow, trivia, game or story material.
    with_content: HashSet<Topic>,
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine")
            .field("items", &self.store.len())
            .field("flows", &self.flows.len())
            .field("kb_records", &self.kb.records().len())
            .field("config", &self.config)
            .finish()
    }
}

impl Engine {
    pub fn new(store: ContentStore, flows: &[FlowSpec], kb: Vec<KbRecord>, config: EngineConfig) -> Result<Self, PackError> {
        let predicates = PredicateTable::default();
        let mut graphs = HashMap::new();
        for spec in flows {
            let g = FlowGraph::new(spec, store.registry(), &predicates)?;
            if graphs.contains_key(g.topic()) {
                return Err(PackError::InvalidFlow {
                    topic: spec.topic.clone(),
                    reason: "topic already has a flow".into(),
                });
            }
            graphs.insert(g.topic().clone(), g);
        }
        let kb = LocalKb::new(kb, store.registry())?;
        let mut gazetteer = Gazetteer::new(store.gazetteer());
        gazetteer.extend(kb.aliases());
        let mut with_content: HashSet<Topic> = graphs.keys().cloned().collect();
        for item in store.items() {
            if matches!(item.genre, Genre::Trivia | Genre::Fact) || item.genre.is_game() || item.genre.is_story() {
                with_content.extend(item.topics.iter().cloned());
            }
        }
        Ok(Engine {
            nlu: Nlu::new(Lexicons::default(), config.restate_threshold),
            store,
            flows: graphs,
            kb,
            extra_providers: Vec::new(),
            gazetteer,
            config,
            with_content,
        })
    }

    pub fn from_document(doc: &PackDocument, config: EngineConfig) -> Result<Self, PackError> {
        let store = ContentStore::from_document(doc)?;
        let flows: Vec<FlowSpec> = doc.flows.iter().map(|(_, f)| f.clone()).collect();
        let kb = doc.kb.iter().map(|(_, r)| r.clone()).collect();
        Self::new(store, &flows, kb, config)
    }

    /// Engine over the bundled content packs.
    pub fn bundled(config: EngineConfig) -> Self {
        Self::from_document(&crate::content::bundled::document(), config).expect("bundled packs are valid")
    }

    /// Adds a knowledge provider, consulted after the local knowledge base.
    pub fn with_provider(mut self, provider: Arc<dyn KnowledgeProvider>) -> Self {
        self.extra_providers.push(provider);
        self
    }

    /// A copy of this engine with an adjusted configuration.
    pub fn reconfigured(&self, adjust: impl FnOnce(&mut EngineConfig)) -> Engine {
        let mut e = self.clone();
        adjust(&mut e.config);
        e.nlu = Nlu::new(Lexicons::default(), e.config.restate_threshold);
        e
    }

    pub fn store(&self) -> &ContentStore {
        &self.store
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn flow(&self, topic: &Topic) -> Option<&FlowGraph> {
        self.flows.get(topic)
    }

    pub fn flows(&self) -> impl Iterator<Item = &FlowGraph> {
        self.flows.values()
    }

    pub fn topics_with_content(&self) -> &HashSet<Topic> {
        &self.with_content
    }

    pub fn analyze(&self, utterance: &UserUtterance) -> NluResult {
        self.nlu.analyze(utterance, self.store.registry(), &self.gazetteer)
    }

    /// Analyzes the utterance and produces the next turn.
    pub fn respond(&self, ctx: &mut DialogueContext, utterance: &UserUtterance) -> (NluResult, SystemTurn) {
        let nlu = self.analyze(utterance);
        let turn = self.next_turn(ctx, &nlu);
        (nlu, turn)
    }

    /// Opening turn: self-introduction and three topic suggestions.
    pub fn greet(&self, ctx: &mut DialogueContext) -> SystemTurn {
        let start = Instant::now();
        let topics = self.greeting_topics(&ctx.session_id);
        let names: Vec<String> = topics.iter().map(|t| self.store.registry().spoken(t)).collect();
        let intro = format!("Hi! This is {BOT_NAME}. I can talk to you about things you are interested in.");
        let text = match names.as_slice() {
            [] => format!("{intro} What would you like to talk about?"),
            [one] => format!("{intro} Such as {one}."),
            [init @ .., last] => format!("{intro} Such as {}, or {last}.", init.join(", ")),
        };
        let reply = Reply {
            offered: topics,
            ..Reply::new(text, Signature::new("greeting", Activity::Chitchat), Tier::HandcraftedActive, Expects::Open)
        };
        self.commit(ctx, reply, start)
    }

    fn greeting_topics(&self, session_id: &str) -> Vec<Topic> {
        let registry = self.store.registry();
        if let Some(pinned) = &self.config.greeting_topics {
            return pinned.iter().filter(|t| registry.contains(t)).cloned().collect();
        }
        let pool: Vec<&Topic> = registry.topics().filter(|t| self.with_content.contains(*t)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(fnv1a(session_id.as_bytes()));
        rand::seq::index::sample(&mut rng, pool.len(), pool.len().min(3))
            .into_iter()
            .map(|i| pool[i].clone())
            .collect()
    }

    /// Produces exactly one system turn for the user's (analyzed) turn.
    pub fn next_turn(&self, ctx: &mut DialogueContext, nlu: &NluResult) -> SystemTurn {
        let start = Instant::now();
        ctx.turn_index += 1;
        if nlu.needs_restate && ctx.consecutive_restates < self.config.max_consecutive_restates {
            ctx.consecutive_restates += 1;
            let activity = ctx.active_activity().unwrap_or(Activity::Search);
            return SystemTurn {
                text: RESTATE_PROMPT.to_string(),
                signature: Signature::new("restate", activity),
                expects: Expects::Open,
                elapsed_ms: elapsed_ms(start),
                tier: Tier::Fallback,
                trace: Vec::new(),
            };
        }
        ctx.consecutive_restates = 0;
        ctx.note_entities(&nlu.entities);
        let reply = if nlu.needs_restate {
            self.leave(ctx, nlu);
            self.menu(ctx, nlu)
        } else {
            self.dispatch(ctx, nlu)
        };
        self.commit(ctx, reply, start)
    }

    fn commit(&self, ctx: &mut DialogueContext, reply: Reply, start: Instant) -> SystemTurn {
        debug_assert!(!reply.text.trim().is_empty(), "empty reply from {:?}", reply.signature);
        ctx.used_content_ids.extend(reply.consumed);
        ctx.remember_system_text(&reply.text);
        ctx.set_offered(reply.offered);
        ctx.last_turn_at = Utc::now();
        SystemTurn {
            text: reply.text,
            signature: reply.signature,
            expects: reply.expects,
            elapsed_ms: elapsed_ms(start),
            tier: reply.tier,
            trace: reply.trace,
        }
    }

    fn dispatch(&self, ctx: &mut DialogueContext, nlu: &NluResult) -> Reply {
        match arbitrate(ctx, nlu) {
            Decision::ContinueActive => self.continue_active(ctx, nlu),
            Decision::SwitchTo { activity: Activity::Search, .. } => self.search(ctx, nlu),
            Decision::SwitchTo {
                activity: Activity::Chitchat,
                topic: Some(topic),
                ..
            } => {
                let wrap = self.leave(ctx, nlu);
                self.enter_topic(ctx, &topic, nlu).prefixed(wrap)
            }
            Decision::SwitchTo {
                activity: Activity::Games,
                topic,
                game_kind,
            } => {
                let wrap = self.leave(ctx, nlu);
                match self.start_game(ctx, topic.as_ref(), game_kind, false) {
                    Some(r) => r,
                    None => self.menu(ctx, nlu),
                }
                .prefixed(wrap)
            }
            Decision::SwitchTo {
                activity: Activity::Storytelling,
                topic,
                ..
            } => {
                let wrap = self.leave(ctx, nlu);
                match self.start_story(ctx, topic.as_ref(), false) {
                    Some(r) => r,
                    None => self.menu(ctx, nlu),
                }
                .prefixed(wrap)
            }
            Decision::SwitchTo { .. } | Decision::Fallback => {
                let start = if nlu.intent == Intent::Deny {
                    Rung::TopicMenu
                } else {
                    Rung::QaLookup
                };
                self.ladder(ctx, nlu, start)
            }
            Decision::Stop => {
                let wrap = self.leave(ctx, nlu).unwrap_or_else(|| STOP_ACK.to_string());
                self.menu(ctx, nlu).prefixed(Some(wrap))
            }
        }
    }

    /// Clears the active activity. A flow that is left is done for the
    /// session; a story that is left yields its wrap-up line.
    fn leave(&self, ctx: &mut DialogueContext, nlu: &NluResult) -> Option<String> {
        let wrap = match ctx.active.take()? {
            ActiveState::Chitchat {
                topic,
                mode: ChitchatMode::Flow,
            } => {
                ctx.flow_positions.remove(&topic);
                ctx.flows_done.insert(topic);
                None
            }
            ActiveState::Story(state) => {
                let step = self
                    .story(&state.story_id)
                    .map(|s| storytelling::continue_story(s, &state, nlu));
                match step {
                    Some(StoryStep::Aborted { wrap_up, .. }) => Some(wrap_up),
                    _ => Some(LEAVE_STORY.to_string()),
                }
            }
            _ => None,
        };
        wrap
    }

    fn continue_active(&self, ctx: &mut DialogueContext, nlu: &NluResult) -> Reply {
        match ctx.active.clone() {
            Some(ActiveState::Chitchat {
                topic,
                mode: ChitchatMode::Flow,
            }) => self.continue_flow(ctx, &topic, nlu),
            Some(ActiveState::Chitchat {
                topic,
                mode: ChitchatMode::Trivia,
            }) => match nlu.intent {
                Intent::Affirm => match self.serve_trivia(ctx, &topic) {
                    Some(r) => r,
                    None => self.rotate(ctx, &topic, Slot::Trivia, nlu),
                },
                Intent::Deny | Intent::StopRequest => {
                    ctx.active = None;
                    self.menu(ctx, nlu)
                }
                _ => self.rotate(ctx, &topic, Slot::Trivia, nlu),
            },
            Some(ActiveState::Game(state)) => self.continue_game(ctx, state, nlu),
            Some(ActiveState::Story(state)) => self.continue_story(ctx, state, nlu),
            None => self.ladder(ctx, nlu, Rung::QaLookup),
        }
    }

    fn search(&self, ctx: &mut DialogueContext, nlu: &NluResult) -> Reply {
        if let Intent::EntityQuery(q) = &nlu.intent {
            let providers = self.providers();
            let query = KbQuery {
                text: q,
                tokens: &nlu.tokens,
                entities: &nlu.entities,
            };
            if let Some(a) = answer_query(&query, &providers, self.config.provider_budget) {
                let mut r = Reply::new(a.text, Signature::new(&a.source_id, Activity::Search), Tier::Fallback, Expects::None);
                r.consumed.push(a.source_id);
                r.trace.push(Rung::QaLookup);
                if matches!(ctx.active, Some(ActiveState::Story(_))) {
                    r.text = format!("{} {KEEP_GOING}", r.text);
                    r.expects = Expects::YesNo;
                }
                return r;
            }
        }
        if let Some(t) = nlu.topics.first() {
            if ctx.active_topic() != Some(t) {
                let wrap = self.leave(ctx, nlu);
                return self.enter_topic(ctx, t, nlu).prefixed(wrap);
            }
        }
        if ctx.active.is_some() {
            return self.continue_active(ctx, nlu);
        }
        let mut r = self.ladder(ctx, nlu, Rung::ArticleFirstSentence);
        r.trace.insert(0, Rung::QaLookup);
        r
    }

    fn enter_topic(&self, ctx: &mut DialogueContext, topic: &Topic, nlu: &NluResult) -> Reply {
        ctx.push_topic(topic);
        for slot in SLOTS {
            if let Some(r) = self.try_slot(ctx, topic, slot, nlu) {
                return r;
            }
        }
        ctx.active = None;
        self.ladder(ctx, nlu, Rung::OpinionElicitation)
    }

    /// Moves to the next content slot on `topic` after `from` reported
    /// exhaustion.
    fn rotate(&self, ctx: &mut DialogueContext, topic: &Topic, from: Slot, nlu: &NluResult) -> Reply {
        ctx.active = None;
        let i = SLOTS.iter().position(|s| *s == from).unwrap_or(0);
        for k in 1..SLOTS.len() {
            if let Some(r) = self.try_slot(ctx, topic, SLOTS[(i + k) % SLOTS.len()], nlu) {
                return r;
            }
        }
        self.ladder(ctx, nlu, Rung::OpinionElicitation)
    }

    fn try_slot(&self, ctx: &mut DialogueContext, topic: &Topic, slot: Slot, nlu: &NluResult) -> Option<Reply> {
        match slot {
            Slot::Flow => self.start_flow(ctx, topic, nlu),
            Slot::Games => self.start_game(ctx, Some(topic), None, true),
            Slot::Story => self.start_story(ctx, Some(topic), true),
            Slot::Trivia => self.serve_trivia(ctx, topic),
        }
    }

    // ---- chit-chat

    fn start_flow(&self, ctx: &mut DialogueContext, topic: &Topic, nlu: &NluResult) -> Option<Reply> {
        if ctx.flows_done.contains(topic) {
            return None;
        }
        let graph = self.flows.get(topic)?;
        let adv = graph.enter(&Env { engine: self, ctx }, nlu);
        self.flow_reply(ctx, topic, adv)
    }

    fn continue_flow(&self, ctx: &mut DialogueContext, topic: &Topic, nlu: &NluResult) -> Reply {
        let adv = match (self.flows.get(topic), ctx.flow_positions.get(topic)) {
            (Some(g), Some(pos)) => g.advance(pos, nlu, &Env { engine: self, ctx }),
            _ => Advance::Exhausted { path: Vec::new() },
        };
        if let Some(r) = self.flow_reply(ctx, topic, adv) {
            return r;
        }
        ctx.active = None;
        if matches!(nlu.intent, Intent::Deny | Intent::StopRequest) {
            return self.menu(ctx, nlu);
        }
        self.rotate(ctx, topic, Slot::Flow, nlu)
    }

    fn flow_reply(&self, ctx: &mut DialogueContext, topic: &Topic, adv: Advance) -> Option<Reply> {
        match adv {
            Advance::Next {
                state_id,
                text,
                expects,
                consumed,
                path,
            } => {
                ctx.flow_visits.entry(topic.clone()).or_default().extend(path);
                let source = consumed.first().cloned().unwrap_or_else(|| format!("{topic}/{state_id}"));
                ctx.flow_positions.insert(topic.clone(), state_id);
                ctx.active = Some(ActiveState::Chitchat {
                    topic: topic.clone(),
                    mode: ChitchatMode::Flow,
                });
                let mut r = Reply::new(text, Signature::new(source, Activity::Chitchat), Tier::FlowPrompt, expects);
                r.consumed = consumed;
                Some(r)
            }
            Advance::Exhausted { path } => {
                ctx.flow_visits.entry(topic.clone()).or_default().extend(path);
                ctx.flow_positions.remove(topic);
                ctx.flows_done.insert(topic.clone());
                None
            }
        }
    }

    fn serve_trivia(&self, ctx: &mut DialogueContext, topic: &Topic) -> Option<Reply> {
        let item = self.best_trivia(ctx, topic)?;
        let text = chitchat::render_trivia(item).ok()?;
        ctx.active = Some(ActiveState::Chitchat {
            topic: topic.clone(),
            mode: ChitchatMode::Trivia,
        });
        Some(self.item_reply(item, text, Activity::Chitchat, Expects::YesNo))
    }

    fn best_trivia(&self, ctx: &DialogueContext, topic: &Topic) -> Option<&ContentItem> {
        let pool = [Genre::Trivia, Genre::Fact]
            .into_iter()
            .flat_map(|g| self.store.by_genre(g, Some(topic)));
        self.pick(ctx, pool, Activity::Chitchat)
    }

    // ---- games

    fn start_game(
        &self,
        ctx: &mut DialogueContext,
        topic: Option<&Topic>,
        kind: Option<GameKind>,
        strict: bool,
    ) -> Option<Reply> {
        let genres: Vec<Genre> = match kind {
            Some(k) => vec![k.genre()],
            None => GAME_GENRES.to_vec(),
        };
        let pool = |t: Option<&Topic>| -> Vec<&ContentItem> {
            genres.iter().flat_map(|g| self.store.by_genre(*g, t)).collect()
        };
        let mut item = topic.and_then(|t| self.pick(ctx, pool(Some(t)), Activity::Games));
        if item.is_none() && (!strict || topic.is_none()) {
            item = self.pick(ctx, pool(None), Activity::Games);
        }
        let item = item?;
        let game_topic = topic.filter(|t| item.has_topic(t)).cloned();
        let turn = games::ask(item, game_topic.clone()).ok()?;
        if let Some(t) = &game_topic {
            ctx.push_topic(t);
        }
        ctx.active = Some(ActiveState::Game(turn.state));
        Some(self.item_reply(item, turn.text, Activity::Games, turn.expects))
    }

    fn continue_game(&self, ctx: &mut DialogueContext, state: GameState, nlu: &NluResult) -> Reply {
        let Some(item) = self.store.get(&state.item_id) else {
            ctx.active = None;
            return self.ladder(ctx, nlu, Rung::QaLookup);
        };
        let spoken = state
            .topic
            .as_ref()
            .map(|t| self.store.registry().spoken(t))
            .unwrap_or_default();
        match games::play(item, &state, nlu, &spoken, self.config.game_rules) {
            Ok(GameOutcome::Respond(turn)) => {
                ctx.active = Some(ActiveState::Game(turn.state));
                Reply::new(
                    turn.text,
                    Signature::new(&item.id, Activity::Games),
                    Tier::HandcraftedActive,
                    turn.expects,
                )
            }
            Ok(GameOutcome::WantsAnother) => {
                ctx.active = None;
                let topic = state.topic.as_ref();
                let next = self
                    .start_game(ctx, topic, Some(state.kind), topic.is_some())
                    .or_else(|| topic.and_then(|t| self.start_game(ctx, Some(t), None, true)));
                match (next, topic) {
                    (Some(r), _) => r,
                    (None, Some(t)) => self.rotate(ctx, t, Slot::Games, nlu),
                    (None, None) => self.menu(ctx, nlu),
                }
            }
            Ok(GameOutcome::Declined) => {
                ctx.active = None;
                self.menu(ctx, nlu)
            }
            Ok(GameOutcome::Unclear) => match state.topic {
                Some(t) => self.rotate(ctx, &t, Slot::Games, nlu),
                None => {
                    ctx.active = None;
                    self.ladder(ctx, nlu, Rung::QaLookup)
                }
            },
            Err(_) => {
                ctx.active = None;
                self.ladder(ctx, nlu, Rung::QaLookup)
            }
        }
    }

    // ---- stories

    fn story(&self, id: &str) -> Option<&storytelling::Story> {
        match &self.store.get(id)?.payload {
            Payload::Story(s) => Some(s),
            _ => None,
        }
    }

    fn start_story(&self, ctx: &mut DialogueContext, topic: Option<&Topic>, strict: bool) -> Option<Reply> {
        let pool = |t: Option<&Topic>| -> Vec<&ContentItem> {
            [Genre::Story, Genre::Dream]
                .into_iter()
                .flat_map(|g| self.store.by_genre(g, t))
                .filter(|it| matches!(it.payload, Payload::Story(_)))
                .collect()
        };
        let mut item = topic.and_then(|t| self.pick(ctx, pool(Some(t)), Activity::Storytelling));
        if item.is_none() && !strict {
            item = self.pick(ctx, pool(None), Activity::Storytelling);
        }
        let item = item?;
        let Payload::Story(story) = &item.payload else {
            return None;
        };
        let turn = storytelling::begin_story(&item.id, story);
        if let Some(t) = topic.filter(|t| item.has_topic(t)) {
            ctx.push_topic(t);
        }
        ctx.active = Some(ActiveState::Story(turn.state));
        Some(self.item_reply(item, turn.text, Activity::Storytelling, turn.expects))
    }

    fn continue_story(&self, ctx: &mut DialogueContext, state: StoryState, nlu: &NluResult) -> Reply {
        let Some(story) = self.story(&state.story_id) else {
            ctx.active = None;
            return self.menu(ctx, nlu);
        };
        let sig = Signature::new(&state.story_id, Activity::Storytelling);
        match storytelling::continue_story(story, &state, nlu) {
            StoryStep::Turn(t) => {
                ctx.active = Some(ActiveState::Story(t.state));
                Reply::new(t.text, sig, Tier::HandcraftedActive, t.expects)
            }
            StoryStep::Finished(t) => {
                ctx.active = None;
                Reply::new(t.text, sig, Tier::HandcraftedActive, t.expects)
            }
            StoryStep::Aborted { wrap_up, .. } => {
                ctx.active = None;
                self.menu(ctx, nlu).prefixed(Some(wrap_up))
            }
        }
    }

    // ---- shared helpers

    /// Best unused item from `pool` according to the ranker.
    fn pick<'a>(
        &self,
        ctx: &DialogueContext,
        pool: impl IntoIterator<Item = &'a ContentItem>,
        activity: Activity,
    ) -> Option<&'a ContentItem> {
        let mut by_id: HashMap<&str, &'a ContentItem> = HashMap::new();
        let candidates: Vec<Candidate> = pool
            .into_iter()
            .filter(|it| !ctx.used_content_ids.contains(&it.id))
            .filter(|it| by_id.insert(it.id.as_str(), *it).is_none())
            .map(|it| self.candidate(it, it.text.clone(), activity))
            .collect();
        let best = rank(candidates, ctx, &self.config.weights).ok()?.into_iter().next()?;
        by_id.get(best.signature.source_id.as_str()).copied()
    }

    fn tier_for(item: &ContentItem, activity: Activity) -> Tier {
        if item.handcrafted_for == Some(activity) {
            Tier::HandcraftedActive
        } else {
            Tier::ScoredContent
        }
    }

    fn candidate(&self, item: &ContentItem, text: String, activity: Activity) -> Candidate {
        let mut c = Candidate::new(text, Signature::new(&item.id, activity), Self::tier_for(item, activity));
        c.topics = item.topics.clone();
        c.entities = item.entities.iter().map(|e| e.canonical.clone()).collect();
        c.verbosity = item.verbosity;
        c.verbosity_exempt = activity == Activity::Storytelling;
        c
    }

    fn item_reply(&self, item: &ContentItem, text: String, activity: Activity, expects: Expects) -> Reply {
        let mut r = Reply::new(text, Signature::new(&item.id, activity), Self::tier_for(item, activity), expects);
        r.consumed.push(item.id.clone());
        r
    }

    fn providers(&self) -> Vec<&dyn KnowledgeProvider> {
        std::iter::once(&self.kb as &dyn KnowledgeProvider)
            .chain(self.extra_providers.iter().map(|p| p.as_ref()))
            .collect()
    }

    fn excluded_words(&self, nlu: &NluResult) -> HashSet<String> {
        nlu.tokens
            .iter()
            .filter(|t| self.nlu.lexicons().is_lexicon_word(t) || self.store.registry().lookup(t).is_some())
            .cloned()
            .collect()
    }

    fn menu(&self, ctx: &mut DialogueContext, nlu: &NluResult) -> Reply {
        self.ladder(ctx, nlu, Rung::TopicMenu)
    }

    fn ladder(&self, ctx: &mut DialogueContext, nlu: &NluResult, start: Rung) -> Reply {
        let providers = self.providers();
        let explored = ctx.explored();
        let excluded = self.excluded_words(nlu);
        let input = LadderInput {
            nlu,
            focus_entities: &ctx.focus_entities,
            current_topic: ctx.current_topic(),
            used: &ctx.used_content_ids,
            explored: &explored,
            offered_at: &ctx.topic_offered_at,
            with_content: &self.with_content,
            excluded_words: &excluded,
        };
        let ladder = FallbackLadder {
            store: &self.store,
            providers: &providers,
            budget: self.config.provider_budget,
        };
        let t = ladder.turn(&input, start);
        let mut r = Reply::new(t.text, Signature::new(&t.source_id, Activity::Search), Tier::Fallback, t.expects);
        if t.consumes {
            r.consumed.push(t.source_id);
        }
        r.trace = t.trace;
        r.offered = t.offered;
        r
    }
}


/// Slot filler over the engine and one session's context.
struct Env<'a> {
    engine: &'a Engine,
    ctx: &'a DialogueContext,
}

impl FlowEnv for Env<'_> {
    fn spoken_topic(&self, topic: &Topic) -> String {
        self.engine.store.registry().spoken(topic)
    }

    fn trivia(&self, topic: &Topic) -> Option<SlotFill> {
        let item = self.engine.best_trivia(self.ctx, topic)?;
        Some(SlotFill {
            text: chitchat::render_trivia(item).ok()?,
            source_id: Some(item.id.clone()),
        })
    }

    fn elicit(&self, topic: &Topic) -> Option<SlotFill> {
        let spoken = self.spoken_topic(topic);
        chitchat::elicit_opinion(&self.engine.store, topic, &spoken, &self.ctx.used_content_ids).map(|(id, text)| {
            SlotFill {
                text,
                source_id: Some(id),
            }
        })
    }

    fn entity(&self, nlu: &NluResult) -> Option<String> {
        nlu.entities.first().or(self.ctx.focus_entities.last()).cloned()
    }

    fn keyword(&self, nlu: &NluResult) -> Option<String> {
        salient_keyword(&nlu.tokens, &self.engine.excluded_words(nlu))
    }
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1000.0
}

/// FNV-1a, used to derive a per-session random stream from the session id.
fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}
