//! Verbal games: would-you-rather, hypothetical questions, riddles, jokes.
//!
//! Every game follows the same three-phase cycle per item: the question is
//! asked, the user's answer is evaluated (and the system gives its own
//! view), then another round is offered. What happens after the offer is
//! the dialogue manager's call; this module only reports the user's reply.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::activity::Expects;
use crate::content::{ContentItem, Genre, Payload, Topic};
use crate::nlu::{Intent, NluResult};
use crate::text;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameKind {
    WouldYouRather,
    Hypothetical,
    Riddle,
    Joke,
}

impl GameKind {
    pub const ALL: [GameKind; 4] = [
        GameKind::WouldYouRather,
        GameKind::Hypothetical,
        GameKind::Riddle,
        GameKind::Joke,
    ];

    pub fn genre(self) -> Genre {
        match self {
            GameKind::WouldYouRather => Genre::WouldYouRather,
            GameKind::Hypothetical => Genre::Hypothetical,
            GameKind::Riddle => Genre::Riddle,
            GameKind::Joke => Genre::Joke,
        }
    }

    pub fn from_genre(genre: Genre) -> Option<Self> {
        GameKind::ALL.into_iter().find(|k| k.genre() == genre)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Choice {
    A,
    B,
}

impl Choice {
    pub fn other(self) -> Choice {
        match self {
            Choice::A => Choice::B,
            Choice::B => Choice::A,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WyrOption {
    pub label: String,
    pub keywords: Vec<String>,
    /// Said back to a user who picks this option.
    pub evaluation_text: String,
}

/// Would-you-rather payload; the question is the item text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WyrItem {
    pub option_a: WyrOption,
    pub option_b: WyrOption,
    pub own_choice: Choice,
    pub justification: String,
}

impl WyrItem {
    pub fn new(option_a: WyrOption, option_b: WyrOption, own_choice: Choice, justification: String) -> Result<Self, String> {
        if text::normalize(&option_a.label) == text::normalize(&option_b.label) {
            return Err("options must be distinct".into());
        }
        for (name, o) in [("option_a", &option_a), ("option_b", &option_b)] {
            if o.keywords.iter().all(|k| text::normalize(k).is_empty()) {
                return Err(format!("{name} has no keywords"));
            }
            if o.label.trim().is_empty() {
                return Err(format!("{name} label is empty"));
            }
        }
        if justification.trim().is_empty() {
            return Err("justification is empty".into());
        }
        Ok(WyrItem {
            option_a,
            option_b,
            own_choice,
            justification,
        })
    }

    pub fn option(&self, c: Choice) -> &WyrOption {
        match c {
            Choice::A => &self.option_a,
            Choice::B => &self.option_b,
        }
    }

    /// The option whose keywords overlap the reply more; `None` on a tie.
    pub fn match_choice(&self, tokens: &[String]) -> Option<Choice> {
        let hits = |o: &WyrOption| {
            o.keywords
                .iter()
                .map(|k| text::tokens(k))
                .filter(|k| text::find_phrase(tokens, k, 0).is_some())
                .count()
        };
        let (a, b) = (hits(&self.option_a), hits(&self.option_b));
        match a.cmp(&b) {
            std::cmp::Ordering::Greater => Some(Choice::A),
            std::cmp::Ordering::Less => Some(Choice::B),
            std::cmp::Ordering::Equal => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypotheticalItem {
    pub own_answer: String,
    pub justification: String,
    pub follow_up_offer: String,
}

impl HypotheticalItem {
    pub fn new(own_answer: String, justification: String, follow_up_offer: String) -> Result<Self, String> {
        for (name, v) in [
            ("own_answer", &own_answer),
            ("justification", &justification),
            ("follow_up_offer", &follow_up_offer),
        ] {
            if v.trim().is_empty() {
                return Err(format!("{name} is empty"));
            }
        }
        Ok(HypotheticalItem {
            own_answer,
            justification,
            follow_up_offer,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RiddleItem {
    pub answer: String,
}

impl RiddleItem {
    pub fn new(answer: String) -> Result<Self, String> {
        if answer.trim().is_empty() {
            return Err("answer is empty".into());
        }
        Ok(RiddleItem { answer })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JokeItem {
    pub punchline: String,
}

impl JokeItem {
    pub fn new(punchline: String) -> Result<Self, String> {
        if punchline.trim().is_empty() {
            return Err("punchline is empty".into());
        }
        Ok(JokeItem { punchline })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GamePhase {
    Asked,
    Answered,
    OfferedMore,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("illegal phase transition {from:?} -> {to:?}")]
    IllegalTransition { from: GamePhase, to: GamePhase },
    #[error("item {0:?} is not a game item")]
    NotAGame(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameState {
    pub kind: GameKind,
    pub item_id: String,
    pub topic: Option<Topic>,
    pub phase: GamePhase,
}

impl GameState {
    fn transition(&mut self, to: GamePhase) -> Result<(), GameError> {
        let legal = matches!(
            (self.phase, to),
            (GamePhase::Asked, GamePhase::Answered) | (GamePhase::Answered, GamePhase::OfferedMore)
        );
        if !legal {
            return Err(GameError::IllegalTransition { from: self.phase, to });
        }
        self.phase = to;
        Ok(())
    }
}

impl fmt::Display for GameState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}:{}:{:?}", self.kind, self.item_id, self.phase)
    }
}

/// Tunable judgement rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GameRules {
    /// Content words a riddle guess must share with the answer.
    pub riddle_min_shared_words: usize,
}

impl Default for GameRules {
    fn default() -> Self {
        GameRules {
            riddle_min_shared_words: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameTurn {
    pub text: String,
    pub expects: Expects,
    pub state: GameState,
}

/// Result of feeding one user reply into a game.
#[derive(Debug, Clone, PartialEq)]
pub enum GameOutcome {
    /// The answer was evaluated; another round is on offer.
    Respond(GameTurn),
    /// The user accepted the offer of another round.
    WantsAnother,
    /// The user declined or asked to stop.
    Declined,
    /// The reply to the offer was neither yes nor no.
    Unclear,
}

/// Poses `item`'s question. `topic` is the topic the game is played on, if
/// any; it names the offer of another round.
pub fn ask(item: &ContentItem, topic: Option<Topic>) -> Result<GameTurn, GameError> {
    let kind = GameKind::from_genre(item.genre).ok_or_else(|| GameError::NotAGame(item.id.clone()))?;
    let expects = match kind {
        GameKind::WouldYouRather => Expects::Choice,
        _ => Expects::Open,
    };
    Ok(GameTurn {
        text: item.text.clone(),
        expects,
        state: GameState {
            kind,
            item_id: item.id.clone(),
            topic,
            phase: GamePhase::Asked,
        },
    })
}

fn offer_reply(nlu: &NluResult) -> GameOutcome {
    match nlu.intent {
        Intent::Affirm => GameOutcome::WantsAnother,
        Intent::Deny | Intent::StopRequest => GameOutcome::Declined,
        _ => GameOutcome::Unclear,
    }
}

fn respond(mut state: GameState, text: String) -> Result<GameOutcome, GameError> {
    state.transition(GamePhase::Answered)?;
    state.transition(GamePhase::OfferedMore)?;
    Ok(GameOutcome::Respond(GameTurn {
        text,
        expects: Expects::YesNo,
        state,
    }))
}

pub fn play_wyr(item: &WyrItem, state: &GameState, nlu: &NluResult, topic_spoken: &str) -> Result<GameOutcome, GameError> {
    if state.phase == GamePhase::OfferedMore {
        return Ok(offer_reply(nlu));
    }
    let mut text = match item.match_choice(&nlu.tokens) {
        Some(c) => {
            let mut s = join_sentence(String::new(), &item.option(c).evaluation_text);
            if c == item.own_choice {
                s = join_sentence(s, "Great minds think alike.");
            }
            s
        }
        None => "Interesting choice!".to_string(),
    };
    text = join_sentence(text, "For me personally?");
    text = join_sentence(text, &item.justification);
    let offer = match topic_spoken.trim() {
        "" => "Do you want to hear another question?".to_string(),
        t => format!("Do you want to hear another {t} question?"),
    };
    text = join_sentence(text, &offer);
    respond(state.clone(), text)
}

pub fn play_hypothetical(item: &HypotheticalItem, state: &GameState, nlu: &NluResult) -> Result<GameOutcome, GameError> {
    if state.phase == GamePhase::OfferedMore {
        return Ok(offer_reply(nlu));
    }
    let text = ["Awesome choice. For me personally?", &item.own_answer, &item.justification, &item.follow_up_offer]
        .into_iter()
        .fold(String::new(), join_sentence);
    respond(state.clone(), text)
}

/// True if the guess shares enough content words with the answer.
pub fn riddle_guess_correct(guess_tokens: &[String], answer: &str, rules: GameRules) -> bool {
    let answer_words = text::content_words(answer);
    let shared = guess_tokens
        .iter()
        .filter(|t| !text::is_stopword(t))
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .filter(|t| answer_words.contains(*t))
        .count();
    shared >= rules.riddle_min_shared_words.max(1)
}

pub fn play_riddle(item: &RiddleItem, state: &GameState, nlu: &NluResult, rules: GameRules) -> Result<GameOutcome, GameError> {
    if state.phase == GamePhase::OfferedMore {
        return Ok(offer_reply(nlu));
    }
    let verdict = if riddle_guess_correct(&nlu.tokens, &item.answer, rules) {
        format!("That's right! The answer is {}", item.answer)
    } else {
        format!("Good guess, but the answer is {}", item.answer)
    };
    let text = join_sentence(terminate(verdict), "Want to try another riddle?");
    respond(state.clone(), text)
}

pub fn play_joke(item: &JokeItem, state: &GameState, nlu: &NluResult) -> Result<GameOutcome, GameError> {
    if state.phase == GamePhase::OfferedMore {
        return Ok(offer_reply(nlu));
    }
    let text = join_sentence(item.punchline.clone(), "Want to hear another joke?");
    respond(state.clone(), text)
}

/// Dispatches on the item's payload.
pub fn play(item: &ContentItem, state: &GameState, nlu: &NluResult, topic_spoken: &str, rules: GameRules) -> Result<GameOutcome, GameError> {
    match &item.payload {
        Payload::Wyr(w) => play_wyr(w, state, nlu, topic_spoken),
        Payload::Hypothetical(h) => play_hypothetical(h, state, nlu),
        Payload::Riddle(r) => play_riddle(r, state, nlu, rules),
        Payload::Joke(j) => play_joke(j, state, nlu),
        _ => Err(GameError::NotAGame(item.id.clone())),
    }
}

fn terminate(mut s: String) -> String {
    if !s.ends_with(['.', '!', '?']) {
        s.push('.');
    }
    s
}

fn join_sentence(acc: String, next: &str) -> String {
    let next = next.trim();
    match (acc.is_empty(), next.is_empty()) {
        (_, true) => acc,
        (true, false) => next.to_string(),
        (false, false) => format!("{acc} {next}"),
    }
}
