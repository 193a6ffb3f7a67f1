//! Topic-oriented chit-chat: flow graphs, the trivia frame, and opinion
//! elicitation prompts.

pub mod flow;

use std::collections::HashSet;

use thiserror::Error;

use crate::activity::Activity;
use crate::content::{ContentItem, ContentStore, Genre, Topic};

pub use flow::{Advance, Condition, FlowEnv, FlowGraph, FlowSpec, FlowState, PredicateTable, SlotFill};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChitchatError {
    #[error("item {id:?} has genre {genre:?}; the trivia frame takes trivia or facts")]
    NotTrivia { id: String, genre: Genre },
}

pub const TRIVIA_OFFER: &str = "Want to hear some more trivia?";

/// Sentence openers that read naturally in lowercase after "Did you know
/// that". Anything else (names, titles, acronyms) keeps its capital.
const LOWERCASE_OPENERS: &[&str] = &[
    "a", "about", "after", "all", "almost", "along", "among", "an", "around", "at", "because",
    "before", "by", "despite", "during", "each", "early", "every", "for", "from", "if", "in",
    "it", "its", "many", "more", "most", "nearly", "no", "not", "of", "on", "one", "only",
    "over", "some", "the", "their", "there", "these", "they", "this", "those", "to", "under",
    "until", "when", "while", "with",
];

/// "Did you know that X? Want to hear some more trivia?"
pub fn render_trivia(item: &ContentItem) -> Result<String, ChitchatError> {
    if !matches!(item.genre, Genre::Trivia | Genre::Fact) {
        return Err(ChitchatError::NotTrivia {
            id: item.id.clone(),
            genre: item.genre,
        });
    }
    let body = item.text.trim().trim_end_matches(['.', '!', '?', ' ']);
    let first = body.split_whitespace().next().unwrap_or("");
    let first_key: String = first.chars().filter(|c| c.is_alphanumeric()).collect::<String>().to_lowercase();
    let body = if LOWERCASE_OPENERS.contains(&first_key.as_str()) {
        let mut chars = body.chars();
        match chars.next() {
            Some(c) => c.to_lowercase().chain(chars).collect(),
            None => String::new(),
        }
    } else {
        body.to_string()
    };
    Ok(format!("Did you know that {body}? {TRIVIA_OFFER}"))
}

pub fn generic_elicit_id(topic: &Topic) -> String {
    format!("elicit-generic#{topic}")
}

/// Fallback elicitation used when a topic has no prompts of its own.
pub fn generic_elicit_text(spoken_topic: &str) -> String {
    format!("What do you like most about {spoken_topic}?")
}

/// The prompt pool for `topic`: prompt items written for chit-chat, in id
/// order, then the generic template.
pub fn elicitation_pool(store: &ContentStore, topic: &Topic, spoken_topic: &str) -> Vec<(String, String)> {
    let mut pool: Vec<(String, String)> = store
        .by_genre(Genre::Prompt, Some(topic))
        .into_iter()
        .filter(|it| it.handcrafted_for == Some(Activity::Chitchat))
        .map(|it| (it.id.clone(), it.text.clone()))
        .collect();
    pool.push((generic_elicit_id(topic), generic_elicit_text(spoken_topic)));
    pool
}

/// First unused prompt from the pool as `(source id, text)`, or `None`
/// when every prompt has been used this session.
pub fn elicit_opinion(
    store: &ContentStore,
    topic: &Topic,
    spoken_topic: &str,
    used: &HashSet<String>,
) -> Option<(String, String)> {
    elicitation_pool(store, topic, spoken_topic)
        .into_iter()
        .find(|(id, _)| !used.contains(id))
}
