use serde::{Deserialize, Serialize};

use crate::activity::Activity;
use crate::content::registry::Topic;
use crate::games::{HypotheticalItem, JokeItem, RiddleItem, WyrItem};
use crate::storytelling::Story;
use crate::text;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Genre {
    Trivia,
    Fact,
    Joke,
    Riddle,
    WouldYouRather,
    Hypothetical,
    Story,
    Dream,
    News,
    Prompt,
}

impl Genre {
    pub fn is_game(self) -> bool {
        matches!(
            self,
            Genre::Joke | Genre::Riddle | Genre::WouldYouRather | Genre::Hypothetical
        )
    }

    pub fn is_story(self) -> bool {
        matches!(self, Genre::Story | Genre::Dream)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Curated,
    Crowd,
    Forum,
    News,
    LocalKb,
}

/// A named entity with its ASR-style variants.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Entity {
    pub canonical: String,
    #[serde(default)]
    pub aliases: Vec<String>,
}

impl Entity {
    pub fn new(canonical: impl Into<String>) -> Self {
        Entity {
            canonical: canonical.into(),
            aliases: Vec::new(),
        }
    }

    /// Normalized keys for the canonical form and every alias, deduplicated.
    pub fn keys(&self) -> Vec<String> {
        let mut keys: Vec<String> = std::iter::once(&self.canonical)
            .chain(&self.aliases)
            .map(|s| text::entity_key(s))
            .filter(|k| !k.is_empty())
            .collect();
        keys.sort();
        keys.dedup();
        keys
    }
}

/// Genre-specific fields carried by game and story items.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    None,
    Wyr(WyrItem),
    Hypothetical(HypotheticalItem),
    Riddle(RiddleItem),
    Joke(JokeItem),
    Story(Story),
}

/// One retrievable unit of conversational content.
#[derive(Debug, Clone, PartialEq)]
pub struct ContentItem {
    pub id: String,
    pub text: String,
    pub topics: Vec<Topic>,
    pub entities: Vec<Entity>,
    pub genre: Genre,
    pub source: Source,
    pub quality: f64,
    pub verbosity: usize,
    pub handcrafted_for: Option<Activity>,
    pub payload: Payload,
}

impl ContentItem {
    /// Builds a payload-free item; verbosity is derived from the text.
    pub fn new(
        id: impl Into<String>,
        text: impl Into<String>,
        topics: Vec<Topic>,
        genre: Genre,
    ) -> Self {
        let text = text.into();
        ContentItem {
            id: id.into(),
            verbosity: text::word_count(&text),
            text,
            topics,
            entities: Vec::new(),
            genre,
            source: Source::Curated,
            quality: 1.0,
            handcrafted_for: None,
            payload: Payload::None,
        }
    }

    pub fn with_entities(mut self, entities: Vec<Entity>) -> Self {
        self.entities = entities;
        self
    }

    pub fn with_source(mut self, source: Source, quality: f64) -> Self {
        self.source = source;
        self.quality = quality;
        self
    }

    pub fn handcrafted_for(mut self, activity: Activity) -> Self {
        self.handcrafted_for = Some(activity);
        self
    }

    pub fn with_payload(mut self, payload: Payload) -> Self {
        self.payload = payload;
        self
    }

    pub fn has_topic(&self, topic: &Topic) -> bool {
        self.topics.contains(topic)
    }

    /// Entity keys of every entity and alias on the item.
    pub fn entity_keys(&self) -> impl Iterator<Item = String> + '_ {
        self.entities.iter().flat_map(Entity::keys)
    }
}
