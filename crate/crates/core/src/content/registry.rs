use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::text;

/// A canonical topic name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Topic(String);

impl Topic {
    pub fn new(name: impl Into<String>) -> Self {
        Topic(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Topic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Topic {
    fn from(s: &str) -> Self {
        Topic(s.to_string())
    }
}

/// Registry extension record as it appears in a content pack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopicRecord {
    pub name: String,
    #[serde(default)]
    pub aliases: Vec<String>,
    /// How the topic reads mid-sentence; defaults to the lowercased name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spoken: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RegistryError {
    AliasConflict {
        alias: String,
        existing: Topic,
        new: Topic,
    },
    EmptyName,
}

impl fmt::Display for RegistryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegistryError::AliasConflict {
                alias,
                existing,
                new,
            } => write!(
                f,
                "alias {alias:?} already maps to {existing}, cannot map it to {new}"
            ),
            RegistryError::EmptyName => f.write_str("topic name is empty"),
        }
    }
}

impl std::error::Error for RegistryError {}

#[derive(Debug, Clone)]
struct TopicEntry {
    topic: Topic,
    spoken: String,
}

/// The set of canonical topics plus a case-insensitive alias table.
#[derive(Debug, Clone, Default)]
pub struct TopicRegistry {
    entries: Vec<TopicEntry>,
    by_name: HashMap<Topic, usize>,
    aliases: HashMap<String, usize>,
}

/// Canonical topics with their default aliases and, where the name is not
/// simply lowercased mid-sentence, a spoken form.
const DEFAULT_TOPICS: &[(&str, Option<&str>, &[&str])] = &[
    ("Animals", None, &["animal", "wildlife", "pets"]),
    ("Astronomy", None, &["space", "outer space", "planets", "stars and planets"]),
    ("Board Games", None, &["board game", "boardgames", "tabletop games"]),
    ("Books", None, &["book", "reading", "novels", "literature"]),
    ("Box Office", None, &["movies", "movie", "films", "cinema"]),
    ("Cartoons", None, &["cartoon", "animation", "anime"]),
    ("Comic Books", None, &["comic book", "comics", "comic", "superheroes"]),
    ("Dinosaurs", None, &["dinosaur", "dinos", "dino"]),
    ("Favorite Food", None, &["food", "foods", "favorite foods"]),
    ("Fictional Characters", None, &["fictional character", "characters"]),
    ("Fun Facts", None, &["fun fact", "facts"]),
    ("Gossip", None, &["celebrity gossip", "celebrities"]),
    ("Harry Potter", Some("Harry Potter"), &["hogwarts", "potter"]),
    ("Health", None, &["healthy", "fitness"]),
    ("History", None, &["historical"]),
    ("Hobbies", None, &["hobby"]),
    ("Holidays", None, &["holiday", "christmas", "halloween"]),
    ("Horoscope", None, &["horoscopes", "astrology", "zodiac"]),
    ("Weather", None, &["forecast"]),
    ("Language", None, &["languages", "linguistics"]),
    ("Marvel C U", Some("the Marvel universe"), &["marvel", "mcu", "marvel cinematic universe", "avengers"]),
    ("Monsters", None, &["monster"]),
    ("Music", None, &["songs", "song", "musicians"]),
    ("News Headlines", None, &["news", "headlines", "current events"]),
    ("Nutrition", None, &["diet", "vitamins"]),
    ("Pirates", None, &["pirate"]),
    ("Poems", None, &["poem", "poetry"]),
    ("Pokemon", Some("Pokemon"), &["pikachu"]),
    ("Famous Quotes", None, &["quotes", "quote", "quotations"]),
    ("Recipe", Some("recipes"), &["recipes", "cooking", "baking"]),
    ("Science Fiction", None, &["sci-fi", "sci fi", "scifi"]),
    ("Shopping", None, &["shop"]),
    ("Sports", None, &["sport", "football", "basketball", "baseball", "soccer"]),
    ("Star Wars", Some("Star Wars"), &["jedi"]),
    ("Star Trek", Some("Star Trek"), &["trekkie"]),
    ("Fashion", None, &["clothes"]),
    ("Technology", None, &["tech", "computers", "gadgets"]),
    ("Tolkien", Some("Tolkien"), &["lord of the rings", "the hobbit", "hobbit", "middle earth", "lotr"]),
    ("Travel", None, &["traveling", "travelling", "vacation"]),
    ("Trivia", None, &[]),
    ("TV", Some("TV"), &["television", "tv shows"]),
    ("Video Games", None, &["video game", "videogames", "gaming"]),
];

fn alias_key(s: &str) -> String {
    text::normalize(s)
}

impl TopicRegistry {
    /// Empty registry, for packs that define every topic themselves.
    pub fn empty() -> Self {
        Self::default()
    }

    /// The 42 built-in conversation topics.
    pub fn builtin() -> Self {
        let mut reg = Self::empty();
        for (name, spoken, aliases) in DEFAULT_TOPICS {
            reg.register(&TopicRecord {
                name: (*name).to_string(),
                aliases: aliases.iter().map(|a| a.to_string()).collect(),
                spoken: spoken.map(str::to_string),
            })
            .expect("built-in topic table is consistent");
        }
        reg
    }

    /// Adds a topic, or extends an existing one with more aliases.
    pub fn register(&mut self, record: &TopicRecord) -> Result<Topic, RegistryError> {
        let name = record.name.trim();
        if name.is_empty() {
            return Err(RegistryError::EmptyName);
        }
        let topic = Topic::new(name);
        let idx = match self.by_name.get(&topic) {
            Some(&idx) => {
                if let Some(spoken) = &record.spoken {
                    self.entries[idx].spoken = spoken.clone();
                }
                idx
            }
            None => {
                let idx = self.entries.len();
                self.entries.push(TopicEntry {
                    topic: topic.clone(),
                    spoken: record.spoken.clone().unwrap_or_else(|| name.to_lowercase()),
                });
                self.by_name.insert(topic.clone(), idx);
                idx
            }
        };
        for alias in std::iter::once(name).chain(record.aliases.iter().map(String::as_str)) {
            let key = alias_key(alias);
            if key.is_empty() {
                continue;
            }
            match self.aliases.get(&key) {
                Some(&other) if other != idx => {
                    return Err(RegistryError::AliasConflict {
                        alias: alias.to_string(),
                        existing: self.entries[other].topic.clone(),
                        new: topic,
                    })
                }
                _ => {
                    self.aliases.insert(key, idx);
                }
            }
        }
        Ok(topic)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, topic: &Topic) -> bool {
        self.by_name.contains_key(topic)
    }

    /// Case-insensitive lookup by canonical name or alias.
    pub fn lookup(&self, name_or_alias: &str) -> Option<&Topic> {
        self.aliases
            .get(&alias_key(name_or_alias))
            .map(|&i| &self.entries[i].topic)
    }

    /// Topics in registration order.
    pub fn topics(&self) -> impl Iterator<Item = &Topic> {
        self.entries.iter().map(|e| &e.topic)
    }

    /// Registration position, used for stable ordering.
    pub fn position(&self, topic: &Topic) -> Option<usize> {
        self.by_name.get(topic).copied()
    }

    /// The topic as it reads inside a sentence ("dinosaurs", "Star Wars").
    pub fn spoken(&self, topic: &Topic) -> String {
        self.by_name
            .get(topic)
            .map(|&i| self.entries[i].spoken.clone())
            .unwrap_or_else(|| topic.as_str().to_lowercase())
    }

    /// All alias phrases as token lists, longest first, for span matching.
    pub fn alias_phrases(&self) -> Vec<(Vec<String>, Topic)> {
        let mut out: Vec<(Vec<String>, Topic)> = self
            .aliases
            .iter()
            .map(|(k, &i)| {
                (
                    k.split(' ').map(str::to_string).collect(),
                    self.entries[i].topic.clone(),
                )
            })
            .collect();
        out.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_has_42_topics() {
        let reg = TopicRegistry::builtin();
        assert_eq!(reg.len(), 42);
        assert!(reg.contains(&Topic::from("Dinosaurs")));
        assert!(reg.contains(&Topic::from("Star Wars")));
        assert!(reg.contains(&Topic::from("Marvel C U")));
    }

    #[test]
    fn alias_lookup_is_case_insensitive() {
        let reg = TopicRegistry::builtin();
        assert_eq!(reg.lookup("DINOSAURS").map(Topic::as_str), Some("Dinosaurs"));
        assert_eq!(reg.lookup("Lord of the Rings").map(Topic::as_str), Some("Tolkien"));
        assert_eq!(reg.lookup("sci-fi").map(Topic::as_str), Some("Science Fiction"));
        assert_eq!(reg.lookup("nonexistent topic"), None);
    }

    #[test]
    fn every_alias_resolves_to_registered_topic() {
        let reg = TopicRegistry::builtin();
        for (_, topic) in reg.alias_phrases() {
            assert!(reg.contains(&topic));
        }
    }

    #[test]
    fn extension_and_conflicts() {
        let mut reg = TopicRegistry::builtin();
        reg.register(&TopicRecord {
            name: "Gardening".into(),
            aliases: vec!["film noir".into()],
            spoken: None,
        })
        .unwrap();
        assert_eq!(reg.len(), 43);
        assert_eq!(reg.spoken(&Topic::from("Gardening")), "gardening");
        let err = reg
            .register(&TopicRecord {
                name: "Cinema Club".into(),
                aliases: vec!["Film Noir".into()],
                spoken: None,
            })
            .unwrap_err();
        assert!(matches!(err, RegistryError::AliasConflict { .. }));
    }

    #[test]
    fn spoken_forms() {
        let reg = TopicRegistry::builtin();
        assert_eq!(reg.spoken(&Topic::from("Comic Books")), "comic books");
        assert_eq!(reg.spoken(&Topic::from("Star Wars")), "Star Wars");
    }
}
