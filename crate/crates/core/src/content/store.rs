use std::collections::{BTreeSet, HashMap, HashSet};

use crate::activity::Activity;
use crate::content::item::{ContentItem, Genre};
use crate::content::pack::PackDocument;
use crate::content::registry::{Topic, TopicRegistry};
use crate::content::PackError;
use crate::text;

/// Posting lists over item positions.
#[derive(Debug, Clone, Default)]
pub struct ContentIndex {
    topics: HashMap<Topic, Vec<u32>>,
    /// entity key -> (item, entity slot on that item)
    entities: HashMap<String, Vec<(u32, u16)>>,
    genres: HashMap<Genre, Vec<u32>>,
}

impl ContentIndex {
    fn build(items: &[ContentItem]) -> Self {
        let mut index = ContentIndex::default();
        for (pos, item) in items.iter().enumerate() {
            let pos = pos as u32;
            for t in &item.topics {
                index.topics.entry(t.clone()).or_default().push(pos);
            }
            for (slot, e) in item.entities.iter().enumerate() {
                for key in e.keys() {
                    index.entities.entry(key).or_default().push((pos, slot as u16));
                }
            }
            index.genres.entry(item.genre).or_default().push(pos);
        }
        index
    }

    pub fn topic_postings(&self, topic: &Topic) -> &[u32] {
        self.topics.get(topic).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn genre_postings(&self, genre: Genre) -> &[u32] {
        self.genres.get(&genre).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn entity_postings(&self, key: &str) -> impl Iterator<Item = u32> + '_ {
        self.entities.get(key).into_iter().flatten().map(|&(p, _)| p)
    }
}

/// Retrieval criteria. Items match if they share any topic or entity; genre
/// and activity act as filters.
#[derive(Debug, Clone, Default)]
pub struct ContentQuery {
    pub topics: Vec<Topic>,
    pub entities: Vec<String>,
    pub genre: Option<Genre>,
    pub activity: Option<Activity>,
}

impl ContentQuery {
    pub fn topic(topic: Topic) -> Self {
        ContentQuery {
            topics: vec![topic],
            ..Default::default()
        }
    }

    pub fn genre(mut self, genre: Genre) -> Self {
        self.genre = Some(genre);
        self
    }

    pub fn activity(mut self, activity: Activity) -> Self {
        self.activity = Some(activity);
        self
    }
}

/// Immutable, indexed collection of content items.
#[derive(Debug, Clone)]
pub struct ContentStore {
    registry: TopicRegistry,
    items: Vec<ContentItem>,
    by_id: HashMap<String, u32>,
    index: ContentIndex,
    /// entity key -> canonical name, across all items
    gazetteer: HashMap<String, String>,
}

impl ContentStore {
    pub fn empty() -> Self {
        Self::from_items(TopicRegistry::builtin(), Vec::new()).expect("empty store is valid")
    }

    /// Parses a pack document and builds the store from its items.
    pub fn load_pack(doc: &str) -> Result<Self, PackError> {
        Self::from_document(&PackDocument::parse(doc)?)
    }

    pub fn from_document(doc: &PackDocument) -> Result<Self, PackError> {
        let registry = doc.registry()?;
        let items = doc
            .items
            .iter()
            .map(|(_, rec)| rec.clone().into_item(&registry))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_items(registry, items)
    }

    pub fn from_items(registry: TopicRegistry, mut items: Vec<ContentItem>) -> Result<Self, PackError> {
        let mut by_id = HashMap::with_capacity(items.len());
        for (pos, item) in items.iter_mut().enumerate() {
            if by_id.insert(item.id.clone(), pos as u32).is_some() {
                return Err(PackError::DuplicateId(item.id.clone()));
            }
            if item.text.trim().is_empty() {
                return Err(PackError::InvalidItem {
                    item: item.id.clone(),
                    reason: "text is empty".into(),
                });
            }
            if let Some(t) = item.topics.iter().find(|t| !registry.contains(t)) {
                return Err(PackError::UnknownTopic {
                    item: item.id.clone(),
                    topic: t.to_string(),
                });
            }
            let mut seen = HashSet::new();
            item.topics.retain(|t| seen.insert(t.clone()));
            item.verbosity = text::word_count(&item.text);
        }
        let index = ContentIndex::build(&items);
        let mut gazetteer = HashMap::new();
        for item in &items {
            for e in &item.entities {
                for key in e.keys() {
                    gazetteer.entry(key).or_insert_with(|| e.canonical.clone());
                }
            }
        }
        Ok(ContentStore {
            registry,
            items,
            by_id,
            index,
            gazetteer,
        })
    }

    pub fn registry(&self) -> &TopicRegistry {
        &self.registry
    }

    pub fn index(&self) -> &ContentIndex {
        &self.index
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[ContentItem] {
        &self.items
    }

    pub fn get(&self, id: &str) -> Option<&ContentItem> {
        self.by_id.get(id).map(|&p| &self.items[p as usize])
    }

    /// Entity key -> canonical name for every entity in the store.
    pub fn gazetteer(&self) -> &HashMap<String, String> {
        &self.gazetteer
    }

    /// Items of `genre`, optionally restricted to `topic`, in id order.
    pub fn by_genre(&self, genre: Genre, topic: Option<&Topic>) -> Vec<&ContentItem> {
        let mut out: Vec<&ContentItem> = self
            .index
            .genre_postings(genre)
            .iter()
            .map(|&p| &self.items[p as usize])
            .filter(|it| topic.is_none_or(|t| it.has_topic(t)))
            .collect();
        out.sort_by(|a, b| a.id.cmp(&b.id));
        out
    }

    /// Overlap retrieval: score = shared topics + matched item entities.
    /// Sorted by score descending, then id ascending.
    pub fn query(&self, q: &ContentQuery) -> Vec<(&ContentItem, f64)> {
        let topics: BTreeSet<&Topic> = q
            .topics
            .iter()
            .filter_map(|t| self.registry.lookup(t.as_str()))
            .collect();
        let entity_keys: BTreeSet<String> = q
            .entities
            .iter()
            .map(|e| text::entity_key(e))
            .filter(|k| !k.is_empty())
            .collect();

        let mut scores: HashMap<u32, u32> = HashMap::new();
        for t in &topics {
            for &p in self.index.topic_postings(t) {
                *scores.entry(p).or_default() += 1;
            }
        }
        let mut matched_slots: HashSet<(u32, u16)> = HashSet::new();
        for key in &entity_keys {
            if let Some(list) = self.index.entities.get(key) {
                matched_slots.extend(list.iter().copied());
            }
        }
        for (p, _) in matched_slots {
            *scores.entry(p).or_default() += 1;
        }

        let mut out: Vec<(&ContentItem, f64)> = scores
            .into_iter()
            .map(|(p, s)| (&self.items[p as usize], f64::from(s)))
            .filter(|(it, _)| q.genre.is_none_or(|g| it.genre == g))
            .filter(|(it, _)| q.activity.is_none_or(|a| it.handcrafted_for == Some(a)))
            .collect();
        out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.id.cmp(&b.0.id)));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::content::item::Entity;

    fn dino(id: &str, genre: Genre) -> ContentItem {
        ContentItem::new(id, "Some dinosaur text.", vec![Topic::from("Dinosaurs")], genre)
    }

    #[test]
    fn empty_store_queries_empty() {
        let store = ContentStore::load_pack("").unwrap();
        assert!(store.is_empty());
        assert!(store.query(&ContentQuery::topic("Dinosaurs".into())).is_empty());
    }

    #[test]
    fn duplicate_ids_rejected_by_name() {
        let line = r#"{"id":"t1","text":"x y","topics":[],"genre":"fact","source":"curated","quality":1.0}"#;
        let err = ContentStore::load_pack(&format!("{line}\n{line}\n")).unwrap_err();
        assert_eq!(err, PackError::DuplicateId("t1".into()));
        assert!(err.to_string().contains("t1"));
    }

    #[test]
    fn unknown_topic_names_item() {
        let line = r#"{"id":"z9","text":"x y","topics":["Quantum Knitting"],"genre":"fact","source":"curated","quality":1.0}"#;
        let err = ContentStore::load_pack(line).unwrap_err();
        assert_eq!(
            err,
            PackError::UnknownTopic {
                item: "z9".into(),
                topic: "Quantum Knitting".into()
            }
        );
    }

    #[test]
    fn genre_and_activity_filters() {
        let items = vec![
            dino("a", Genre::Trivia),
            dino("b", Genre::Joke).handcrafted_for(Activity::Games),
            dino("c", Genre::Trivia).handcrafted_for(Activity::Chitchat),
        ];
        let store = ContentStore::from_items(TopicRegistry::builtin(), items).unwrap();
        let ids = |q: ContentQuery| -> Vec<String> {
            store.query(&q).into_iter().map(|(i, _)| i.id.clone()).collect()
        };
        assert_eq!(ids(ContentQuery::topic("Dinosaurs".into()).genre(Genre::Trivia)), ["a", "c"]);
        assert_eq!(ids(ContentQuery::topic("Dinosaurs".into()).activity(Activity::Games)), ["b"]);
        assert!(ids(ContentQuery::topic("NonexistentTopic".into())).is_empty());
    }

    #[test]
    fn entity_alias_survives_asr_variant() {
        let casals = ContentItem::new("m1", "Pau Casals recorded the Bach cello suites.", vec![Topic::from("Music")], Genre::Fact)
            .with_entities(vec![Entity {
                canonical: "Pau Casals".into(),
                aliases: vec!["pablo casals".into()],
            }]);
        let other = ContentItem::new("m0", "The cello has four strings.", vec![Topic::from("Music")], Genre::Fact);
        let store = ContentStore::from_items(TopicRegistry::builtin(), vec![other, casals]).unwrap();
        let hits = store.query(&ContentQuery {
            topics: vec!["Music".into()],
            entities: vec!["pablo casals".into()],
            ..Default::default()
        });
        assert_eq!(hits[0].0.id, "m1");
        assert_eq!(hits[0].1, 2.0);
        assert_eq!(hits[1].0.id, "m0");
        assert_eq!(hits[1].1, 1.0);
    }

    #[test]
    fn two_query_aliases_of_one_entity_count_once() {
        let casals = ContentItem::new("m1", "Cellist.", vec![], Genre::Fact).with_entities(vec![Entity {
            canonical: "Pau Casals".into(),
            aliases: vec!["pablo casals".into()],
        }]);
        let store = ContentStore::from_items(TopicRegistry::builtin(), vec![casals]).unwrap();
        let hits = store.query(&ContentQuery {
            entities: vec!["Pau Casals".into(), "Pablo Casals".into()],
            ..Default::default()
        });
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].1, 1.0);
    }

    #[test]
    fn verbosity_is_derived() {
        let mut item = dino("v", Genre::Fact);
        item.verbosity = 999;
        let store = ContentStore::from_items(TopicRegistry::builtin(), vec![item]).unwrap();
        assert_eq!(store.get("v").unwrap().verbosity, 3);
    }
}
