//! Content-pack documents.
//!
//! A pack is UTF-8 text with one JSON object per line. A `"record"` field
//! selects the record kind; it defaults to `"item"` so plain content lines
//! need no tag:
//!
//! ```text
//! {"id":"dino-1","text":"...","topics":["Dinosaurs"],"genre":"trivia","source":"curated","quality":1.0}
//! {"record":"topic","name":"Movies","aliases":["films"]}
//! {"record":"flow","topic":"Music","start":"intro","states":[...]}
//! {"record":"kb","id":"kb-casals","entity":"Pau Casals",...}
//! ```
//!
//! Blank lines are ignored.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::activity::Activity;
use crate::chitchat::flow::FlowSpec;
use crate::content::item::{ContentItem, Entity, Genre, Payload, Source};
use crate::content::registry::{Topic, TopicRecord, TopicRegistry};
use crate::content::PackError;
use crate::games::{Choice, HypotheticalItem, JokeItem, RiddleItem, WyrItem, WyrOption};
use crate::search::KbRecord;
use crate::storytelling::{Installment, Story, StoryKind};
use crate::text;

/// Wire shape of a content item, payload fields flattened in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ItemRecord {
    pub id: String,
    pub text: String,
    #[serde(default)]
    pub topics: Vec<String>,
    #[serde(default)]
    pub entities: Vec<Entity>,
    pub genre: Genre,
    pub source: Source,
    pub quality: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub handcrafted_for: Option<Activity>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub option_a: Option<WyrOption>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub option_b: Option<WyrOption>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub own_choice: Option<Choice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub justification: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub own_answer: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub follow_up_offer: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub punchline: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<StoryKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub installments: Option<Vec<Installment>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closing: Option<String>,
}

impl ItemRecord {
    /// A plain record with no payload fields.
    pub fn plain(id: &str, text: &str, topics: &[&str], genre: Genre, source: Source, quality: f64) -> Self {
        ItemRecord {
            id: id.to_string(),
            text: text.to_string(),
            topics: topics.iter().map(|t| t.to_string()).collect(),
            entities: Vec::new(),
            genre,
            source,
            quality,
            handcrafted_for: None,
            option_a: None,
            option_b: None,
            own_choice: None,
            justification: None,
            own_answer: None,
            follow_up_offer: None,
            answer: None,
            punchline: None,
            title: None,
            kind: None,
            installments: None,
            closing: None,
        }
    }

    pub fn from_item(item: &ContentItem) -> Self {
        let topics: Vec<&str> = item.topics.iter().map(Topic::as_str).collect();
        let mut rec = Self::plain(&item.id, &item.text, &topics, item.genre, item.source, item.quality);
        rec.entities = item.entities.clone();
        rec.handcrafted_for = item.handcrafted_for;
        match &item.payload {
            Payload::None => {}
            Payload::Wyr(w) => {
                rec.option_a = Some(w.option_a.clone());
                rec.option_b = Some(w.option_b.clone());
                rec.own_choice = Some(w.own_choice);
                rec.justification = Some(w.justification.clone());
            }
            Payload::Hypothetical(h) => {
                rec.own_answer = Some(h.own_answer.clone());
                rec.justification = Some(h.justification.clone());
                rec.follow_up_offer = Some(h.follow_up_offer.clone());
            }
            Payload::Riddle(r) => rec.answer = Some(r.answer.clone()),
            Payload::Joke(j) => rec.punchline = Some(j.punchline.clone()),
            Payload::Story(s) => {
                rec.title = Some(s.title.clone());
                rec.kind = Some(s.kind);
                rec.installments = Some(s.installments.clone());
                rec.closing = Some(s.closing.clone());
            }
        }
        rec
    }

    fn payload_fields(&self) -> Vec<&'static str> {
        let mut present = Vec::new();
        macro_rules! check {
            ($($f:ident),*) => { $( if self.$f.is_some() { present.push(stringify!($f)); } )* };
        }
        check!(option_a, option_b, own_choice, justification, own_answer, follow_up_offer, answer, punchline, title, kind, installments, closing);
        present
    }

    /// Validates the record and resolves topic names through the registry.
    pub fn into_item(self, registry: &TopicRegistry) -> Result<ContentItem, PackError> {
        let invalid = |reason: String| PackError::InvalidItem {
            item: self.id.clone(),
            reason,
        };
        if self.id.trim().is_empty() {
            return Err(PackError::InvalidItem {
                item: self.id.clone(),
                reason: "id is empty".into(),
            });
        }
        if self.text.trim().is_empty() {
            return Err(invalid("text is empty".into()));
        }
        if !self.quality.is_finite() || !(0.0..=1.0).contains(&self.quality) {
            return Err(invalid(format!("quality {} outside [0, 1]", self.quality)));
        }
        let mut topics: Vec<Topic> = Vec::with_capacity(self.topics.len());
        for name in &self.topics {
            let topic = registry.lookup(name).ok_or_else(|| PackError::UnknownTopic {
                item: self.id.clone(),
                topic: name.clone(),
            })?;
            if !topics.contains(topic) {
                topics.push(topic.clone());
            }
        }
        let mut entities: Vec<Entity> = Vec::new();
        for e in &self.entities {
            if text::entity_key(&e.canonical).is_empty() {
                return Err(invalid("entity with empty canonical name".into()));
            }
            if !entities
                .iter()
                .any(|x| text::entity_key(&x.canonical) == text::entity_key(&e.canonical))
            {
                entities.push(e.clone());
            }
        }

        let payload = self.build_payload().map_err(invalid)?;
        let mut item = ContentItem::new(self.id.clone(), self.text.clone(), topics, self.genre)
            .with_entities(entities)
            .with_source(self.source, self.quality)
            .with_payload(payload);
        item.handcrafted_for = self.handcrafted_for;
        Ok(item)
    }

    fn build_payload(&self) -> Result<Payload, String> {
        fn need<T: Clone>(v: &Option<T>, field: &str) -> Result<T, String> {
            v.clone().ok_or_else(|| format!("missing field {field}"))
        }
        let allowed: &[&str] = match self.genre {
            Genre::WouldYouRather => &["option_a", "option_b", "own_choice", "justification"],
            Genre::Hypothetical => &["own_answer", "justification", "follow_up_offer"],
            Genre::Riddle => &["answer"],
            Genre::Joke => &["punchline"],
            Genre::Story | Genre::Dream => &["title", "kind", "installments", "closing"],
            _ => &[],
        };
        if let Some(extra) = self.payload_fields().into_iter().find(|f| !allowed.contains(f)) {
            return Err(format!("field {extra} not valid for genre {:?}", self.genre));
        }
        let payload = match self.genre {
            Genre::WouldYouRather => Payload::Wyr(WyrItem::new(
                need(&self.option_a, "option_a")?,
                need(&self.option_b, "option_b")?,
                need(&self.own_choice, "own_choice")?,
                need(&self.justification, "justification")?,
            )?),
            Genre::Hypothetical => Payload::Hypothetical(HypotheticalItem::new(
                need(&self.own_answer, "own_answer")?,
                need(&self.justification, "justification")?,
                need(&self.follow_up_offer, "follow_up_offer")?,
            )?),
            Genre::Riddle => Payload::Riddle(RiddleItem::new(need(&self.answer, "answer")?)?),
            Genre::Joke => Payload::Joke(JokeItem::new(need(&self.punchline, "punchline")?)?),
            Genre::Story | Genre::Dream => {
                let kind = match (self.kind, self.genre) {
                    (Some(k), _) => k,
                    (None, Genre::Dream) => StoryKind::Dream,
                    (None, _) => return Err("missing field kind".into()),
                };
                Payload::Story(Story::new(
                    self.title.clone().unwrap_or_else(|| self.text.clone()),
                    kind,
                    need(&self.installments, "installments")?,
                    need(&self.closing, "closing")?,
                )?)
            }
            _ => Payload::None,
        };
        Ok(payload)
    }
}

/// A parsed pack, sections kept in file order with their line numbers.
#[derive(Debug, Clone, Default)]
pub struct PackDocument {
    pub topics: Vec<TopicRecord>,
    pub items: Vec<(usize, ItemRecord)>,
    pub flows: Vec<(usize, FlowSpec)>,
    pub kb: Vec<(usize, KbRecord)>,
}

fn from_line<T: serde::de::DeserializeOwned>(line: usize, value: Value) -> Result<T, PackError> {
    serde_json::from_value(value).map_err(|e| PackError::Malformed {
        line,
        message: e.to_string(),
    })
}

impl PackDocument {
    pub fn parse(doc: &str) -> Result<Self, PackError> {
        let mut out = PackDocument::default();
        for (i, raw) in doc.lines().enumerate() {
            let line = i + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let mut value: Value = serde_json::from_str(raw).map_err(|e| PackError::Malformed {
                line,
                message: e.to_string(),
            })?;
            let Some(obj) = value.as_object_mut() else {
                return Err(PackError::Malformed {
                    line,
                    message: "record is not a JSON object".into(),
                });
            };
            let kind = match obj.remove("record") {
                None => "item".to_string(),
                Some(Value::String(s)) => s,
                Some(other) => {
                    return Err(PackError::Malformed {
                        line,
                        message: format!("record tag must be a string, got {other}"),
                    })
                }
            };
            match kind.as_str() {
                "item" => out.items.push((line, from_line(line, value)?)),
                "topic" => out.topics.push(from_line(line, value)?),
                "flow" => out.flows.push((line, from_line(line, value)?)),
                "kb" => out.kb.push((line, from_line(line, value)?)),
                other => {
                    return Err(PackError::Malformed {
                        line,
                        message: format!("unknown record kind {other:?}"),
                    })
                }
            }
        }
        Ok(out)
    }

    /// Appends another document's records after this one's.
    pub fn merge(&mut self, other: PackDocument) {
        self.topics.extend(other.topics);
        self.items.extend(other.items);
        self.flows.extend(other.flows);
        self.kb.extend(other.kb);
    }

    /// The built-in registry extended with this document's topic records.
    pub fn registry(&self) -> Result<TopicRegistry, PackError> {
        let mut reg = TopicRegistry::builtin();
        for rec in &self.topics {
            reg.register(rec).map_err(|e| PackError::Registry(e.to_string()))?;
        }
        Ok(reg)
    }

    /// Serializes back to the line format.
    pub fn to_jsonl(&self) -> String {
        fn tagged<T: Serialize>(tag: &str, v: &T) -> String {
            let mut value = serde_json::to_value(v).expect("pack records serialize");
            if let Some(obj) = value.as_object_mut() {
                obj.insert("record".into(), Value::String(tag.into()));
            }
            value.to_string()
        }
        let mut out = String::new();
        for t in &self.topics {
            out.push_str(&tagged("topic", t));
            out.push('\n');
        }
        for (_, item) in &self.items {
            out.push_str(&serde_json::to_string(item).expect("item records serialize"));
            out.push('\n');
        }
        for (_, flow) in &self.flows {
            out.push_str(&tagged("flow", flow));
            out.push('\n');
        }
        for (_, kb) in &self.kb {
            out.push_str(&tagged("kb", kb));
            out.push('\n');
        }
        out
    }
}
