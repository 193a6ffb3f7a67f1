//! Topic-annotated content: the topic registry, content items, the pack file
//! format, and the retrieval index.

pub mod bundled;
pub mod item;
pub mod pack;
pub mod registry;
pub mod store;

use thiserror::Error;

pub use item::{ContentItem, Entity, Genre, Payload, Source};
pub use pack::{ItemRecord, PackDocument};
pub use registry::{Topic, TopicRecord, TopicRegistry};
pub use store::{ContentIndex, ContentQuery, ContentStore};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PackError {
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },
    #[error("duplicate content id {0:?}")]
    DuplicateId(String),
    #[error("item {item:?}: unknown topic {topic:?}")]
    UnknownTopic { item: String, topic: String },
    #[error("item {item:?}: {reason}")]
    InvalidItem { item: String, reason: String },
    #[error("flow {topic:?}: {reason}")]
    InvalidFlow { topic: String, reason: String },
    #[error("kb record {id:?}: {reason}")]
    InvalidKb { id: String, reason: String },
    #[error("topic registry: {0}")]
    Registry(String),
}
