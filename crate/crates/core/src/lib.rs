pub mod activity;
pub mod chitchat;
pub mod content;
pub mod dialogue;
pub mod games;
pub mod gateway;
pub mod ingest;
pub mod nlu;
pub mod search;
pub mod storytelling;
pub mod telemetry;
pub mod text;
