//! Content packs compiled into the binary.

use crate::content::PackDocument;

/// (file name, contents) of every bundled pack, in load order.
pub const PACKS: &[(&str, &str)] = &[
    ("flows.jsonl", include_str!("../../packs/flows.jsonl")),
    ("trivia.jsonl", include_str!("../../packs/trivia.jsonl")),
    ("prompts.jsonl", include_str!("../../packs/prompts.jsonl")),
    ("games.jsonl", include_str!("../../packs/games.jsonl")),
    ("stories.jsonl", include_str!("../../packs/stories.jsonl")),
    ("kb.jsonl", include_str!("../../packs/kb.jsonl")),
];

/// All bundled packs merged into one document.
pub fn document() -> PackDocument {
    let mut doc = PackDocument::default();
    for (name, text) in PACKS {
        let part = PackDocument::parse(text).unwrap_or_else(|e| panic!("bundled pack {name}: {e}"));
        doc.merge(part);
    }
    doc
}
