//! Shared text normalization.
//!
//! Two normal forms are used throughout the crate:
//!
//! * **tokens**: lowercase words split on whitespace and punctuation, keeping
//!   apostrophes and hyphens that sit inside a word (`it's`, `t-rex`).
//! * **entity keys**: lowercase with all punctuation removed and whitespace
//!   collapsed (`"Pau  Casals!"` becomes `"pau casals"`). Entity keys are the
//!   unit of comparison for named entities and their aliases.

use std::collections::BTreeSet;

/// Lowercased word tokens with intra-word `'` and `-` preserved.
pub fn tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let chars: Vec<char> = text.chars().collect();
    for (i, &c) in chars.iter().enumerate() {
        if c.is_alphanumeric() {
            cur.extend(c.to_lowercase());
        } else if (c == '\'' || c == '’' || c == '-')
            && !cur.is_empty()
            && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric())
        {
            cur.push(if c == '-' { '-' } else { '\'' });
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Tokens joined by single spaces.
pub fn normalize(text: &str) -> String {
    tokens(text).join(" ")
}

/// Entity key: lowercase, punctuation stripped, whitespace collapsed.
pub fn entity_key(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for c in text.chars() {
        if c.is_whitespace() {
            pending_space = !out.is_empty();
        } else if c.is_alphanumeric() {
            if pending_space {
                out.push(' ');
                pending_space = false;
            }
            out.extend(c.to_lowercase());
        }
    }
    out
}

/// Whitespace-token count, the verbosity measure for content items.
pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

const STOPWORDS: &[&str] = &[
    "a", "about", "all", "also", "am", "an", "and", "any", "are", "as", "at", "be", "because",
    "been", "but", "by", "can", "could", "did", "do", "does", "don't", "for", "from", "had",
    "has", "have", "he", "her", "him", "his", "how", "i", "i'm", "if", "in", "into", "is", "it",
    "it's", "its", "just", "let's", "like", "me", "more", "most", "my", "no", "not", "of", "on",
    "or", "our", "so", "some", "than", "that", "that's", "the", "their", "them", "then", "there",
    "these", "they", "this", "those", "to", "too", "up", "us", "very", "was", "we", "were",
    "what", "what's", "when", "where", "which", "who", "why", "will", "with", "would", "yes",
    "you", "your",
];

pub fn is_stopword(token: &str) -> bool {
    STOPWORDS.binary_search(&token).is_ok()
}

/// Distinct non-stopword tokens.
pub fn content_words(text: &str) -> BTreeSet<String> {
    tokens(text)
        .into_iter()
        .filter(|t| !is_stopword(t))
        .collect()
}

/// Finds `phrase` (already tokenized) as a contiguous run inside `haystack`.
/// Returns the start index of the first occurrence at or after `from`.
pub fn find_phrase(haystack: &[String], phrase: &[String], from: usize) -> Option<usize> {
    if phrase.is_empty() || phrase.len() > haystack.len() {
        return None;
    }
    (from..=haystack.len() - phrase.len()).find(|&i| haystack[i..i + phrase.len()] == *phrase)
}
