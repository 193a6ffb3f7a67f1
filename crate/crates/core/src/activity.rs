use std::fmt;

use serde::{Deserialize, Serialize};

/// The four conversational activities a system turn can belong to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activity {
    Chitchat,
    Games,
    Storytelling,
    Search,
}

impl Activity {
    pub const ALL: [Activity; 4] = [
        Activity::Search,
        Activity::Chitchat,
        Activity::Games,
        Activity::Storytelling,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Activity::Chitchat => "chitchat",
            Activity::Games => "games",
            Activity::Storytelling => "storytelling",
            Activity::Search => "search",
        }
    }
}

impl fmt::Display for Activity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What kind of reply the system expects after a turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expects {
    YesNo,
    Choice,
    Open,
    #[default]
    None,
}

/// Per-system-turn provenance label: where the content came from and which
/// activity produced it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub source_id: String,
    pub activity: Activity,
}

impl Signature {
    pub fn new(source_id: impl Into<String>, activity: Activity) -> Self {
        Self {
            source_id: source_id.into(),
            activity,
        }
    }
}
