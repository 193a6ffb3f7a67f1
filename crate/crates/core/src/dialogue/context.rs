use std::collections::{HashMap, HashSet, VecDeque};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::activity::Activity;
use crate::content::Topic;
use crate::games::GameState;
use crate::storytelling::StoryState;

/// How a chit-chat topic is being served.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChitchatMode {
    /// Walking the topic's flow graph.
    Flow,
    /// Serving framed trivia items one by one.
    Trivia,
}

/// The activity in control of the conversation, with its private state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "activity", rename_all = "snake_case")]
pub enum ActiveState {
    Chitchat { topic: Topic, mode: ChitchatMode },
    Game(GameState),
    Story(StoryState),
}

impl ActiveState {
    pub fn activity(&self) -> Activity {
        match self {
            ActiveState::Chitchat { .. } => Activity::Chitchat,
            ActiveState::Game(_) => Activity::Games,
            ActiveState::Story(_) => Activity::Storytelling,
        }
    }
}

pub const FOCUS_ENTITY_CAP: usize = 5;
pub const RECENT_TURNS: usize = 3;

/// Per-conversation dialogue state. Owned by exactly one session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DialogueContext {
    pub session_id: String,
    pub active: Option<ActiveState>,
    /// Topics under discussion, most recent last, no repeats.
    pub topic_stack: Vec<Topic>,
    /// Recently mentioned entities, most recent last.
    pub focus_entities: Vec<String>,
    pub used_content_ids: HashSet<String>,
    pub flow_positions: HashMap<Topic, String>,
    /// Topics whose flow has been left; flows are not restarted.
    pub flows_done: HashSet<Topic>,
    /// States entered per topic flow, in order.
    pub flow_visits: HashMap<Topic, Vec<String>>,
    pub turn_index: u64,
    pub started_at: DateTime<Utc>,
    pub last_turn_at: DateTime<Utc>,
    pub recent_system_texts: VecDeque<String>,
    /// Topics the last system turn suggested; a bare "yes" picks the first.
    pub offered_topics: Vec<Topic>,
    /// Turn at which each topic was last suggested.
    pub topic_offered_at: HashMap<Topic, u64>,
    pub consecutive_restates: u32,
}

impl DialogueContext {
    pub fn new(session_id: impl Into<String>) -> Self {
        let now = Utc::now();
        DialogueContext {
            session_id: session_id.into(),
            active: None,
            topic_stack: Vec::new(),
            focus_entities: Vec::new(),
            used_content_ids: HashSet::new(),
            flow_positions: HashMap::new(),
            flows_done: HashSet::new(),
            flow_visits: HashMap::new(),
            turn_index: 0,
            started_at: now,
            last_turn_at: now,
            recent_system_texts: VecDeque::new(),
            offered_topics: Vec::new(),
            topic_offered_at: HashMap::new(),
            consecutive_restates: 0,
        }
    }

    pub fn active_activity(&self) -> Option<Activity> {
        self.active.as_ref().map(ActiveState::activity)
    }

    pub fn current_topic(&self) -> Option<&Topic> {
        self.topic_stack.last()
    }

    /// Topic of the active activity, if it has one.
    pub fn active_topic(&self) -> Option<&Topic> {
        match self.active.as_ref()? {
            ActiveState::Chitchat { topic, .. } => Some(topic),
            ActiveState::Game(g) => g.topic.as_ref(),
            ActiveState::Story(_) => self.current_topic(),
        }
    }

    pub fn explored(&self) -> HashSet<Topic> {
        self.topic_stack.iter().cloned().collect()
    }

    pub fn push_topic(&mut self, topic: &Topic) {
        self.topic_stack.retain(|t| t != topic);
        self.topic_stack.push(topic.clone());
    }

    pub fn note_entities(&mut self, entities: &[String]) {
        for e in entities {
            self.focus_entities.retain(|x| x != e);
            self.focus_entities.push(e.clone());
        }
        let excess = self.focus_entities.len().saturating_sub(FOCUS_ENTITY_CAP);
        self.focus_entities.drain(..excess);
    }

    pub fn remember_system_text(&mut self, text: &str) {
        self.recent_system_texts.push_back(text.to_string());
        while self.recent_system_texts.len() > RECENT_TURNS {
            self.recent_system_texts.pop_front();
        }
    }

    pub fn set_offered(&mut self, topics: Vec<Topic>) {
        for t in &topics {
            self.topic_offered_at.insert(t.clone(), self.turn_index);
        }
        self.offered_topics = topics;
    }
}
