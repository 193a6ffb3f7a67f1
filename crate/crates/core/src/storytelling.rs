//! Stories and dreams told in installments.
//!
//! A story opens with a preamble that asks for consent. Each backchannel
//! ("yes", "uh huh") releases the next installment, which ends in its tag
//! question so the user gets the floor back. The last installment carries
//! the closing instead of a tag question. A story of `n` installments thus
//! takes `n + 1` system turns when heard to the end.

use serde::{Deserialize, Serialize};

use crate::activity::Expects;
use crate::nlu::{Intent, NluResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoryKind {
    Fable,
    Personal,
    Dream,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Installment {
    pub text: String,
    pub tag_question: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Story {
    pub title: String,
    pub kind: StoryKind,
    pub installments: Vec<Installment>,
    pub closing: String,
}

impl Story {
    pub fn new(title: String, kind: StoryKind, installments: Vec<Installment>, closing: String) -> Result<Self, String> {
        if installments.len() < 2 {
            return Err(format!("a story needs at least 2 installments, got {}", installments.len()));
        }
        if let Some(i) = installments.iter().position(|p| p.text.trim().is_empty()) {
            return Err(format!("installment {i} has empty text"));
        }
        if let Some(i) = installments.iter().position(|p| p.tag_question.trim().is_empty()) {
            return Err(format!("installment {i} has an empty tag question"));
        }
        if closing.trim().is_empty() {
            return Err("closing is empty".into());
        }
        Ok(Story {
            title,
            kind,
            installments,
            closing,
        })
    }

    /// Text of installment `i` as delivered: tag question, or the closing
    /// for the last one.
    pub fn installment_turn(&self, i: usize) -> String {
        let part = &self.installments[i];
        let tail = if i + 1 == self.installments.len() {
            &self.closing
        } else {
            &part.tag_question
        };
        format!("{} {}", part.text.trim(), tail.trim())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoryState {
    pub story_id: String,
    /// Installments delivered so far.
    pub next_installment_index: usize,
    pub active: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoryTurn {
    pub text: String,
    pub expects: Expects,
    pub state: StoryState,
    /// Installment delivered by this turn, if any.
    pub installment: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StoryStep {
    /// Story continues; the user holds the floor.
    Turn(StoryTurn),
    /// The last installment and closing were delivered.
    Finished(StoryTurn),
    /// The story stopped early. `interrupted` is set when the user moved on
    /// to something else rather than declining, so the caller should serve
    /// that request after the wrap-up.
    Aborted {
        wrap_up: String,
        state: StoryState,
        interrupted: bool,
    },
}

pub const KEEP_GOING: &str = "Should I keep going?";

fn preamble(story: &Story) -> String {
    let opener = match story.kind {
        StoryKind::Dream => "Alright, I'll tell you about a dream I had.".to_string(),
        StoryKind::Personal => "Alright, I'll tell you a story about me.".to_string(),
        StoryKind::Fable => format!("Alright, I'll tell you the story of {}.", story.title.trim()),
    };
    format!("{opener} Just to remind you that at any time you can say stop and interrupt me. Sound good?")
}

/// Opening turn: preamble with interruption reminder and consent question.
pub fn begin_story(story_id: &str, story: &Story) -> StoryTurn {
    StoryTurn {
        text: preamble(story),
        expects: Expects::YesNo,
        state: StoryState {
            story_id: story_id.to_string(),
            next_installment_index: 0,
            active: true,
        },
        installment: None,
    }
}

pub fn continue_story(story: &Story, state: &StoryState, nlu: &NluResult) -> StoryStep {
    let not_started = state.next_installment_index == 0;
    let abort = |wrap_up: &str, interrupted: bool| StoryStep::Aborted {
        wrap_up: wrap_up.to_string(),
        state: StoryState {
            active: false,
            ..state.clone()
        },
        interrupted,
    };
    if !state.active || state.next_installment_index >= story.installments.len() {
        return abort("That's the end of that story.", false);
    }
    match &nlu.intent {
        Intent::Affirm | Intent::StoryRequest => {
            let i = state.next_installment_index;
            let last = i + 1 == story.installments.len();
            let turn = StoryTurn {
                text: story.installment_turn(i),
                expects: if last { Expects::None } else { Expects::YesNo },
                state: StoryState {
                    story_id: state.story_id.clone(),
                    next_installment_index: i + 1,
                    active: !last,
                },
                installment: Some(i),
            };
            if last {
                StoryStep::Finished(turn)
            } else {
                StoryStep::Turn(turn)
            }
        }
        Intent::Deny | Intent::StopRequest if not_started => abort("No problem, maybe another time.", false),
        Intent::Deny | Intent::StopRequest => abort("Okay, I'll stop the story there.", false),
        Intent::TopicRequest(_) | Intent::EntityQuery(_) | Intent::GameRequest(_) => {
            abort("Okay, let's leave the story there.", true)
        }
        Intent::Unknown | Intent::SelfDisclosure => StoryStep::Turn(StoryTurn {
            text: KEEP_GOING.to_string(),
            expects: Expects::YesNo,
            state: state.clone(),
            installment: None,
        }),
    }
}
