use crate::activity::Activity;
use crate::content::Topic;
use crate::dialogue::{ActiveState, DialogueContext};
use crate::games::GameKind;
use crate::nlu::{Intent, NluResult};

/// Which activity should produce the next turn.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decision {
    /// The active activity keeps the floor.
    ContinueActive,
    /// Hand the turn to `activity`. A switch to search is a detour: the
    /// active activity is kept and resumes afterwards.
    SwitchTo {
        activity: Activity,
        topic: Option<Topic>,
        game_kind: Option<GameKind>,
    },
    /// The user asked to stop whatever is going on.
    Stop,
    /// Nothing to continue; use the fall-back ladder.
    Fallback,
}

impl Decision {
    fn switch(activity: Activity, topic: Option<Topic>) -> Self {
        Decision::SwitchTo {
            activity,
            topic,
            game_kind: None,
        }
    }
}

/// User-initiated switches preempt the active activity; otherwise the
/// active activity continues until it reports exhaustion.
pub fn arbitrate(ctx: &DialogueContext, nlu: &NluResult) -> Decision {
    let active = ctx.active.as_ref();
    match &nlu.intent {
        Intent::EntityQuery(_) => Decision::switch(Activity::Search, None),
        Intent::TopicRequest(t) => {
            let same = match active {
                Some(ActiveState::Chitchat { topic, .. }) => topic == t,
                Some(ActiveState::Game(g)) => g.topic.as_ref() == Some(t),
                _ => false,
            };
            if same {
                Decision::ContinueActive
            } else {
                Decision::switch(Activity::Chitchat, Some(t.clone()))
            }
        }
        Intent::StoryRequest => match active {
            Some(ActiveState::Story(_)) => Decision::ContinueActive,
            _ => Decision::switch(
                Activity::Storytelling,
                nlu.topics.first().or(ctx.current_topic()).cloned(),
            ),
        },
        Intent::GameRequest(kind) => Decision::SwitchTo {
            activity: Activity::Games,
            topic: nlu.topics.first().or(ctx.active_topic()).cloned(),
            game_kind: *kind,
        },
        Intent::StopRequest => Decision::Stop,
        _ if active.is_some() => Decision::ContinueActive,
        Intent::Affirm if !ctx.offered_topics.is_empty() => {
            Decision::switch(Activity::Chitchat, Some(ctx.offered_topics[0].clone()))
        }
        _ => match nlu.topics.first() {
            Some(t) => Decision::switch(Activity::Chitchat, Some(t.clone())),
            None => Decision::Fallback,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dialogue::ChitchatMode;

    fn nlu(intent: Intent) -> NluResult {
        NluResult::with_intent(intent)
    }

    fn in_music() -> DialogueContext {
        let mut ctx = DialogueContext::new("s");
        ctx.push_topic(&"Music".into());
        ctx.active = Some(ActiveState::Chitchat {
            topic: "Music".into(),
            mode: ChitchatMode::Flow,
        });
        ctx
    }

    #[test]
    fn question_detours_to_search() {
        let d = arbitrate(&in_music(), &nlu(Intent::EntityQuery("when was pau casals born".into())));
        assert_eq!(d, Decision::switch(Activity::Search, None));
    }

    #[test]
    fn topic_request_from_idle_starts_chitchat() {
        let d = arbitrate(&DialogueContext::new("s"), &nlu(Intent::TopicRequest("Dinosaurs".into())));
        assert_eq!(d, Decision::switch(Activity::Chitchat, Some("Dinosaurs".into())));
    }

    #[test]
    fn idle_unknown_falls_back() {
        assert_eq!(arbitrate(&DialogueContext::new("s"), &nlu(Intent::Unknown)), Decision::Fallback);
    }

    #[test]
    fn same_topic_request_continues() {
        assert_eq!(
            arbitrate(&in_music(), &nlu(Intent::TopicRequest("Music".into()))),
            Decision::ContinueActive
        );
        assert_eq!(
            arbitrate(&in_music(), &nlu(Intent::TopicRequest("Sports".into()))),
            Decision::switch(Activity::Chitchat, Some("Sports".into()))
        );
    }

    #[test]
    fn affirm_takes_first_offered_topic() {
        let mut ctx = DialogueContext::new("s");
        ctx.set_offered(vec!["Dinosaurs".into(), "Music".into()]);
        assert_eq!(
            arbitrate(&ctx, &nlu(Intent::Affirm)),
            Decision::switch(Activity::Chitchat, Some("Dinosaurs".into()))
        );
    }

    #[test]
    fn game_request_inherits_current_topic() {
        let d = arbitrate(&in_music(), &nlu(Intent::GameRequest(Some(GameKind::Riddle))));
        assert_eq!(
            d,
            Decision::SwitchTo {
                activity: Activity::Games,
                topic: Some("Music".into()),
                game_kind: Some(GameKind::Riddle)
            }
        );
        assert_eq!(arbitrate(&in_music(), &nlu(Intent::StopRequest)), Decision::Stop);
        assert_eq!(arbitrate(&in_music(), &nlu(Intent::Unknown)), Decision::ContinueActive);
    }
}
