//! The dialogue manager: arbitration between activities, candidate ranking,
//! per-session context, and signed system turns.

pub mod arbitrate;
pub mod context;
pub mod engine;
pub mod rank;

use serde::{Deserialize, Serialize};

use crate::activity::{Expects, Signature};
use crate::search::Rung;

pub use arbitrate::{arbitrate, Decision};
pub use context::{ActiveState, ChitchatMode, DialogueContext};
pub use engine::{Engine, EngineConfig, BOT_NAME, RESTATE_PROMPT};
pub use rank::{rank, Candidate, RankError, RankWeights, ScoreParts, Tier};

/// One system response, signed with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemTurn {
    pub text: String,
    pub signature: Signature,
    pub expects: Expects,
    /// Wall-clock time spent producing the turn.
    pub elapsed_ms: f64,
    pub tier: Tier,
    /// Fall-back rungs tried, when the turn came from the ladder.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<Rung>,
}
