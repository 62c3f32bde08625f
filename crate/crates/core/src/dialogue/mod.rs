//! Session state machine for the recommendation dialogue.
//!
//! ```text
//! Greeting ──reply──> [AwaitProfile] ──> Assessment ──reply──> Question(1..3)
//!     ──> Recommend(1..3) ──> PostChat ──> Closing
//! ```
//!
//! Personality estimation runs while the greeting is exchanged. The profile
//! must be installed before Assessment; if it has not arrived by the
//! configured deadline a defaulted all-Low profile is used instead. The
//! extraversion label of the installed profile selects which row of the
//! question policy is asked.

mod answers;
mod engine;
mod phase;
mod policy;
mod templates;
mod transcript;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::personality::PersonalityProfile;
use crate::spots::{CategoryGroup, SpotId, Tag};

pub use answers::{canonicalize_answer, extract_tags};
pub use engine::{choose_recommendation, DialogueConfig, DialogueEngine, MAX_SYSTEM_TURNS};
pub use phase::{Phase, Slot};
pub use policy::{select_question, PromptKey, QuestionSpec};
pub use templates::{TemplateError, TemplateStore};
pub use transcript::{Speaker, Transcript, TranscriptEntry, TranscriptError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DialogueError {
    #[error("unknown spot id {0}")]
    UnknownSpot(SpotId),
    #[error("preselected spots must differ, got {0} twice")]
    IdenticalPair(SpotId),
    #[error("session is closed")]
    SessionClosed,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Template(#[from] TemplateError),
}

/// What the user said in answer to one question slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerRecord {
    pub slot: Slot,
    pub raw_text: String,
    pub canonical_tags: std::collections::BTreeSet<Tag>,
    /// Replies to follow-up prompts within the same slot, in order.
    pub followup_texts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DialogueState {
    pub session_id: String,
    pub phase: Phase,
    /// The two spots the user picked, in the order they picked them.
    pub preselected: (SpotId, SpotId),
    /// Category group that keys the question policy; taken from the first spot.
    pub group: CategoryGroup,
    /// Latest estimate delivered by the estimation task, if any.
    pub estimate: Option<PersonalityProfile>,
    /// Profile installed at the branch point; fixed for the rest of the session.
    pub profile: Option<PersonalityProfile>,
    pub answers: Vec<AnswerRecord>,
    /// Question specs issued so far, one per slot.
    pub questions: Vec<QuestionSpec>,
    pub recommended: Option<SpotId>,
    /// System turns taken, the greeting included.
    pub turn_count: u32,
}

impl DialogueState {
    /// Records an estimate that finished in the background. Ignored once the
    /// branch has been taken.
    pub fn deliver_estimate(&mut self, profile: PersonalityProfile) {
        if self.profile.is_none() {
            self.estimate = Some(profile);
        }
    }

    pub fn is_closed(&self) -> bool {
        self.phase == Phase::Closing
    }

    pub fn all_answer_tags(&self) -> impl Iterator<Item = &Tag> {
        self.answers.iter().flat_map(|a| a.canonical_tags.iter())
    }
}
