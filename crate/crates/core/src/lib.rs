//! Personality-adaptive recommendation dialogue engine.
//!
//! A session greets the user while three face captures are estimated in the
//! background, comments on the estimated Big Five traits, asks three policy
//! questions chosen by spot category and extraversion, then recommends one
//! of the user's two preselected spots with three appeal points.
//!
//! * [`personality`]: estimator contract, capture aggregation, noise model.
//! * [`spots`]: the six-spot catalog and answer matching.
//! * [`dialogue`]: the session state machine and question policy.
//! * [`multimodal`]: expression, motion and prosody directives.
//! * [`evaluation`]: simulated personas, batch runs, impression scoring.
//! * [`service`]: session registry and client/server message protocol.

pub mod dialogue;
pub mod evaluation;
pub mod multimodal;
pub mod personality;
pub mod service;
pub mod spots;

pub use dialogue::{
    AnswerRecord, DialogueConfig, DialogueEngine, DialogueError, DialogueState, Phase, Slot,
};
pub use multimodal::{Directive, DirectiveName, SystemAction};
pub use personality::{
    aggregate, CaptureEstimate, Level, NoiseModel, PersonalityProfile, Trait, TraitLabels,
    TraitScoreVector,
};
pub use spots::{CategoryGroup, SightseeingSpot, SpotCatalog, SpotId, Tag};
pub use service::{ClientMessage, ServerMessage, SessionRegistry, ServiceError};
