//! Simulated personas, batch session runs and the questionnaire scoring math.
//!
//! Impression scoring averages nine 7-point questionnaire items and sums the
//! averages. The recommendation effect is the change in the user's intent
//! to visit the recommended spot, post minus pre.

mod metrics;
mod persona;
mod simulate;

use thiserror::Error;

pub use metrics::{
    recommendation_effect, score_impressions, ImpressionItem, ImpressionResponse,
    ImpressionScores, MetricsAccumulator, MetricsReport, SCALE_MAX, SCALE_MIN,
};
pub use persona::{AnswerPolicy, LatencyProfile, Persona};
pub use simulate::{
    favourite_spot, run_batch, session_seed, simulated_impressions, simulated_post_intent,
    summarize, BatchError, BatchOutcome, BatchRunner, SessionError, SessionRecord,
    SessionSignals, SimulationConfig,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvaluationError {
    #[error("no data to score")]
    NoData,
    #[error("{item} rating {value} is outside 1..=7")]
    ItemOutOfRange { item: ImpressionItem, value: u8 },
    #[error("{item} mean {mean} is outside [1, 7]")]
    MeanOutOfRange { item: ImpressionItem, mean: f64 },
    #[error("visit intent {0} is outside 1..=7")]
    IntentOutOfRange(u8),
    #[error("persona {id}: {message}")]
    Persona { id: String, message: String },
}
