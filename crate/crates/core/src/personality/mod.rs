//! Big Five trait estimation.
//!
//! A profile is built from exactly three capture estimates taken at the
//! start of a session. Each capture yields a probability-of-HIGH per trait;
//! the profile averages the three vectors and labels each trait against a
//! threshold. Estimators are pluggable: a seeded simulator with per-trait
//! accuracies, a fixed fixture, or a remote model reached over TCP.

mod estimator;
mod noise;
pub mod remote;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use estimator::{
    EstimationHandle, EstimationStatus, FixedEstimator, SimulatedEstimator, TraitEstimator,
};
pub use noise::{CaptureSimulator, NoiseModel, TraitAccuracies};
pub use remote::{request_remote_estimate, RemoteEstimator};

/// Number of captures averaged into one profile.
pub const CAPTURES_PER_PROFILE: usize = 3;

/// Default high/low cut point.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Means within this distance below the threshold still count as reaching it.
/// Absorbs rounding in the three-way sum, e.g. (0.2 + 0.6 + 0.7) / 3.
const THRESHOLD_EPSILON: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PersonalityError {
    #[error("expected {expected} captures, got {found}")]
    Arity { expected: usize, found: usize },
    #[error("capture index {0} is outside 1..=3")]
    CaptureIndex(u8),
    #[error("capture index {0} appears more than once")]
    DuplicateCapture(u8),
    #[error("{trait_name} score {value} is outside [0, 1]")]
    ScoreOutOfRange { trait_name: Trait, value: f64 },
    #[error("threshold {0} is outside [0, 1]")]
    Threshold(f64),
    #[error("{trait_name} accuracy {value} is outside [0.5, 1.0]")]
    AccuracyOutOfRange { trait_name: Trait, value: f64 },
    #[error("image payload is empty")]
    EmptyPayload,
    #[error("estimator timed out")]
    Timeout,
    #[error("estimator protocol error: {0}")]
    Protocol(String),
    #[error("estimator i/o error: {0}")]
    Io(String),
}

/// The five factors, in wire order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trait {
    Extraversion,
    Agreeableness,
    Conscientiousness,
    Neuroticism,
    Openness,
}

impl Trait {
    pub const ALL: [Trait; 5] = [
        Trait::Extraversion,
        Trait::Agreeableness,
        Trait::Conscientiousness,
        Trait::Neuroticism,
        Trait::Openness,
    ];

    /// Single-letter code used by the remote-estimator wire format.
    pub fn code(self) -> char {
        match self {
            Trait::Extraversion => 'E',
            Trait::Agreeableness => 'A',
            Trait::Conscientiousness => 'C',
            Trait::Neuroticism => 'N',
            Trait::Openness => 'O',
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Trait::Extraversion => "extraversion",
            Trait::Agreeableness => "agreeableness",
            Trait::Conscientiousness => "conscientiousness",
            Trait::Neuroticism => "neuroticism",
            Trait::Openness => "openness",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Trait {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    High,
    Low,
}

impl Level {
    pub fn flipped(self) -> Level {
        match self {
            Level::High => Level::Low,
            Level::Low => Level::High,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Level::High => "high",
            Level::Low => "low",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Probability-of-HIGH for each of the five traits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraitScoreVector {
    scores: [f64; 5],
}

impl TraitScoreVector {
    /// Builds a vector from scores in trait order, rejecting anything outside [0, 1].
    pub fn new(scores: [f64; 5]) -> Result<Self, PersonalityError> {
        for (t, &value) in Trait::ALL.iter().zip(scores.iter()) {
            if !(0.0..=1.0).contains(&value) {
                return Err(PersonalityError::ScoreOutOfRange {
                    trait_name: *t,
                    value,
                });
            }
        }
        Ok(Self { scores })
    }

    pub fn uniform(value: f64) -> Result<Self, PersonalityError> {
        Self::new([value; 5])
    }

    pub fn get(&self, t: Trait) -> f64 {
        self.scores[t.index()]
    }

    pub fn as_array(&self) -> [f64; 5] {
        self.scores
    }

    pub fn iter(&self) -> impl Iterator<Item = (Trait, f64)> + '_ {
        Trait::ALL.iter().map(move |&t| (t, self.get(t)))
    }
}

/// High/Low label per trait.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TraitLabels {
    labels: [Level; 5],
}

impl TraitLabels {
    pub fn new(labels: [Level; 5]) -> Self {
        Self { labels }
    }

    pub fn all(level: Level) -> Self {
        Self { labels: [level; 5] }
    }

    pub fn get(&self, t: Trait) -> Level {
        self.labels[t.index()]
    }

    pub fn with(mut self, t: Trait, level: Level) -> Self {
        self.labels[t.index()] = level;
        self
    }

    pub fn extraversion(&self) -> Level {
        self.get(Trait::Extraversion)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Trait, Level)> + '_ {
        Trait::ALL.iter().map(move |&t| (t, self.get(t)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaptureSource {
    Remote,
    Simulated,
    Fixture,
}

/// One estimator call on one captured frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaptureEstimate {
    pub capture_index: u8,
    pub scores: TraitScoreVector,
    pub source: CaptureSource,
}

impl CaptureEstimate {
    pub fn new(capture_index: u8, scores: TraitScoreVector, source: CaptureSource) -> Self {
        Self {
            capture_index,
            scores,
            source,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersonalityProfile {
    pub mean_scores: TraitScoreVector,
    pub labels: TraitLabels,
    /// Set when estimation did not resolve in time and a fallback was installed.
    pub defaulted: bool,
}

impl PersonalityProfile {
    /// Fallback profile used when estimation misses its deadline: every trait Low.
    pub fn defaulted_low() -> Self {
        Self {
            mean_scores: TraitScoreVector { scores: [0.0; 5] },
            labels: TraitLabels::all(Level::Low),
            defaulted: true,
        }
    }

    pub fn extraversion(&self) -> Level {
        self.labels.extraversion()
    }
}

/// Label a single mean score. Reaching the threshold counts as High.
pub fn label_for(mean: f64, threshold: f64) -> Level {
    if mean >= threshold - THRESHOLD_EPSILON {
        Level::High
    } else {
        Level::Low
    }
}

/// Averages exactly three capture estimates into a profile.
///
/// Captures may arrive in any order; each index in 1..=3 must appear once.
/// The result is independent of the order the captures are given in.
pub fn aggregate(
    captures: &[CaptureEstimate],
    threshold: f64,
) -> Result<PersonalityProfile, PersonalityError> {
    if captures.len() != CAPTURES_PER_PROFILE {
        return Err(PersonalityError::Arity {
            expected: CAPTURES_PER_PROFILE,
            found: captures.len(),
        });
    }
    if !(0.0..=1.0).contains(&threshold) {
        return Err(PersonalityError::Threshold(threshold));
    }
    let mut seen = [false; CAPTURES_PER_PROFILE];
    for capture in captures {
        let idx = capture.capture_index;
        if !(1..=CAPTURES_PER_PROFILE as u8).contains(&idx) {
            return Err(PersonalityError::CaptureIndex(idx));
        }
        if std::mem::replace(&mut seen[idx as usize - 1], true) {
            return Err(PersonalityError::DuplicateCapture(idx));
        }
        // Vectors built through `new` are already in range, but deserialized
        // ones are not checked.
        TraitScoreVector::new(capture.scores.as_array())?;
    }

    let mut means = [0.0; 5];
    let mut labels = [Level::Low; 5];
    for t in Trait::ALL {
        let mut values: Vec<f64> = captures.iter().map(|c| c.scores.get(t)).collect();
        // Fixed summation order keeps the mean bit-identical under permutation.
        values.sort_by(f64::total_cmp);
        let mean = (values[0] + values[1] + values[2]) / CAPTURES_PER_PROFILE as f64;
        means[t.index()] = mean.clamp(0.0, 1.0);
        labels[t.index()] = label_for(mean, threshold);
    }

    Ok(PersonalityProfile {
        mean_scores: TraitScoreVector { scores: means },
        labels: TraitLabels::new(labels),
        defaulted: false,
    })
}
