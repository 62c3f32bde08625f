use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    CaptureEstimate, CaptureSource, Level, PersonalityError, Trait, TraitLabels, TraitScoreVector,
};

/// Per-trait probability that a simulated capture lands on the correct side of 0.5.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraitAccuracies {
    values: [f64; 5],
}

impl TraitAccuracies {
    /// Validation accuracies of the reference single-image classifier.
    pub const REFERENCE: TraitAccuracies = TraitAccuracies {
        values: [0.8300, 0.7300, 0.7100, 0.8265, 0.7800],
    };

    pub const PERFECT: TraitAccuracies = TraitAccuracies { values: [1.0; 5] };

    pub fn new(values: [f64; 5]) -> Result<Self, PersonalityError> {
        for (t, &value) in Trait::ALL.iter().zip(values.iter()) {
            if !(0.5..=1.0).contains(&value) {
                return Err(PersonalityError::AccuracyOutOfRange {
                    trait_name: *t,
                    value,
                });
            }
        }
        Ok(Self { values })
    }

    pub fn get(&self, t: Trait) -> f64 {
        self.values[t as usize]
    }

    pub fn with(self, t: Trait, value: f64) -> Result<Self, PersonalityError> {
        let mut values = self.values;
        values[t as usize] = value;
        Self::new(values)
    }
}

/// Accuracy table plus the seed of the capture stream it drives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub accuracies: TraitAccuracies,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(accuracies: TraitAccuracies, seed: u64) -> Self {
        Self { accuracies, seed }
    }

    pub fn reference(seed: u64) -> Self {
        Self::new(TraitAccuracies::REFERENCE, seed)
    }

    pub fn perfect(seed: u64) -> Self {
        Self::new(TraitAccuracies::PERFECT, seed)
    }

    /// Same accuracies, different stream.
    pub fn reseeded(&self, seed: u64) -> Self {
        Self::new(self.accuracies, seed)
    }

    pub fn simulator(&self) -> Result<CaptureSimulator, PersonalityError> {
        CaptureSimulator::new(*self)
    }
}

/// Seeded stream of simulated captures.
///
/// For each trait a Bernoulli draw with the trait's accuracy decides whether
/// the score lands on the truth's side of 0.5; the magnitude is then uniform
/// within that half (`[0.5, 1.0]` for High, `[0.0, 0.5)` for Low).
#[derive(Debug, Clone)]
pub struct CaptureSimulator {
    model: NoiseModel,
    rng: ChaCha8Rng,
}

impl CaptureSimulator {
    pub fn new(model: NoiseModel) -> Result<Self, PersonalityError> {
        // Re-validate: the fields are public and may have been deserialized.
        TraitAccuracies::new(model.accuracies.values)?;
        Ok(Self {
            model,
            rng: ChaCha8Rng::seed_from_u64(model.seed),
        })
    }

    pub fn model(&self) -> &NoiseModel {
        &self.model
    }

    pub fn simulate_capture(&mut self, truth: &TraitLabels, capture_index: u8) -> CaptureEstimate {
        let mut scores = [0.0; 5];
        for t in Trait::ALL {
            let correct = self.rng.random_bool(self.model.accuracies.get(t));
            let side = if correct {
                truth.get(t)
            } else {
                truth.get(t).flipped()
            };
            scores[t as usize] = match side {
                Level::High => self.rng.random_range(0.5..=1.0),
                Level::Low => self.rng.random_range(0.0..0.5),
            };
        }
        let scores = TraitScoreVector::new(scores).expect("sampled scores lie in [0, 1]");
        CaptureEstimate::new(capture_index, scores, CaptureSource::Simulated)
    }

    /// The three captures that feed one profile.
    pub fn simulate_triple(&mut self, truth: &TraitLabels) -> [CaptureEstimate; 3] {
        [
            self.simulate_capture(truth, 1),
            self.simulate_capture(truth, 2),
            self.simulate_capture(truth, 3),
        ]
    }
}
