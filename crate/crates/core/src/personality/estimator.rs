use std::sync::mpsc::{self, Receiver, RecvTimeoutError, TryRecvError};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use parking_lot::Mutex;

use super::{
    aggregate, CaptureEstimate, CaptureSimulator, CaptureSource, NoiseModel, PersonalityError,
    PersonalityProfile, TraitLabels, TraitScoreVector, CAPTURES_PER_PROFILE,
};

/// Anything that turns one captured frame into a trait score vector.
pub trait TraitEstimator: Send + Sync {
    fn estimate(&self, capture_index: u8, payload: &[u8])
        -> Result<CaptureEstimate, PersonalityError>;
}

impl std::fmt::Debug for dyn TraitEstimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("TraitEstimator")
    }
}

/// Draws captures from a seeded noise model around known true labels.
/// The payload is ignored.
pub struct SimulatedEstimator {
    truth: TraitLabels,
    stream: Mutex<CaptureSimulator>,
    latency: Duration,
}

impl SimulatedEstimator {
    pub fn new(truth: TraitLabels, noise: NoiseModel) -> Result<Self, PersonalityError> {
        Ok(Self {
            truth,
            stream: Mutex::new(noise.simulator()?),
            latency: Duration::ZERO,
        })
    }

    /// Sleep this long per capture before answering.
    pub fn with_latency(mut self, latency: Duration) -> Self {
        self.latency = latency;
        self
    }
}

impl TraitEstimator for SimulatedEstimator {
    fn estimate(
        &self,
        capture_index: u8,
        _payload: &[u8],
    ) -> Result<CaptureEstimate, PersonalityError> {
        if !self.latency.is_zero() {
            thread::sleep(self.latency);
        }
        Ok(self.stream.lock().simulate_capture(&self.truth, capture_index))
    }
}

/// Returns the same vector for every capture.
pub struct FixedEstimator {
    scores: TraitScoreVector,
}

impl FixedEstimator {
    pub fn new(scores: TraitScoreVector) -> Self {
        Self { scores }
    }
}

impl TraitEstimator for FixedEstimator {
    fn estimate(
        &self,
        capture_index: u8,
        payload: &[u8],
    ) -> Result<CaptureEstimate, PersonalityError> {
        if payload.is_empty() {
            return Err(PersonalityError::EmptyPayload);
        }
        Ok(CaptureEstimate::new(
            capture_index,
            self.scores,
            CaptureSource::Fixture,
        ))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EstimationStatus {
    Pending,
    Ready(PersonalityProfile),
    Failed(PersonalityError),
}

/// Handle to an estimation running alongside the opening dialogue turns.
///
/// The three captures are estimated concurrently on a background thread and
/// aggregated there; the owner polls or waits. The handle is `Send`, so it can
/// move between the tasks that drive a session.
pub struct EstimationHandle {
    rx: Option<Receiver<Result<PersonalityProfile, PersonalityError>>>,
    outcome: Option<EstimationStatus>,
}

impl EstimationHandle {
    pub fn spawn(
        estimator: Arc<dyn TraitEstimator>,
        payloads: Vec<Vec<u8>>,
        threshold: f64,
    ) -> Self {
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            let result = run_captures(estimator.as_ref(), &payloads, threshold);
            // The receiver may be gone if the session ended first.
            let _ = tx.send(result);
        });
        Self {
            rx: Some(rx),
            outcome: None,
        }
    }

    /// A handle that is already resolved.
    pub fn resolved(profile: PersonalityProfile) -> Self {
        Self {
            rx: None,
            outcome: Some(EstimationStatus::Ready(profile)),
        }
    }

    pub fn poll(&mut self) -> EstimationStatus {
        if let Some(outcome) = &self.outcome {
            return outcome.clone();
        }
        let Some(rx) = &self.rx else {
            return EstimationStatus::Pending;
        };
        match rx.try_recv() {
            Ok(result) => self.settle(result),
            Err(TryRecvError::Empty) => EstimationStatus::Pending,
            Err(TryRecvError::Disconnected) => {
                self.settle(Err(PersonalityError::Io("estimation worker vanished".into())))
            }
        }
    }

    pub fn wait(&mut self, timeout: Duration) -> EstimationStatus {
        if let Some(outcome) = &self.outcome {
            return outcome.clone();
        }
        let Some(rx) = &self.rx else {
            return EstimationStatus::Pending;
        };
        match rx.recv_timeout(timeout) {
            Ok(result) => self.settle(result),
            Err(RecvTimeoutError::Timeout) => EstimationStatus::Pending,
            Err(RecvTimeoutError::Disconnected) => {
                self.settle(Err(PersonalityError::Io("estimation worker vanished".into())))
            }
        }
    }

    fn settle(&mut self, result: Result<PersonalityProfile, PersonalityError>) -> EstimationStatus {
        let status = match result {
            Ok(p) => EstimationStatus::Ready(p),
            Err(e) => EstimationStatus::Failed(e),
        };
        self.outcome = Some(status.clone());
        self.rx = None;
        status
    }
}

fn run_captures(
    estimator: &dyn TraitEstimator,
    payloads: &[Vec<u8>],
    threshold: f64,
) -> Result<PersonalityProfile, PersonalityError> {
    if payloads.len() != CAPTURES_PER_PROFILE {
        return Err(PersonalityError::Arity {
            expected: CAPTURES_PER_PROFILE,
            found: payloads.len(),
        });
    }
    let captures = thread::scope(|scope| {
        let workers: Vec<_> = payloads
            .iter()
            .enumerate()
            .map(|(i, payload)| scope.spawn(move || estimator.estimate(i as u8 + 1, payload)))
            .collect();
        workers
            .into_iter()
            .map(|w| w.join().expect("estimator thread panicked"))
            .collect::<Result<Vec<_>, _>>()
    })?;
    aggregate(&captures, threshold)
}
