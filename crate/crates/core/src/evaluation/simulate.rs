//! Discrete-event session simulation and batch runs.
//!
//! Each simulated session plays a persona against the dialogue engine on a
//! virtual clock. The estimate is computed up front from three seeded
//! captures but only delivered once the virtual clock reaches the configured
//! estimator delay, so the deadline logic runs exactly as it would live.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::metrics::{recommendation_effect, ImpressionItem, ImpressionResponse, MetricsAccumulator, MetricsReport, SCALE_MAX};
use super::persona::Persona;
use super::EvaluationError;
use crate::dialogue::{DialogueEngine, DialogueError, DialogueState, Phase, QuestionSpec, Transcript, MAX_SYSTEM_TURNS};
use crate::personality::{aggregate, Level, NoiseModel, PersonalityError, PersonalityProfile, DEFAULT_THRESHOLD};
use crate::spots::{match_score, SpotCatalog, SpotId, Tag};

/// Hard stop for a runaway session; well above the turn bound.
const MAX_EVENTS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SessionError {
    #[error(transparent)]
    Dialogue(#[from] DialogueError),
    #[error(transparent)]
    Personality(#[from] PersonalityError),
    #[error(transparent)]
    Evaluation(#[from] EvaluationError),
    #[error("session did not close within {0} events")]
    Runaway(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    /// Virtual time at which the three-capture estimate becomes available.
    pub estimator_delay_ms: u64,
    pub threshold: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            estimator_delay_ms: 1_500,
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub persona_index: usize,
    pub persona_id: String,
    pub session_id: String,
    pub seed: u64,
    pub transcript: Transcript,
    /// The estimate the captures produced, whether or not it arrived in time.
    pub estimate: PersonalityProfile,
    /// The profile the dialogue branched on.
    pub profile: PersonalityProfile,
    pub truth_extraversion: Level,
    pub questions: Vec<QuestionSpec>,
    pub recommended: SpotId,
    pub system_turns: u32,
    pub pre_intent: u8,
    pub post_intent: u8,
    pub effect: i8,
    pub impressions: ImpressionResponse,
}

impl SessionRecord {
    pub fn branch(&self) -> Level {
        self.profile.extraversion()
    }

    pub fn branch_matches_truth(&self) -> bool {
        self.branch() == self.truth_extraversion
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutcome {
    pub report: MetricsReport,
    pub sessions: Vec<SessionRecord>,
}

impl BatchOutcome {
    /// All transcripts, concatenated in session order.
    pub fn transcript_log(&self) -> String {
        self.sessions
            .iter()
            .map(|s| format!("# session {}\n{}", s.session_id, s.transcript.render()))
            .collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("persona {index}: {source}")]
pub struct BatchError {
    pub index: usize,
    #[source]
    pub source: SessionError,
}

/// Runs personas through the engine on virtual time.
#[derive(Debug, Clone)]
pub struct BatchRunner {
    engine: DialogueEngine,
    config: SimulationConfig,
}

impl BatchRunner {
    pub fn new(engine: DialogueEngine, config: SimulationConfig) -> Self {
        Self { engine, config }
    }

    pub fn engine(&self) -> &DialogueEngine {
        &self.engine
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    /// Runs one session per persona. Sessions run in parallel; each draws from
    /// its own stream derived from `seed` and its index, so the outcome does
    /// not depend on scheduling.
    pub fn run(
        &self,
        personas: &[Persona],
        noise: &NoiseModel,
        seed: u64,
    ) -> Result<BatchOutcome, BatchError> {
        if personas.is_empty() {
            return Err(BatchError {
                index: 0,
                source: EvaluationError::NoData.into(),
            });
        }
        let results: Vec<Result<SessionRecord, SessionError>> = personas
            .par_iter()
            .enumerate()
            .map(|(i, persona)| self.run_session(i, persona, noise, session_seed(seed, i)))
            .collect();
        let mut sessions = Vec::with_capacity(results.len());
        for (index, result) in results.into_iter().enumerate() {
            sessions.push(result.map_err(|source| BatchError { index, source })?);
        }
        let report = summarize(&sessions).map_err(|e| BatchError {
            index: 0,
            source: e.into(),
        })?;
        Ok(BatchOutcome { report, sessions })
    }

    pub fn run_session(
        &self,
        persona_index: usize,
        persona: &Persona,
        noise: &NoiseModel,
        seed: u64,
    ) -> Result<SessionRecord, SessionError> {
        let catalog = self.engine.catalog();
        persona.validate(catalog)?;

        let mut captures = noise.reseeded(seed).simulator()?;
        let estimate = aggregate(&captures.simulate_triple(&persona.truth), self.config.threshold)?;
        let deadline = self.engine.config().estimation_deadline_ms;
        let ready_at = self.config.estimator_delay_ms;
        let mut latency_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_1a7e_0c10_c4e5);

        let session_id = format!("sim-{seed:016x}");
        let mut transcript = Transcript::new();
        let (mut state, greeting) = self
            .engine
            .start_session(session_id.clone(), persona.preselected.clone())?;
        transcript.record_system(&greeting);

        let mut clock = 0u64;
        let mut events = 0usize;
        let deliver = |state: &mut DialogueState, clock: u64| {
            if clock >= ready_at {
                state.deliver_estimate(estimate);
            }
        };

        while !state.is_closed() {
            events += 1;
            if events > MAX_EVENTS {
                return Err(SessionError::Runaway(MAX_EVENTS));
            }
            let reply = persona.reply_to(&state);
            clock += persona.latency.sample(&mut latency_rng);
            deliver(&mut state, clock);
            transcript.record_user(state.phase, &reply);
            let (next, actions) = self.engine.advance(&state, &reply, clock)?;
            state = next;
            actions.iter().for_each(|a| transcript.record_system(a));

            while state.phase == Phase::AwaitProfile {
                // Next event: the estimate arriving or the deadline passing.
                clock = clock.max(ready_at.min(deadline));
                deliver(&mut state, clock);
                let (next, actions) = self.engine.tick(&state, clock)?;
                state = next;
                actions.iter().for_each(|a| transcript.record_system(a));
            }
        }

        if state.turn_count > MAX_SYSTEM_TURNS {
            return Err(SessionError::Runaway(state.turn_count as usize));
        }
        let profile = state
            .profile
            .ok_or_else(|| DialogueError::Precondition("closed without a profile".into()))?;
        let recommended = state
            .recommended
            .clone()
            .ok_or_else(|| DialogueError::Precondition("closed without a recommendation".into()))?;
        let preferred = persona.answers.preferred_tags();
        let pre_intent = persona.pre_intent[&recommended];
        let post_intent = simulated_post_intent(pre_intent, catalog, &recommended, &preferred);
        let effect = recommendation_effect(pre_intent, post_intent)?;
        let impressions = simulated_impressions(SessionSignals {
            branch_matches: profile.extraversion() == persona.extraversion(),
            spot_matches: favourite_spot(catalog, &persona.preselected, &preferred) == recommended,
            estimated: !profile.defaulted,
        });

        Ok(SessionRecord {
            persona_index,
            persona_id: persona.id.clone(),
            session_id,
            seed,
            transcript,
            estimate,
            profile,
            truth_extraversion: persona.extraversion(),
            questions: state.questions,
            recommended,
            system_turns: state.turn_count,
            pre_intent,
            post_intent,
            effect,
            impressions,
        })
    }
}

/// Convenience wrapper: default engine configuration over `catalog`.
pub fn run_batch(
    personas: &[Persona],
    catalog: &SpotCatalog,
    noise: &NoiseModel,
    seed: u64,
) -> Result<BatchOutcome, BatchError> {
    let engine = DialogueEngine::new(
        std::sync::Arc::new(catalog.clone()),
        std::sync::Arc::new(crate::dialogue::TemplateStore::builtin()),
        Default::default(),
    )
    .map_err(|e| BatchError {
        index: 0,
        source: e.into(),
    })?;
    BatchRunner::new(engine, SimulationConfig::default()).run(personas, noise, seed)
}

pub fn summarize(sessions: &[SessionRecord]) -> Result<MetricsReport, EvaluationError> {
    sessions
        .iter()
        .map(|s| {
            let mut acc = MetricsAccumulator::default();
            acc.add_impression(&s.impressions);
            acc.add_effect(s.effect);
            acc.add_session();
            acc
        })
        .fold(MetricsAccumulator::default(), MetricsAccumulator::merge)
        .report()
}

/// Stream seed for session `index` of a batch seeded with `seed`.
pub fn session_seed(seed: u64, index: usize) -> u64 {
    splitmix64(seed ^ splitmix64(index as u64))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Which of the pair the persona would pick with full knowledge: more of
/// its preferred tags, ties to the first.
pub fn favourite_spot(
    catalog: &SpotCatalog,
    preselected: &(SpotId, SpotId),
    preferred: &BTreeSet<Tag>,
) -> SpotId {
    let score = |id: &SpotId| catalog.get(id).map_or(0, |s| match_score(s, preferred));
    if score(&preselected.1) > score(&preselected.0) {
        preselected.1.clone()
    } else {
        preselected.0.clone()
    }
}

/// Post-conversation intent: pre-intent raised by one per preferred tag the
/// recommended spot offers, capped at the top of the scale. A pipeline
/// exercise, not a model of real users.
pub fn simulated_post_intent(
    pre: u8,
    catalog: &SpotCatalog,
    recommended: &SpotId,
    preferred: &BTreeSet<Tag>,
) -> u8 {
    let overlap = catalog
        .get(recommended)
        .map_or(0, |s| match_score(s, preferred));
    (pre as usize + overlap).min(SCALE_MAX as usize) as u8
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionSignals {
    pub branch_matches: bool,
    pub spot_matches: bool,
    pub estimated: bool,
}

/// Questionnaire heuristic: every item starts at 4 and gains one point per
/// satisfied property relevant to it, capped at 7.
///
/// * `estimated` (a real profile, not the fallback) lifts every item;
/// * `branch_matches` lifts the dialogue-quality items;
/// * `spot_matches` lifts the information and choice items;
/// * intention to reuse needs both of the latter.
pub fn simulated_impressions(signals: SessionSignals) -> ImpressionResponse {
    use ImpressionItem::*;
    let b = u8::from;
    let items = ImpressionItem::ALL.map(|item| {
        let bonus = b(signals.estimated)
            + match item {
                NaturalnessOfDialogue
                | AppropriatenessOfDialogue
                | LikabilityOfDialogue
                | SatisfactionWithResponse
                | TrustInTheOtherParty => b(signals.branch_matches),
                SatisfactionWithChoice | SufficiencyOfInformation | HelpfulnessOfInformation => {
                    b(signals.spot_matches)
                }
                IntentionToReuse => b(signals.branch_matches && signals.spot_matches),
            };
        (4 + bonus).min(SCALE_MAX)
    });
    ImpressionResponse::new(items).expect("heuristic stays on the scale")
}
