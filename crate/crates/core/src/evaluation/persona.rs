//! Scripted simulated users.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::metrics::{SCALE_MAX, SCALE_MIN};
use super::EvaluationError;
use crate::dialogue::{DialogueState, Phase, PromptKey};
use crate::personality::{Level, Trait, TraitLabels};
use crate::spots::{SpotCatalog, SpotId, Tag};

/// How a persona answers each policy question. One field per question
/// topic, so every prompt has an answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerPolicy {
    /// Indoor or Outdoor.
    pub setting: Tag,
    /// Favourite sport, or `None` for someone who does not like sports.
    pub sport: Option<String>,
    /// Sweet or Spicy.
    pub taste: Tag,
    pub sweets_name: String,
    /// History or Art.
    pub topic: Tag,
    /// Movie or Music.
    pub media: Tag,
    /// Train, Bus, Car or Walking.
    pub transport: Tag,
}

const SPORTS: &[&str] = &["tennis", "baseball", "soccer", "golf", "swimming"];
const SWEETS: &[&str] = &["cheesecake", "mochi", "macarons", "dorayaki", "pudding"];

impl AnswerPolicy {
    pub fn validate(&self) -> Result<(), String> {
        let check = |name: &str, tag: Tag, allowed: &[Tag]| {
            if allowed.contains(&tag) {
                Ok(())
            } else {
                Err(format!("{name} cannot be {tag}"))
            }
        };
        check("setting", self.setting, &[Tag::Indoor, Tag::Outdoor])?;
        check("taste", self.taste, &[Tag::Sweet, Tag::Spicy])?;
        check("topic", self.topic, &[Tag::History, Tag::Art])?;
        check("media", self.media, &[Tag::Movie, Tag::Music])?;
        check(
            "transport",
            self.transport,
            &[Tag::Train, Tag::Bus, Tag::Car, Tag::Walking],
        )
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let pick = |rng: &mut R, options: &[Tag]| *options.choose(rng).expect("non-empty");
        Self {
            setting: pick(rng, &[Tag::Indoor, Tag::Outdoor]),
            sport: rng
                .random_bool(0.5)
                .then(|| SPORTS.choose(rng).expect("non-empty").to_string()),
            taste: pick(rng, &[Tag::Sweet, Tag::Spicy]),
            sweets_name: SWEETS.choose(rng).expect("non-empty").to_string(),
            topic: pick(rng, &[Tag::History, Tag::Art]),
            media: pick(rng, &[Tag::Movie, Tag::Music]),
            transport: pick(rng, &[Tag::Train, Tag::Bus, Tag::Car, Tag::Walking]),
        }
    }

    /// Everything this persona would be happy to find at a spot.
    pub fn preferred_tags(&self) -> BTreeSet<Tag> {
        let mut tags: BTreeSet<Tag> =
            [self.setting, self.taste, self.topic, self.media, self.transport].into();
        if self.sport.is_some() {
            tags.insert(Tag::Sports);
        }
        tags
    }

    pub fn reply(&self, prompt: PromptKey) -> String {
        match prompt {
            PromptKey::IndoorOrOutdoor => match self.setting {
                Tag::Indoor => "I'd say indoors, I like to stay comfortable.".into(),
                _ => "Outdoors, definitely.".into(),
            },
            PromptKey::LikesSports => match &self.sport {
                Some(_) => "Yes, I love sports.".into(),
                None => "Not really.".into(),
            },
            PromptKey::ConfirmSportName => match &self.sport {
                Some(name) => format!("Mostly {name}."),
                None => "I'm not sure.".into(),
            },
            PromptKey::SweetOrSpicy => format!("I prefer {} food.", self.taste),
            PromptKey::ConfirmSweetsName => format!("I really like {}.", self.sweets_name),
            PromptKey::MeansOfTransportation => match self.transport {
                Tag::Train => "Usually by train.".into(),
                Tag::Bus => "I take the bus.".into(),
                Tag::Car => "I drive my car.".into(),
                _ => "I like to walk.".into(),
            },
            PromptKey::HistoryOrArt => format!("I'm more into {}.", self.topic),
            PromptKey::MovieOrMusic => match self.media {
                Tag::Movie => "Movies, I think.".into(),
                _ => "Music, for sure.".into(),
            },
        }
    }
}

/// Reply delay in ms: `base_ms` plus a uniform draw in `0..=jitter_ms`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatencyProfile {
    pub base_ms: u64,
    pub jitter_ms: u64,
}

impl LatencyProfile {
    pub fn fixed(ms: u64) -> Self {
        Self {
            base_ms: ms,
            jitter_ms: 0,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        if self.jitter_ms == 0 {
            self.base_ms
        } else {
            self.base_ms + rng.random_range(0..=self.jitter_ms)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Persona {
    pub id: String,
    /// Ground-truth trait labels the simulated estimator observes.
    pub truth: TraitLabels,
    pub answers: AnswerPolicy,
    pub preselected: (SpotId, SpotId),
    /// Visit intent (1..=7) before the conversation, per spot.
    pub pre_intent: BTreeMap<SpotId, u8>,
    pub latency: LatencyProfile,
}

impl Persona {
    pub fn validate(&self, catalog: &SpotCatalog) -> Result<(), EvaluationError> {
        let fail = |message: String| EvaluationError::Persona {
            id: self.id.clone(),
            message,
        };
        self.answers.validate().map_err(fail)?;
        for id in [&self.preselected.0, &self.preselected.1] {
            if !catalog.contains(id) {
                return Err(fail(format!("unknown spot {id}")));
            }
            match self.pre_intent.get(id) {
                Some(v) if (SCALE_MIN..=SCALE_MAX).contains(v) => {}
                Some(v) => return Err(fail(format!("intent {v} for {id} is off the scale"))),
                None => return Err(fail(format!("no intent for {id}"))),
            }
        }
        if let Some((id, v)) = self
            .pre_intent
            .iter()
            .find(|(_, v)| !(SCALE_MIN..=SCALE_MAX).contains(*v))
        {
            return Err(fail(format!("intent {v} for {id} is off the scale")));
        }
        Ok(())
    }

    /// A persona with uniformly random traits, answers and spot pair.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, catalog: &SpotCatalog, id: impl Into<String>) -> Self {
        let mut labels = [Level::Low; 5];
        for l in labels.iter_mut() {
            if rng.random_bool(0.5) {
                *l = Level::High;
            }
        }
        let ids: Vec<&SpotId> = catalog.spots().iter().map(|s| &s.id).collect();
        let chosen: Vec<&&SpotId> = ids.choose_multiple(rng, 2).collect();
        let preselected = ((*chosen[0]).clone(), (*chosen[1]).clone());
        let pre_intent = [&preselected.0, &preselected.1]
            .into_iter()
            .map(|id| (id.clone(), rng.random_range(1..=5)))
            .collect();
        Self {
            id: id.into(),
            truth: TraitLabels::new(labels),
            answers: AnswerPolicy::random(rng),
            preselected,
            pre_intent,
            latency: LatencyProfile {
                base_ms: rng.random_range(500..=3_000),
                jitter_ms: rng.random_range(0..=1_500),
            },
        }
    }

    pub fn extraversion(&self) -> Level {
        self.truth.get(Trait::Extraversion)
    }

    /// What this persona says next, given where the dialogue is.
    pub fn reply_to(&self, state: &DialogueState) -> String {
        match state.phase {
            Phase::Greeting | Phase::AwaitProfile => "I'm doing well, thank you.".into(),
            Phase::Assessment => "Ha ha, maybe you are right.".into(),
            Phase::Question { step, .. } => state
                .questions
                .last()
                .and_then(|q| q.prompt_at(step))
                .map(|p| self.answers.reply(p))
                .unwrap_or_else(|| "Hmm.".into()),
            Phase::Recommend { .. } => "That sounds nice.".into(),
            Phase::PostChat => "No, that's everything. Thank you!".into(),
            Phase::Closing => String::new(),
        }
    }
}
