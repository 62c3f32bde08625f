use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::answers::{canonicalize_answer, extract_tags};
use super::policy::select_question;
use super::templates::{assessment_key, recommend_key};
use super::{DialogueError, DialogueState, Phase, Slot, TemplateStore};
use crate::multimodal::{annotate, Cues, MultimodalConfig, SystemAction};
use crate::personality::{PersonalityProfile, Trait};
use crate::spots::{match_score, SpotCatalog, SpotId};

/// Upper bound on system turns per session: greeting, assessment, at most
/// five question prompts, three recommendation points, post-chat, closing.
pub const MAX_SYSTEM_TURNS: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DialogueConfig {
    /// Session time by which the profile must be available at the branch point.
    pub estimation_deadline_ms: u64,
    pub multimodal: MultimodalConfig,
}

impl Default for DialogueConfig {
    fn default() -> Self {
        Self {
            estimation_deadline_ms: 5_000,
            multimodal: MultimodalConfig::default(),
        }
    }
}

/// Drives sessions through the dialogue flow.
///
/// The engine holds no per-session data: `advance` and `tick` map a state and
/// an input to a new state and the actions to emit, so a transcript replays
/// bit-exactly.
#[derive(Debug, Clone)]
pub struct DialogueEngine {
    catalog: Arc<SpotCatalog>,
    templates: Arc<TemplateStore>,
    config: DialogueConfig,
}

impl DialogueEngine {
    pub fn new(
        catalog: Arc<SpotCatalog>,
        templates: Arc<TemplateStore>,
        config: DialogueConfig,
    ) -> Result<Self, DialogueError> {
        templates.validate()?;
        Ok(Self {
            catalog,
            templates,
            config,
        })
    }

    /// Bundled catalog and templates, default configuration.
    pub fn builtin() -> Self {
        Self::with_config(DialogueConfig::default())
    }

    pub fn with_config(config: DialogueConfig) -> Self {
        Self::new(
            Arc::new(SpotCatalog::builtin()),
            Arc::new(TemplateStore::builtin()),
            config,
        )
        .expect("bundled templates are complete")
    }

    pub fn catalog(&self) -> &SpotCatalog {
        &self.catalog
    }

    pub fn catalog_arc(&self) -> Arc<SpotCatalog> {
        Arc::clone(&self.catalog)
    }

    pub fn config(&self) -> &DialogueConfig {
        &self.config
    }

    pub fn start_session(
        &self,
        session_id: impl Into<String>,
        preselected: (SpotId, SpotId),
    ) -> Result<(DialogueState, SystemAction), DialogueError> {
        let (first, second) = &preselected;
        if first == second {
            return Err(DialogueError::IdenticalPair(first.clone()));
        }
        let first_spot = self
            .catalog
            .get(first)
            .ok_or_else(|| DialogueError::UnknownSpot(first.clone()))?;
        let second_spot = self
            .catalog
            .get(second)
            .ok_or_else(|| DialogueError::UnknownSpot(second.clone()))?;

        let text = self.templates.render(
            "greeting",
            &[("first", &first_spot.name), ("second", &second_spot.name)],
        )?;
        let action = self.annotate(&text, Phase::Greeting, Cues::default());
        let state = DialogueState {
            session_id: session_id.into(),
            phase: Phase::Greeting,
            group: first_spot.category_group,
            preselected,
            estimate: None,
            profile: None,
            answers: Vec::new(),
            questions: Vec::new(),
            recommended: None,
            turn_count: 1,
        };
        Ok((state, action))
    }

    /// Consumes one user utterance made at `clock_ms` of session time.
    pub fn advance(
        &self,
        state: &DialogueState,
        input: &str,
        clock_ms: u64,
    ) -> Result<(DialogueState, Vec<SystemAction>), DialogueError> {
        let mut next = state.clone();
        let actions = match state.phase {
            Phase::Closing => return Err(DialogueError::SessionClosed),
            Phase::Greeting | Phase::AwaitProfile => self.enter_branch(&mut next, clock_ms, true)?,
            Phase::Assessment => vec![self.ask(&mut next, Slot::First, 0)?],
            Phase::Question { slot, step } => vec![self.take_answer(&mut next, slot, step, input)?],
            Phase::Recommend { point } if point < 3 => {
                vec![self.recommendation_point(&mut next, point + 1)?]
            }
            Phase::Recommend { .. } => {
                next.phase = Phase::PostChat;
                vec![self.spot_line(&next, "post_chat")?]
            }
            Phase::PostChat => {
                next.phase = Phase::Closing;
                vec![self.spot_line(&next, "closing")?]
            }
        };
        if !actions.is_empty() {
            next.turn_count += 1;
        }
        Ok((next, actions))
    }

    /// Re-checks a session parked at the branch point without user input,
    /// e.g. when the estimate arrives or the deadline passes. A no-op in
    /// every other phase.
    pub fn tick(
        &self,
        state: &DialogueState,
        clock_ms: u64,
    ) -> Result<(DialogueState, Vec<SystemAction>), DialogueError> {
        let mut next = state.clone();
        if state.phase != Phase::AwaitProfile {
            return Ok((next, Vec::new()));
        }
        let actions = self.enter_branch(&mut next, clock_ms, false)?;
        if !actions.is_empty() {
            next.turn_count += 1;
        }
        Ok((next, actions))
    }

    /// The ice-breaker: one positive remark per trait, High or Low variant by label.
    pub fn assessment_utterance(
        &self,
        profile: &PersonalityProfile,
    ) -> Result<SystemAction, DialogueError> {
        self.assessment_action(profile, Cues::default())
    }

    fn assessment_action(
        &self,
        profile: &PersonalityProfile,
        cues: Cues,
    ) -> Result<SystemAction, DialogueError> {
        let mut parts = vec![self.templates.render("assessment.intro", &[])?];
        for t in Trait::ALL {
            parts.push(
                self.templates
                    .render(&assessment_key(t, profile.labels.get(t)), &[])?,
            );
        }
        parts.push(self.templates.render("assessment.outro", &[])?);
        let mut action = self.annotate(&parts.join(" "), Phase::Assessment, cues);
        action.generic = profile.defaulted;
        Ok(action)
    }

    fn enter_branch(
        &self,
        next: &mut DialogueState,
        clock_ms: u64,
        after_user: bool,
    ) -> Result<Vec<SystemAction>, DialogueError> {
        let profile = match next.estimate {
            Some(p) => p,
            None if clock_ms >= self.config.estimation_deadline_ms => {
                PersonalityProfile::defaulted_low()
            }
            None => {
                next.phase = Phase::AwaitProfile;
                return Ok(Vec::new());
            }
        };
        next.profile = Some(profile);
        next.phase = Phase::Assessment;
        let cues = Cues {
            after_user_utterance: after_user,
            ..Cues::default()
        };
        Ok(vec![self.assessment_action(&profile, cues)?])
    }

    fn ask(
        &self,
        next: &mut DialogueState,
        slot: Slot,
        step: u8,
    ) -> Result<SystemAction, DialogueError> {
        if step == 0 {
            let profile = next.profile.ok_or_else(|| {
                DialogueError::Precondition("profile must be installed before questions".into())
            })?;
            next.questions
                .push(select_question(next.group, profile.extraversion(), slot));
        }
        let spec = next
            .questions
            .last()
            .filter(|q| q.slot == slot)
            .ok_or_else(|| DialogueError::Precondition(format!("no question issued for slot {}", slot.number())))?;
        let prompt = spec.prompt_at(step).ok_or_else(|| {
            DialogueError::Precondition(format!("slot {} has no step {step}", slot.number()))
        })?;
        next.phase = Phase::Question { slot, step };
        let text = self.templates.render(&prompt.template_key(), &[])?;
        Ok(self.annotate(&text, next.phase, after_user()))
    }

    fn take_answer(
        &self,
        next: &mut DialogueState,
        slot: Slot,
        step: u8,
        input: &str,
    ) -> Result<SystemAction, DialogueError> {
        let spec = next
            .questions
            .last()
            .cloned()
            .ok_or_else(|| DialogueError::Precondition("answer without a question".into()))?;
        if step == 0 {
            next.answers.push(canonicalize_answer(slot, input, &spec));
        } else {
            let prompt = spec.prompt_at(step).ok_or_else(|| {
                DialogueError::Precondition(format!("slot {} has no step {step}", slot.number()))
            })?;
            let record = next
                .answers
                .last_mut()
                .filter(|a| a.slot == slot)
                .ok_or_else(|| DialogueError::Precondition("follow-up without an answer".into()))?;
            record.followup_texts.push(input.to_string());
            if !prompt.is_confirmation() {
                record
                    .canonical_tags
                    .extend(extract_tags(input, &prompt.expected_tags()));
            }
        }

        let record_tags = &next.answers.last().expect("answer recorded").canonical_tags;
        let next_step = (step + 1..)
            .map_while(|s| spec.prompt_at(s).map(|p| (s, p)))
            .find(|(_, p)| p.required_tag().is_none_or(|t| record_tags.contains(&t)))
            .map(|(s, _)| s);

        match (next_step, slot.next()) {
            (Some(s), _) => self.ask(next, slot, s),
            (None, Some(following)) => self.ask(next, following, 0),
            (None, None) => self.recommendation_point(next, 1),
        }
    }

    fn recommendation_point(
        &self,
        next: &mut DialogueState,
        point: u8,
    ) -> Result<SystemAction, DialogueError> {
        if point == 1 {
            next.recommended = Some(choose_recommendation(next, &self.catalog)?);
        }
        let id = next
            .recommended
            .as_ref()
            .ok_or_else(|| DialogueError::Precondition("no recommended spot".into()))?;
        let spot = self
            .catalog
            .get(id)
            .ok_or_else(|| DialogueError::UnknownSpot(id.clone()))?;
        next.phase = Phase::Recommend { point };
        let text = self.templates.render(
            &recommend_key(point),
            &[
                ("spot", &spot.name),
                ("point", &spot.recommendation_points[point as usize - 1]),
            ],
        )?;
        let cues = Cues {
            after_user_utterance: true,
            explaining_photo: true,
            recommendation_point: true,
        };
        Ok(self.annotate(&text, next.phase, cues))
    }

    fn spot_line(&self, next: &DialogueState, key: &str) -> Result<SystemAction, DialogueError> {
        let id = next
            .recommended
            .as_ref()
            .ok_or_else(|| DialogueError::Precondition("no recommended spot".into()))?;
        let spot = self
            .catalog
            .get(id)
            .ok_or_else(|| DialogueError::UnknownSpot(id.clone()))?;
        let text = self.templates.render(key, &[("spot", &spot.name)])?;
        Ok(self.annotate(&text, next.phase, after_user()))
    }

    fn annotate(&self, text: &str, phase: Phase, cues: Cues) -> SystemAction {
        annotate(&self.config.multimodal, text, phase, cues)
    }
}

fn after_user() -> Cues {
    Cues {
        after_user_utterance: true,
        ..Cues::default()
    }
}

/// Picks the preselected spot whose attributes match more of the user's
/// answer tags. Ties go to the spot the user picked first.
pub fn choose_recommendation(
    state: &DialogueState,
    catalog: &SpotCatalog,
) -> Result<SpotId, DialogueError> {
    if state.answers.len() < 3 {
        return Err(DialogueError::Precondition(format!(
            "recommendation needs 3 answers, have {}",
            state.answers.len()
        )));
    }
    let (first, second) = &state.preselected;
    let score = |id: &SpotId| -> Result<usize, DialogueError> {
        let spot = catalog
            .get(id)
            .ok_or_else(|| DialogueError::UnknownSpot(id.clone()))?;
        Ok(match_score(spot, state.all_answer_tags()))
    };
    if score(second)? > score(first)? {
        Ok(second.clone())
    } else {
        Ok(first.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dialogue::{AnswerRecord, PromptKey};
    use crate::multimodal::DirectiveName;
    use crate::personality::{Level, TraitLabels, TraitScoreVector};
    use crate::spots::Tag;

    fn engine() -> DialogueEngine {
        DialogueEngine::builtin()
    }

    fn pair(a: &str, b: &str) -> (SpotId, SpotId) {
        (SpotId::new(a), SpotId::new(b))
    }

    fn profile(extraversion: Level) -> PersonalityProfile {
        let e = if extraversion == Level::High { 0.9 } else { 0.1 };
        PersonalityProfile {
            mean_scores: TraitScoreVector::new([e, 0.6, 0.6, 0.3, 0.7]).unwrap(),
            labels: TraitLabels::new([extraversion, Level::High, Level::High, Level::Low, Level::High]),
            defaulted: false,
        }
    }

    fn answers(tags: &[&[Tag]]) -> Vec<AnswerRecord> {
        tags.iter()
            .zip(Slot::ALL)
            .map(|(t, slot)| AnswerRecord {
                slot,
                raw_text: String::new(),
                canonical_tags: t.iter().copied().collect(),
                followup_texts: vec![],
            })
            .collect()
    }

    #[test]
    fn start_session_greets_with_smile() {
        let (state, action) = engine().start_session("x", pair("s1", "s4")).unwrap();
        assert_eq!(state.phase, Phase::Greeting);
        assert!(state.profile.is_none() && state.estimate.is_none());
        assert_eq!(action.phase, Phase::Greeting);
        assert!(action.has(DirectiveName::Smile));
        assert!(!action.has(DirectiveName::Nod));
        assert!(action.utterance.contains("Skyline Observation Tower"));
        assert_eq!(state.turn_count, 1);
    }

    #[test]
    fn start_session_rejects_bad_pairs() {
        assert_eq!(
            engine().start_session("x", pair("s1", "s1")).unwrap_err(),
            DialogueError::IdenticalPair(SpotId::new("s1"))
        );
        assert_eq!(
            engine().start_session("x", pair("s1", "s9")).unwrap_err(),
            DialogueError::UnknownSpot(SpotId::new("s9"))
        );
    }

    #[test]
    fn ready_profile_goes_to_assessment_then_question_one() {
        let e = engine();
        let (mut state, _) = e.start_session("x", pair("s1", "s4")).unwrap();
        state.deliver_estimate(profile(Level::High));
        let (state, actions) = e.advance(&state, "I'm good", 1_000).unwrap();
        assert_eq!(state.phase, Phase::Assessment);
        assert_eq!(actions.len(), 1);
        assert!(!actions[0].generic);
        let (state, actions) = e.advance(&state, "yes", 2_000).unwrap();
        assert_eq!(state.phase, Phase::Question { slot: Slot::First, step: 0 });
        assert_eq!(state.questions[0].prompt, PromptKey::IndoorOrOutdoor);
        assert!(actions[0].has(DirectiveName::Nod));
    }

    #[test]
    fn pending_profile_before_deadline_waits() {
        let e = engine();
        let (state, _) = e.start_session("x", pair("s1", "s4")).unwrap();
        let (state, actions) = e.advance(&state, "hi", 1_000).unwrap();
        assert_eq!(state.phase, Phase::AwaitProfile);
        assert!(actions.is_empty());
        assert_eq!(state.turn_count, 1);

        // Still early: nothing happens.
        let (state, actions) = e.tick(&state, 4_999).unwrap();
        assert!(actions.is_empty());
        assert_eq!(state.phase, Phase::AwaitProfile);

        // Deadline passes: defaulted Low profile.
        let (state, actions) = e.tick(&state, 5_000).unwrap();
        assert_eq!(state.phase, Phase::Assessment);
        let installed = state.profile.unwrap();
        assert!(installed.defaulted);
        assert_eq!(installed.extraversion(), Level::Low);
        assert!(actions[0].generic);
        assert!(!actions[0].has(DirectiveName::Nod));
    }

    #[test]
    fn pending_profile_past_deadline_defaults_immediately() {
        let e = engine();
        let (state, _) = e.start_session("x", pair("s1", "s4")).unwrap();
        let (state, actions) = e.advance(&state, "hi", 6_000).unwrap();
        assert_eq!(state.phase, Phase::Assessment);
        assert!(state.profile.unwrap().defaulted);
        assert!(actions[0].has(DirectiveName::Nod));
    }

    #[test]
    fn late_estimate_is_ignored_after_branch() {
        let e = engine();
        let (state, _) = e.start_session("x", pair("s1", "s4")).unwrap();
        let (mut state, _) = e.advance(&state, "hi", 6_000).unwrap();
        state.deliver_estimate(profile(Level::High));
        assert!(state.estimate.is_none());
        assert_eq!(state.profile.unwrap().extraversion(), Level::Low);
    }

    #[test]
    fn closing_rejects_input() {
        let e = engine();
        let (mut state, _) = e.start_session("x", pair("s1", "s4")).unwrap();
        state.phase = Phase::Closing;
        assert_eq!(e.advance(&state, "hello?", 0).unwrap_err(), DialogueError::SessionClosed);
        // tick is harmless
        assert!(e.tick(&state, 0).unwrap().1.is_empty());
    }

    #[test]
    fn third_answer_starts_recommendation_with_volume() {
        let e = engine();
        let (mut state, _) = e.start_session("x", pair("s2", "s1")).unwrap();
        state.deliver_estimate(profile(Level::Low));
        let actions;
        (state, _) = e.advance(&state, "fine", 0).unwrap();
        (state, _) = e.advance(&state, "yes", 0).unwrap();
        (state, _) = e.advance(&state, "indoors", 0).unwrap();
        // GroupA Low slot 2: sweet or spicy, then sweets name
        assert_eq!(state.phase, Phase::Question { slot: Slot::Second, step: 0 });
        (state, _) = e.advance(&state, "sweet please", 0).unwrap();
        assert_eq!(state.phase, Phase::Question { slot: Slot::Second, step: 1 });
        (state, _) = e.advance(&state, "cheesecake", 0).unwrap();
        assert_eq!(state.answers[1].followup_texts, ["cheesecake"]);
        assert_eq!(state.phase, Phase::Question { slot: Slot::Third, step: 0 });
        (state, _) = e.advance(&state, "art", 0).unwrap();
        (state, actions) = e.advance(&state, "music", 0).unwrap();
        assert_eq!(state.phase, Phase::Recommend { point: 1 });
        assert_eq!(state.answers.len(), 3);
        let a = &actions[0];
        assert_eq!(a.count(DirectiveName::VolumeUp), 1);
        assert!(a.has(DirectiveName::HeadTiltRight));
        // s2 carries indoor, art, music, sweet; s1 only indoor, sweet.
        assert_eq!(state.recommended, Some(SpotId::new("s2")));
        assert!(a.utterance.contains("woodblock prints"));
    }

    #[test]
    fn confirmation_skipped_when_answer_is_negative() {
        let e = engine();
        let (mut state, _) = e.start_session("x", pair("s1", "s2")).unwrap();
        state.deliver_estimate(profile(Level::High));
        (state, _) = e.advance(&state, "fine", 0).unwrap();
        (state, _) = e.advance(&state, "yes", 0).unwrap();
        (state, _) = e.advance(&state, "outside", 0).unwrap();
        assert_eq!(state.questions[1].prompt, PromptKey::LikesSports);
        (state, _) = e.advance(&state, "not really", 0).unwrap();
        assert_eq!(state.phase, Phase::Question { slot: Slot::Third, step: 0 });
    }

    #[test]
    fn choose_recommendation_rules() {
        let e = engine();
        let (mut state, _) = e.start_session("x", pair("s1", "s4")).unwrap();
        state.answers = answers(&[&[Tag::Indoor], &[Tag::History], &[Tag::Movie]]);
        // s1: indoor, history, movie = 3; s4: indoor, history = 2
        assert_eq!(choose_recommendation(&state, e.catalog()).unwrap(), SpotId::new("s1"));

        state.preselected = pair("s4", "s1");
        state.answers = answers(&[&[Tag::Indoor], &[Tag::History], &[]]);
        assert_eq!(choose_recommendation(&state, e.catalog()).unwrap(), SpotId::new("s4"));

        state.answers = answers(&[&[], &[], &[]]);
        assert_eq!(choose_recommendation(&state, e.catalog()).unwrap(), SpotId::new("s4"));

        state.answers.pop();
        assert!(matches!(
            choose_recommendation(&state, e.catalog()),
            Err(DialogueError::Precondition(_))
        ));
    }

    #[test]
    fn assessment_uses_label_variants() {
        let e = engine();
        let store = TemplateStore::builtin();
        let all_high = PersonalityProfile {
            labels: TraitLabels::all(Level::High),
            ..profile(Level::High)
        };
        let text = e.assessment_utterance(&all_high).unwrap().utterance;
        let mut cursor = 0;
        for t in Trait::ALL {
            let clause = store.get(&assessment_key(t, Level::High)).unwrap();
            let at = text[cursor..].find(clause).expect("clause in order") + cursor;
            cursor = at + clause.len();
            assert!(!text.contains(store.get(&assessment_key(t, Level::Low)).unwrap()));
        }
    }
}
