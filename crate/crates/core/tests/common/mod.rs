//! Independent oracles shared by the integration and acceptance tests. They
//! read transcripts and tables directly instead of calling engine helpers.
#![allow(dead_code)]

use std::collections::BTreeSet;

use persona_dialog::dialogue::{Phase, Speaker, TemplateStore, TranscriptEntry};
use persona_dialog::evaluation::{Persona, SessionRecord};
use persona_dialog::personality::Level;
use persona_dialog::spots::{CategoryGroup, SpotCatalog, Tag};

/// The question policy written out by hand: (group, extraversion) → per slot,
/// the main prompt followed by its follow-ups.
pub fn policy_oracle(group: CategoryGroup, extraversion: Level) -> [&'static [&'static str]; 3] {
    match (group, extraversion) {
        (CategoryGroup::GroupA, Level::High) => [
            &["indoor_or_outdoor"],
            &["likes_sports", "confirm_sport_name"],
            &["history_or_art", "movie_or_music"],
        ],
        (CategoryGroup::GroupA, Level::Low) => [
            &["indoor_or_outdoor"],
            &["sweet_or_spicy", "confirm_sweets_name"],
            &["history_or_art", "movie_or_music"],
        ],
        (CategoryGroup::GroupB, Level::High) => [
            &["indoor_or_outdoor"],
            &["likes_sports", "confirm_sport_name"],
            &["sweet_or_spicy", "history_or_art"],
        ],
        (CategoryGroup::GroupB, Level::Low) => [
            &["indoor_or_outdoor"],
            &["means_of_transportation"],
            &["sweet_or_spicy", "confirm_sweets_name", "history_or_art"],
        ],
    }
}

pub fn system_lines(record: &SessionRecord) -> Vec<&TranscriptEntry> {
    record
        .transcript
        .entries()
        .iter()
        .filter(|e| e.speaker == Speaker::System)
        .collect()
}

/// Checks one finished session against the flow invariants. Returns a
/// description of the first violation.
pub fn check_flow(record: &SessionRecord, persona: &Persona, catalog: &SpotCatalog) -> Result<(), String> {
    let system = system_lines(record);
    if system.len() > 12 {
        return Err(format!("{} system turns", system.len()));
    }
    if system.last().map(|e| e.phase) != Some(Phase::Closing) {
        return Err("did not close".into());
    }

    let main_slots: Vec<u8> = system
        .iter()
        .filter_map(|e| match e.phase {
            Phase::Question { slot, step: 0 } => Some(slot.number()),
            _ => None,
        })
        .collect();
    if main_slots != [1, 2, 3] {
        return Err(format!("question slots {main_slots:?}"));
    }

    let volume: Vec<Phase> = system
        .iter()
        .filter(|e| e.directives.contains("prosody:volume_up"))
        .map(|e| e.phase)
        .collect();
    let expected_points = [
        Phase::Recommend { point: 1 },
        Phase::Recommend { point: 2 },
        Phase::Recommend { point: 3 },
    ];
    if volume != expected_points {
        return Err(format!("volume-tagged lines in {volume:?}"));
    }
    if system
        .iter()
        .any(|e| e.directives.matches("volume_up").count() > 1)
    {
        return Err("duplicate volume directive".into());
    }
    if !system.iter().all(|e| e.directives.contains("expression:smile")) {
        return Err("line without a smile".into());
    }

    // Branch: the prompts asked must be the policy row for the profile the
    // session reports, keyed by the first spot's group.
    let group = catalog
        .get(&persona.preselected.0)
        .ok_or("unknown first spot")?
        .category_group;
    let row = policy_oracle(group, record.profile.extraversion());
    let asked: Vec<&str> = record.questions.iter().map(|q| q.prompt.as_str()).collect();
    let expected: Vec<&str> = row.iter().map(|cell| cell[0]).collect();
    if asked != expected {
        return Err(format!("asked {asked:?}, policy says {expected:?}"));
    }

    // Every question line, follow-ups included, must be the wording of the
    // policy cell at its (slot, step).
    let templates = TemplateStore::builtin();
    for e in &system {
        if let Phase::Question { slot, step } = e.phase {
            let cell = row[slot.number() as usize - 1];
            let key = cell
                .get(step as usize)
                .ok_or_else(|| format!("step {step} beyond the policy cell {cell:?}"))?;
            let wording = templates
                .get(&format!("question.{key}"))
                .ok_or_else(|| format!("no template for {key}"))?;
            if e.text != wording {
                return Err(format!("{}: {:?} is not {:?}", e.phase, e.text, wording));
            }
        }
    }

    let (a, b) = (&persona.preselected.0, &persona.preselected.1);
    if record.recommended != *a && record.recommended != *b {
        return Err("recommended spot outside the pair".into());
    }
    Ok(())
}

/// Tag overlap by plain set intersection.
pub fn overlap(a: &BTreeSet<Tag>, b: &BTreeSet<Tag>) -> usize {
    a.intersection(b).count()
}
