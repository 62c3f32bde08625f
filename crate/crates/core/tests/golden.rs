//! Pinned transcripts for scripted personas. Set `UPDATE_GOLDEN=1` to
//! rewrite the fixtures after an intended wording or flow change.

use std::collections::BTreeMap;
use std::path::PathBuf;

use persona_dialog::dialogue::{DialogueEngine, Transcript};
use persona_dialog::evaluation::{
    run_batch, AnswerPolicy, BatchRunner, LatencyProfile, Persona, SimulationConfig,
};
use persona_dialog::personality::{Level, NoiseModel, TraitLabels};
use persona_dialog::spots::{SpotCatalog, SpotId, Tag};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn check(name: &str, actual: &str) {
    let path = fixture(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap();
    assert_eq!(actual, expected, "transcript differs from {}", path.display());
}

fn persona(extraversion: Level, pair: (&str, &str)) -> Persona {
    let preselected = (SpotId::new(pair.0), SpotId::new(pair.1));
    Persona {
        id: "scripted".into(),
        truth: TraitLabels::all(Level::High).with(persona_dialog::Trait::Extraversion, extraversion),
        answers: AnswerPolicy {
            setting: Tag::Indoor,
            sport: Some("tennis".into()),
            taste: Tag::Sweet,
            sweets_name: "mochi".into(),
            topic: Tag::History,
            media: Tag::Movie,
            transport: Tag::Train,
        },
        pre_intent: BTreeMap::from([(preselected.0.clone(), 3), (preselected.1.clone(), 4)]),
        preselected,
        latency: LatencyProfile::fixed(1_000),
    }
}

#[test]
fn high_extraversion_group_a() {
    let outcome = run_batch(
        &[persona(Level::High, ("s1", "s4"))],
        &SpotCatalog::builtin(),
        &NoiseModel::perfect(0),
        0,
    )
    .unwrap();
    let record = &outcome.sessions[0];
    check("high_group_a.txt", &record.transcript.render());
    assert_eq!(record.recommended, SpotId::new("s1"));
    assert_eq!((record.pre_intent, record.post_intent, record.effect), (3, 7, 4));
}

#[test]
fn low_extraversion_group_b() {
    let outcome = run_batch(
        &[persona(Level::Low, ("s5", "s4"))],
        &SpotCatalog::builtin(),
        &NoiseModel::perfect(0),
        0,
    )
    .unwrap();
    check("low_group_b.txt", &outcome.sessions[0].transcript.render());
}

#[test]
fn late_estimate_falls_back_to_generic_low() {
    let runner = BatchRunner::new(
        DialogueEngine::builtin(),
        SimulationConfig {
            estimator_delay_ms: 9_000,
            ..Default::default()
        },
    );
    let record = runner
        .run_session(0, &persona(Level::High, ("s1", "s4")), &NoiseModel::perfect(0), 0)
        .unwrap();
    assert!(record.profile.defaulted);
    assert_eq!(record.branch(), Level::Low);
    check("deadline_fallback.txt", &record.transcript.render());
}

#[test]
fn fixtures_parse_back() {
    for name in ["high_group_a.txt", "low_group_b.txt", "deadline_fallback.txt"] {
        let text = std::fs::read_to_string(fixture(name)).unwrap();
        assert_eq!(Transcript::parse(&text).unwrap().render(), text);
    }
}
