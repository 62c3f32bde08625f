mod common;

use std::collections::BTreeSet;

use persona_dialog::dialogue::{DialogueEngine, Phase, Speaker};
use persona_dialog::evaluation::{
    BatchRunner, EvaluationError, Persona, SessionError, SessionRecord, SimulationConfig,
};
use persona_dialog::personality::NoiseModel;
use persona_dialog::spots::{SpotCatalog, SpotId};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_611;

fn personas(catalog: &SpotCatalog, n: usize) -> Vec<Persona> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    (0..n).map(|i| Persona::random(&mut rng, catalog, format!("p{i:02}"))).collect()
}

fn runner() -> BatchRunner {
    BatchRunner::new(DialogueEngine::builtin(), SimulationConfig::default())
}

/// Which of the pair the first recommendation line names.
fn recommended_from_text(record: &SessionRecord, catalog: &SpotCatalog, pair: &(SpotId, SpotId)) -> SpotId {
    let line = record
        .transcript
        .entries()
        .iter()
        .find(|e| e.speaker == Speaker::System && e.phase == Phase::Recommend { point: 1 })
        .expect("a first recommendation line");
    let named: Vec<&SpotId> = [&pair.0, &pair.1]
        .into_iter()
        .filter(|id| line.text.contains(&format!("recommend {}!", catalog.get(id).unwrap().name)))
        .collect();
    assert_eq!(named.len(), 1, "{:?}", line.text);
    named[0].clone()
}

#[test]
fn batch_of_26_recomputes_from_records() {
    let runner = runner();
    let catalog = runner.engine().catalog().clone();
    let personas = personas(&catalog, 26);
    let outcome = runner.run(&personas, &NoiseModel::reference(SEED), SEED).unwrap();
    assert_eq!(outcome.sessions.len(), 26);
    assert_eq!(outcome.report.sessions, 26);

    let mut effect_sum = 0i32;
    let mut item_sums = [0u32; 9];
    for (record, persona) in outcome.sessions.iter().zip(&personas) {
        common::check_flow(record, persona, &catalog).unwrap();
        assert_eq!(recommended_from_text(record, &catalog, &persona.preselected), record.recommended);

        let pre = persona.pre_intent[&record.recommended];
        let a = &persona.answers;
        let mut preferred: BTreeSet<_> = [a.setting, a.taste, a.topic, a.media, a.transport].into();
        if a.sport.is_some() {
            preferred.insert(persona_dialog::spots::Tag::Sports);
        }
        let gain = common::overlap(&preferred, &catalog.get(&record.recommended).unwrap().attributes);
        let post = (usize::from(pre) + gain).min(7) as u8;
        assert_eq!((record.pre_intent, record.post_intent), (pre, post));
        assert_eq!(i32::from(record.effect), i32::from(post) - i32::from(pre));

        effect_sum += i32::from(record.effect);
        for (s, v) in item_sums.iter_mut().zip(record.impressions.items()) {
            *s += u32::from(v);
        }
    }

    let mean_effect = f64::from(effect_sum) / 26.0;
    assert!((outcome.report.mean_effect.unwrap() - mean_effect).abs() < 1e-9);
    // Item means are reported to two decimals; the total sums those.
    let round2 = |x: f64| (x * 100.0).round() / 100.0;
    let means = item_sums.map(|s| round2(f64::from(s) / 26.0));
    assert_eq!(outcome.report.item_means, means);
    let total = round2(means.iter().sum());
    assert!((outcome.report.impression_total - total).abs() < 1e-9);
}

#[test]
fn batches_replay_identically() {
    let runner = runner();
    let personas = personas(runner.engine().catalog(), 26);
    let noise = NoiseModel::reference(SEED);
    let a = runner.run(&personas, &noise, SEED).unwrap();
    let b = runner.run(&personas, &noise, SEED).unwrap();
    assert_eq!(a.transcript_log(), b.transcript_log());
    assert_eq!(a.report, b.report);

    let other = runner.run(&personas, &noise, SEED + 1).unwrap();
    assert_ne!(a.transcript_log(), other.transcript_log());
}

#[test]
fn session_order_does_not_depend_on_threads() {
    let runner = runner();
    let personas = personas(runner.engine().catalog(), 26);
    let noise = NoiseModel::reference(SEED);
    let batch = runner.run(&personas, &noise, SEED).unwrap();
    for (i, record) in batch.sessions.iter().enumerate() {
        let alone = runner.run_session(i, &personas[i], &noise, record.seed).unwrap();
        assert_eq!(alone.transcript.render(), record.transcript.render());
    }
}

#[test]
fn empty_batch_has_no_data() {
    let err = runner().run(&[], &NoiseModel::reference(0), 0).unwrap_err();
    assert_eq!(err.source, SessionError::Evaluation(EvaluationError::NoData));
}

#[test]
fn invalid_persona_is_reported_by_index() {
    let runner = runner();
    let mut personas = personas(runner.engine().catalog(), 3);
    personas[2].preselected.1 = SpotId::new("nowhere");
    let err = runner.run(&personas, &NoiseModel::reference(0), 0).unwrap_err();
    assert_eq!(err.index, 2);
}
