//! Acceptance suite. Prints one PASS/FAIL line per criterion, then fails if
//! any criterion failed. Run with `--nocapture` to see the lines:
//!
//! ```text
//! cargo test -p persona-dialog-core --test acceptance -- --nocapture
//! ```

mod common;

use std::time::{Duration, Instant};

use persona_dialog::dialogue::{select_question, DialogueEngine, Slot};
use persona_dialog::evaluation::{BatchRunner, ImpressionScores, Persona, SimulationConfig};
use persona_dialog::personality::{
    aggregate, CaptureEstimate, CaptureSource, Level, NoiseModel, Trait, TraitLabels, TraitScoreVector,
};
use persona_dialog::spots::CategoryGroup;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TEAM_MEANS: [f64; 9] = [5.38, 5.46, 5.35, 5.35, 5.46, 5.62, 4.92, 5.73, 5.19];
const BASELINE_MEANS: [f64; 9] = [4.19, 3.96, 3.81, 4.41, 4.59, 4.15, 4.30, 4.67, 4.07];
const ACCURACIES: [(Trait, f64); 5] = [
    (Trait::Extraversion, 0.8300),
    (Trait::Agreeableness, 0.7300),
    (Trait::Conscientiousness, 0.7100),
    (Trait::Neuroticism, 0.8265),
    (Trait::Openness, 0.7800),
];

type Outcome = Result<String, String>;

fn impression_arithmetic() -> Outcome {
    let mut notes = Vec::new();
    for (label, means, printed) in [("team", TEAM_MEANS, 48.46), ("baseline", BASELINE_MEANS, 38.15)] {
        let total = ImpressionScores::from_item_means(means, 1).map_err(|e| e.to_string())?.total;
        let line = format!("{label} {total:.2} vs {printed:.2}");
        if (total - printed).abs() > 0.01 {
            return Err(line);
        }
        notes.push(line);
    }
    Ok(notes.join(", "))
}

fn noise_fidelity() -> Outcome {
    let started = Instant::now();
    let mut sim = NoiseModel::reference(7).simulator().map_err(|e| e.to_string())?;
    let draws = 10_000;
    let mut hits = [0usize; 5];
    for i in 0..draws {
        let truth = TraitLabels::all(if i % 2 == 0 { Level::High } else { Level::Low });
        let capture = sim.simulate_capture(&truth, 1);
        for (t, _) in ACCURACIES {
            let high = capture.scores.get(t) >= 0.5;
            hits[t as usize] += usize::from(high == (truth.get(t) == Level::High));
        }
    }
    let elapsed = started.elapsed();
    let mut notes = Vec::new();
    let mut ok = elapsed < Duration::from_secs(5);
    for (t, expected) in ACCURACIES {
        let acc = hits[t as usize] as f64 / draws as f64;
        ok &= (acc - expected).abs() <= 0.02;
        notes.push(format!("{t} {acc:.4}/{expected:.4}"));
    }
    let line = format!("{} in {:.2?}", notes.join(" "), elapsed);
    if ok { Ok(line) } else { Err(line) }
}

fn aggregation_grid() -> Outcome {
    let steps = 21;
    let mut mismatches = 0;
    let mut cells = 0;
    for i in 0..steps {
        for j in 0..steps {
            for k in 0..steps {
                let score = |n: usize| TraitScoreVector::uniform(n as f64 / 20.0).unwrap();
                let captures: Vec<CaptureEstimate> = [i, j, k]
                    .iter()
                    .enumerate()
                    .map(|(c, &n)| CaptureEstimate::new(c as u8 + 1, score(n), CaptureSource::Fixture))
                    .collect();
                let profile = aggregate(&captures, 0.5).map_err(|e| e.to_string())?;
                // Integer form of mean >= 0.5: (i + j + k) / 60 >= 1/2.
                let expected = if i + j + k >= 30 { Level::High } else { Level::Low };
                cells += 1;
                mismatches += Trait::ALL.iter().filter(|&&t| profile.labels.get(t) != expected).count();
            }
        }
    }
    let line = format!("{cells} triples, {mismatches} mismatches");
    if mismatches == 0 { Ok(line) } else { Err(line) }
}

fn policy_table() -> Outcome {
    let mut checked = 0;
    for group in [CategoryGroup::GroupA, CategoryGroup::GroupB] {
        for level in [Level::High, Level::Low] {
            let row = common::policy_oracle(group, level);
            for n in 1..=3u8 {
                let slot = Slot::from_number(n).unwrap();
                let spec = select_question(group, level, slot);
                let mut keys = vec![spec.prompt.as_str()];
                keys.extend(spec.followups.iter().map(|k| k.as_str()));
                if keys != row[n as usize - 1] || spec.slot != slot {
                    return Err(format!("{group:?}/{level}/slot {n}: {keys:?}"));
                }
                checked += 1;
            }
        }
    }
    if checked == 12 {
        Ok(format!("{checked}/12 cells"))
    } else {
        Err(format!("{checked} cells"))
    }
}

fn flow_properties() -> Outcome {
    let engine = DialogueEngine::builtin();
    let cases = 1_000u64;
    let mut defaulted = 0;
    for seed in 0..cases {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let delay = rng.random_range(0..8_000);
        let runner = BatchRunner::new(
            engine.clone(),
            SimulationConfig { estimator_delay_ms: delay, ..Default::default() },
        );
        let persona = Persona::random(&mut rng, engine.catalog(), format!("f{seed}"));
        let noise = NoiseModel::reference(seed);
        let record = runner.run_session(0, &persona, &noise, seed).map_err(|e| format!("seed {seed}: {e}"))?;
        common::check_flow(&record, &persona, engine.catalog()).map_err(|e| format!("seed {seed}: {e}"))?;
        if record.branch() != record.profile.extraversion() {
            return Err(format!("seed {seed}: branch differs from profile"));
        }
        let again = runner.run_session(0, &persona, &noise, seed).map_err(|e| e.to_string())?;
        if again.transcript.render() != record.transcript.render() {
            return Err(format!("seed {seed}: replay differs"));
        }
        defaulted += usize::from(record.profile.defaulted);
    }
    Ok(format!("{cases} sessions ({defaulted} on the deadline default), replay identical"))
}

fn timeout_behaviour() -> Outcome {
    let engine = DialogueEngine::builtin();
    let deadline = engine.config().estimation_deadline_ms;
    let run = |delay: u64, seed: u64| {
        let runner = BatchRunner::new(
            engine.clone(),
            SimulationConfig { estimator_delay_ms: delay, ..Default::default() },
        );
        let mut persona = Persona::random(&mut ChaCha8Rng::seed_from_u64(seed), engine.catalog(), "t");
        persona.truth = TraitLabels::all(Level::High);
        runner.run_session(0, &persona, &NoiseModel::perfect(seed), seed).unwrap()
    };
    for seed in 0..50 {
        let late = run(deadline + 1 + seed * 97, seed);
        let again = run(deadline + 1 + seed * 97, seed);
        if !late.profile.defaulted || late.branch() != Level::Low {
            return Err(format!("seed {seed}: late estimate did not default to Low"));
        }
        if late.transcript.render() != again.transcript.render() {
            return Err(format!("seed {seed}: defaulted session not deterministic"));
        }
        let early = run(deadline.saturating_sub(1 + seed * 97), seed);
        if early.profile.defaulted || early.branch() != Level::High {
            return Err(format!("seed {seed}: early estimate was not used"));
        }
    }
    Ok(format!("deadline {deadline} ms, 50 seeds each side"))
}

/// Probability that the mean of three simulated extraversion scores lands
/// on the wrong side of 0.5, estimated directly from the capture model.
fn mismatch_oracle(accuracy: f64, trials: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let wrong = (0..trials)
        .filter(|_| {
            // Truth High: a correct capture is uniform on [0.5, 1], a wrong one on [0, 0.5).
            let sum: f64 = (0..3)
                .map(|_| {
                    if rng.random::<f64>() < accuracy {
                        0.5 + 0.5 * rng.random::<f64>()
                    } else {
                        0.5 * rng.random::<f64>()
                    }
                })
                .sum();
            sum / 3.0 < 0.5
        })
        .count();
    wrong as f64 / trials as f64
}

fn branch_mismatch_rate() -> Outcome {
    let engine = DialogueEngine::builtin();
    let runner = BatchRunner::new(engine.clone(), SimulationConfig::default());
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    let personas: Vec<Persona> = (0..26)
        .map(|i| Persona::random(&mut rng, engine.catalog(), format!("p{i}")))
        .collect();
    let mut sessions = 0usize;
    let mut mismatches = 0usize;
    for seed in 0..1_000 {
        let batch = runner
            .run(&personas, &NoiseModel::reference(seed), seed)
            .map_err(|e| e.to_string())?;
        for r in &batch.sessions {
            sessions += 1;
            mismatches += usize::from(!r.branch_matches_truth());
        }
    }
    let observed = mismatches as f64 / sessions as f64;
    let oracle = mismatch_oracle(0.83, 1_000_000, 0xacc);
    let line = format!("observed {observed:.4} over {sessions} sessions, oracle {oracle:.4}");
    if (observed - oracle).abs() <= 0.03 { Ok(line) } else { Err(line) }
}

#[test]
fn acceptance_suite() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("impression arithmetic", impression_arithmetic),
        ("noise-model fidelity", noise_fidelity),
        ("aggregation oracle", aggregation_grid),
        ("policy-table conformance", policy_table),
        ("flow properties", flow_properties),
        ("timeout behaviour", timeout_behaviour),
        ("branch-mismatch rate", branch_mismatch_rate),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                println!("FAIL {name}: {detail}");
                failed.push(name);
            }
        }
    }
    println!(
        "NOTE human-subject outcomes: field-study effect and rankings are not reproducible offline; \
         covered only by the arithmetic and property checks above"
    );
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
