mod common;

use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use trisort::automaton::{is_consistent, PathBudget};
use trisort::inference::{infer, InferenceOptions, InferenceRequest, InferenceStatus, KChoice, Model};

fn options() -> InferenceOptions {
    InferenceOptions { timeout: Duration::from_secs(60), ..Default::default() }
}

#[test]
fn prefix_model_feasibility_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let model: Model = "P".parse().unwrap();
    let mut disagreements = Vec::new();
    for _ in 0..150 {
        let sample = common::random_sample(&mut rng, 2, 3, 4);
        for k in 1..=2 {
            let request = InferenceRequest { sample: sample.clone(), model, k: KChoice::Fixed(k), options: options() };
            let result = infer(&request).unwrap();
            let sat = match &result.status {
                InferenceStatus::Found(found) => {
                    assert!(common::consistent_by_sets(&found.nfa, &sample));
                    true
                }
                InferenceStatus::Infeasible => false,
                InferenceStatus::TimedOut => panic!("tiny instance timed out"),
            };
            if sat != common::brute_force_feasible(&sample, k) {
                disagreements.push((sample.clone(), k));
            }
        }
    }
    assert!(disagreements.is_empty(), "{disagreements:?}");
}

#[test]
fn found_automata_are_consistent_under_both_checks() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for model in Model::basic() {
        for _ in 0..8 {
            let sample = common::random_sample(&mut rng, 3, 5, 7);
            let request = InferenceRequest { sample: sample.clone(), model, k: KChoice::UpTo(4), options: options() };
            if let Some(found) = infer(&request).unwrap().found() {
                assert!(is_consistent(&found.nfa, &sample, PathBudget(u64::MAX)).unwrap(), "{model}");
                assert!(common::consistent_by_sets(&found.nfa, &sample), "{model}");
                if let Some(raw) = &found.raw {
                    assert!(common::consistent_by_sets(raw, &sample), "{model} raw");
                }
            }
        }
    }
}
