mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use trisort::automaton::{Alphabet, Label, Nfa3, Transition};
use trisort::classifier::{decide, score, score_text, ClassifierKind, ScorePair, TieRule};
use trisort::freqprob::{build_wffa, to_probabilistic, ProbabilisticNfa, WeightConfig};

/// Two paths for "abb": 1 -a-> 2 -b-> 3 -b-> 4 and 1 -a-> 2 -b-> 5 -b-> 6.
fn two_path_fixture() -> ProbabilisticNfa<f64> {
    let t = Transition::new;
    let edges = [t(0, 0, 1), t(1, 1, 2), t(2, 1, 3), t(1, 1, 4), t(4, 1, 5)];
    let nfa = Nfa3::new(6, Alphabet::new(['a', 'b']).unwrap(), [3, 5], [], edges).unwrap();
    let mut p = ProbabilisticNfa::zeroed(nfa);
    let pos = [0.2, 0.5, 0.35, 0.15, 0.55];
    let neg = [0.6, 0.5, 0.65, 0.5, 0.5];
    for (i, e) in edges.iter().enumerate() {
        p.set_transition(Label::Positive, e, pos[i]).unwrap();
        p.set_transition(Label::Negative, e, neg[i]).unwrap();
    }
    p.set_final(Label::Positive, 3, 0.6).unwrap();
    p.set_final(Label::Positive, 5, 0.9).unwrap();
    p.set_final(Label::Negative, 3, 0.4).unwrap();
    p.set_final(Label::Negative, 5, 0.75).unwrap();
    p
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

#[test]
fn two_path_example_scores() {
    let p = two_path_fixture();
    let expected = [
        (ClassifierKind::MM, 0.02, 0.11),
        (ClassifierKind::MA, 0.02, 0.10),
        (ClassifierKind::SM, 0.45, 0.59),
        (ClassifierKind::SA, 0.43, 0.56),
    ];
    for (kind, pos, neg) in expected {
        let s = score_text(&p, "abb", kind);
        assert_eq!((round2(s.positive), round2(s.negative)), (pos, neg), "{kind}");
        assert_eq!(s.path_count, 2);
        assert_eq!(decide(&s, TieRule::Negative), Label::Negative);
        assert_eq!(decide(&s, TieRule::Positive), Label::Negative);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn dynamic_programming_matches_enumeration(seed in any::<u64>(), k in 1usize..=4, mask in any::<u8>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sample = common::random_sample(&mut rng, 2, 5, 8);
        let nfa = common::random_nfa(&mut rng, sample.alphabet(), k, 0.5);
        let pnfa = to_probabilistic(&build_wffa(&nfa, &sample, WeightConfig::<f64>::from_bitmask(mask)));
        for (_, word) in sample.labelled() {
            let paths = common::all_paths(&nfa, word).len() as u128;
            for (i, kind) in ClassifierKind::ALL.into_iter().enumerate() {
                let s = score(&pnfa, word, kind);
                prop_assert_eq!(s.path_count, paths);
                match (common::scores_by_enumeration(&pnfa, word, Label::Positive), common::scores_by_enumeration(&pnfa, word, Label::Negative)) {
                    (Some(p), Some(n)) => {
                        prop_assert!((s.positive - p[i]).abs() < 1e-12, "{} {} vs {}", kind, s.positive, p[i]);
                        prop_assert!((s.negative - n[i]).abs() < 1e-12);
                    }
                    _ => prop_assert_eq!(s, ScorePair::zero()),
                }
            }
        }
    }

    #[test]
    fn maxima_dominate_means_and_scores_are_probabilities(seed in any::<u64>(), mask in any::<u8>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sample = common::random_sample(&mut rng, 2, 6, 8);
        let nfa = common::random_nfa(&mut rng, sample.alphabet(), 3, 0.6);
        let pnfa = to_probabilistic(&build_wffa(&nfa, &sample, WeightConfig::<f64>::from_bitmask(mask)));
        for (_, word) in sample.labelled() {
            let [mm, ma, sm, sa] = ClassifierKind::ALL.map(|kind| score(&pnfa, word, kind));
            for (hi, lo) in [(mm, ma), (sm, sa)] {
                prop_assert!(hi.positive >= lo.positive - 1e-12);
                prop_assert!(hi.negative >= lo.negative - 1e-12);
            }
            for s in [mm, ma, sm, sa] {
                for v in [s.positive, s.negative] {
                    prop_assert!((0.0..=1.0 + 1e-12).contains(&v));
                }
            }
        }
    }

    #[test]
    fn decisions_ignore_common_scale(p in 0.0f64..1.0, n in 0.0f64..1.0, c in 0.001f64..1000.0) {
        let a = ScorePair { positive: p, negative: n, path_count: 1 };
        let b = ScorePair { positive: p * c, negative: n * c, path_count: 1 };
        prop_assert_eq!(decide(&a, TieRule::Negative), decide(&b, TieRule::Negative));
    }
}

#[test]
fn single_precision_fixture() {
    let p = two_path_fixture();
    let p32 = ProbabilisticNfa::<f32>::parse(&p.to_text()).unwrap();
    let s = score_text(&p32, "abb", ClassifierKind::SA);
    assert!((s.positive - 0.43125).abs() < 1e-6);
    assert!((s.negative - 0.5625).abs() < 1e-6);
}
