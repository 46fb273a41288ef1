mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use trisort::automaton::{Sample, Symbol};
use trisort::splitting::{
    fitness, ils_initial, ils_optimize, split_best_prefix, split_best_suffix, IlsConfig, IlsInit, Splitting,
};

/// Fitness from the definition: distinct non-empty prefixes of the prefix
/// parts plus k times distinct non-empty suffixes of the suffix parts.
fn fitness_by_definition(s: &Splitting, k: usize) -> usize {
    let mut prefixes: BTreeSet<Vec<Symbol>> = BTreeSet::new();
    let mut suffixes: BTreeSet<Vec<Symbol>> = BTreeSet::new();
    for (u, v) in s.pairs() {
        for n in 1..=u.len() {
            prefixes.insert(u[..n].to_vec());
        }
        for n in 0..v.len() {
            suffixes.insert(v[n..].to_vec());
        }
    }
    prefixes.len() + k * suffixes.len()
}

/// Greedy suffix cover written naively: rank every suffix, walk the
/// ranking, keep a suffix when it covers a not yet covered word.
fn naive_best_suffix(words: &[Vec<Symbol>]) -> Vec<usize> {
    let mut candidates: Vec<Vec<Symbol>> = Vec::new();
    for w in words {
        for n in 0..w.len() {
            if !candidates.contains(&w[n..].to_vec()) {
                candidates.push(w[n..].to_vec());
            }
        }
    }
    let covers = |c: &Vec<Symbol>, w: &Vec<Symbol>| w.ends_with(c);
    let cost = |c: &Vec<Symbol>| c.len() * words.iter().filter(|w| covers(c, w)).count();
    candidates.sort_by(|a, b| cost(b).cmp(&cost(a)).then(b.len().cmp(&a.len())).then(a.cmp(b)));
    let mut split: Vec<Option<usize>> = vec![None; words.len()];
    for c in &candidates {
        if words.iter().enumerate().any(|(i, w)| split[i].is_none() && covers(c, w)) {
            for (i, w) in words.iter().enumerate() {
                if split[i].is_none() && covers(c, w) {
                    split[i] = Some(w.len() - c.len());
                }
            }
        }
    }
    split.into_iter().map(Option::unwrap).collect()
}

#[test]
fn documented_greedy_examples() {
    let s = Sample::from_strs(&["ab", "bb"], &[]).unwrap();
    assert_eq!(split_best_suffix(&s).cuts(), &[0, 0]);
    let s = Sample::from_strs(&["ab", "ac"], &[]).unwrap();
    assert_eq!(split_best_prefix(&s).cuts(), &[2, 2]);
    let s = Sample::from_strs(&["abc"], &[]).unwrap();
    assert_eq!(split_best_suffix(&s).cuts(), &[0]);
    assert_eq!(split_best_prefix(&s).cuts(), &[3]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn fitness_matches_definition(seed in any::<u64>(), k in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sample = common::random_sample(&mut rng, 3, 6, 10);
        let config = IlsConfig::new(IlsInit::Random, seed);
        let s = ils_initial(&sample, &config);
        prop_assert_eq!(fitness(&s, k), fitness_by_definition(&s, k));
    }

    #[test]
    fn best_suffix_matches_naive_greedy(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sample = common::random_sample(&mut rng, 2, 5, 8);
        let words: Vec<Vec<Symbol>> = sample.labelled().map(|(_, w)| w.to_vec()).collect();
        let (got, expected) = (split_best_suffix(&sample), naive_best_suffix(&words));
        prop_assert_eq!(got.cuts(), expected.as_slice());
    }

    #[test]
    fn ils_never_worsens_and_is_deterministic(seed in any::<u64>(), k in 1usize..5, init in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sample = common::random_sample(&mut rng, 3, 6, 10);
        let init = [IlsInit::Random, IlsInit::BestPrefix, IlsInit::BestSuffix][init];
        let mut config = IlsConfig::new(init, seed);
        config.max_iterations = 40;
        let start = ils_initial(&sample, &config);
        let best = ils_optimize(&sample, k, &config).unwrap();
        prop_assert!(fitness(&best, k) <= fitness(&start, k));
        for (w, (u, v)) in best.words().iter().zip(best.pairs()) {
            prop_assert_eq!([u, v].concat(), w.to_vec());
        }
        prop_assert_eq!(best, ils_optimize(&sample, k, &config).unwrap());
    }
}
