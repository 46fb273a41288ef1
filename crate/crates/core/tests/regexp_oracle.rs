use std::collections::BTreeMap;

use trisort::automaton::Label;
use trisort::regexp::{generate_regexp_benchmark, Regexp, RegexpBenchmarkSpec};

const PATTERNS: [&str; 4] = ["(0|11)(001|000|10)*0", "[0-9][0-4][5-9](024|135|(98|87))*(0|6)", "(ab|b)*a?", "a(b|c)*c"];

fn words_up_to(alphabet: &[char], max_len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut layer = vec![String::new()];
    for _ in 0..max_len {
        layer = layer.iter().flat_map(|w| alphabet.iter().map(move |c| format!("{w}{c}"))).collect();
        out.extend(layer.iter().cloned());
    }
    out
}

#[test]
fn matching_agrees_with_the_regex_crate() {
    for pattern in PATTERNS {
        let ours = Regexp::compile(pattern).unwrap();
        let reference = regex::Regex::new(&format!("^(?:{pattern})$")).unwrap();
        let alphabet = ours.alphabet().to_vec();
        let max_len = if alphabet.len() > 3 { 3 } else { 9 };
        for w in words_up_to(&alphabet, max_len) {
            assert_eq!(ours.is_match(&w), reference.is_match(&w), "{pattern} on {w:?}");
        }
    }
}

#[test]
fn length_counts_agree_with_enumeration() {
    for pattern in ["(0|11)(001|000|10)*0", "(ab|b)*a?", "a(b|c)*c"] {
        let ours = Regexp::compile(pattern).unwrap();
        let reference = regex::Regex::new(&format!("^(?:{pattern})$")).unwrap();
        let counts = ours.count_by_length(9).unwrap();
        let mut expected: BTreeMap<usize, u128> = (0..=9).map(|n| (n, 0)).collect();
        for w in words_up_to(ours.alphabet(), 9) {
            if reference.is_match(&w) {
                *expected.get_mut(&w.chars().count()).unwrap() += 1;
            }
        }
        assert_eq!(counts, expected.into_values().collect::<Vec<_>>(), "{pattern}");
    }
}

#[test]
fn benchmark_properties() {
    for (pattern, seed) in [(PATTERNS[0], 7), (PATTERNS[1], 3)] {
        let spec = RegexpBenchmarkSpec { pattern: pattern.into(), total: 200, min_len: 1, max_len: 15, seed };
        let corpus = generate_regexp_benchmark(&spec).unwrap();
        assert_eq!(corpus, generate_regexp_benchmark(&spec).unwrap());
        assert_eq!((corpus.count(Label::Positive), corpus.count(Label::Negative)), (100, 100));
        let reference = regex::Regex::new(&format!("^(?:{pattern})$")).unwrap();
        let text = |w: &trisort::automaton::Word| corpus.alphabet().decode(w);
        let sorted = |s: String| {
            let mut c: Vec<char> = s.chars().collect();
            c.sort_unstable();
            c
        };
        let anagrams: Vec<Vec<char>> = corpus.words(Label::Positive).map(|w| sorted(text(w))).collect();
        for w in corpus.words(Label::Positive) {
            assert!(reference.is_match(&text(w)));
            assert!((1..=15).contains(&w.len()));
        }
        for w in corpus.words(Label::Negative) {
            assert!(!reference.is_match(&text(w)));
            assert!(anagrams.contains(&sorted(text(w))));
        }
        let other = generate_regexp_benchmark(&RegexpBenchmarkSpec { seed: seed + 1, ..spec.clone() }).unwrap();
        assert_ne!(corpus, other);
    }
}
