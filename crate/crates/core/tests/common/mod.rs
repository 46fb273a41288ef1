//! Independent oracles shared by the integration suites.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use trisort::automaton::{Alphabet, Label, Nfa3, Sample, Transition, Word};
use trisort::freqprob::ProbabilisticNfa;

pub const LETTERS: [char; 3] = ['a', 'b', 'c'];

/// A sample over the first `sigma` letters: distinct random words of
/// length 1..=max_len, each labelled at random.
pub fn random_sample(rng: &mut impl Rng, sigma: usize, max_len: usize, max_words: usize) -> Sample {
    let alphabet = Alphabet::new(LETTERS[..sigma].iter().copied()).unwrap();
    let count = rng.gen_range(1..=max_words);
    let mut words: Vec<Vec<u16>> = Vec::new();
    for _ in 0..count * 4 {
        if words.len() == count {
            break;
        }
        let len = rng.gen_range(1..=max_len);
        let w: Vec<u16> = (0..len).map(|_| rng.gen_range(0..sigma as u16)).collect();
        if !words.contains(&w) {
            words.push(w);
        }
    }
    let (mut pos, mut neg) = (Vec::new(), Vec::new());
    for w in words {
        if rng.gen_bool(0.5) {
            pos.push(Word::new(w));
        } else {
            neg.push(Word::new(w));
        }
    }
    Sample::new(alphabet, pos, neg).unwrap()
}

/// A random automaton with `k` states over the sample's alphabet.
pub fn random_nfa(rng: &mut impl Rng, alphabet: &Alphabet, k: usize, density: f64) -> Nfa3 {
    let mut transitions = Vec::new();
    for from in 0..k {
        for s in 0..alphabet.len() as u16 {
            for to in 0..k {
                if rng.gen_bool(density) {
                    transitions.push(Transition::new(from, s, to));
                }
            }
        }
    }
    let mut states: Vec<usize> = (0..k).collect();
    states.shuffle(rng);
    let accepting: Vec<usize> = states.iter().copied().filter(|_| rng.gen_bool(0.3)).collect();
    let rejecting: Vec<usize> = states.iter().copied().filter(|q| !accepting.contains(q) && rng.gen_bool(0.3)).collect();
    Nfa3::new(k, alphabet.clone(), accepting, rejecting, transitions).unwrap()
}

/// Reachable-state bitmask after reading `word` in a transition table
/// indexed `[from][symbol]`.
fn reach(table: &[Vec<u32>], word: &[u16]) -> u32 {
    let mut current = 1u32;
    for &s in word {
        let mut next = 0;
        for (q, row) in table.iter().enumerate() {
            if current >> q & 1 == 1 {
                next |= row[s as usize];
            }
        }
        current = next;
    }
    current
}

/// Whether some 3-sort automaton with `k` states is consistent with the
/// sample, by enumeration of every transition set and sort assignment.
pub fn brute_force_feasible(sample: &Sample, k: usize) -> bool {
    let sigma = sample.alphabet().len();
    let cells = sigma * k * k;
    assert!(cells <= 24, "enumeration too large");
    let sorts = 3usize.pow(k as u32);
    for mask in 0u64..(1u64 << cells) {
        let mut table = vec![vec![0u32; sigma]; k];
        for bit in 0..cells {
            if mask >> bit & 1 == 1 {
                let (from, rest) = (bit / (sigma * k), bit % (sigma * k));
                table[from][rest / k] |= 1 << (rest % k);
            }
        }
        let ends: Vec<(Label, u32)> = sample.labelled().map(|(l, w)| (l, reach(&table, w))).collect();
        'sorts: for code in 0..sorts {
            let (mut acc, mut rej, mut c) = (0u32, 0u32, code);
            for q in 0..k {
                match c % 3 {
                    1 => acc |= 1 << q,
                    2 => rej |= 1 << q,
                    _ => {}
                }
                c /= 3;
            }
            for &(label, end) in &ends {
                let (own, other) = match label {
                    Label::Positive => (acc, rej),
                    Label::Negative => (rej, acc),
                };
                if end & own == 0 || end & other != 0 {
                    continue 'sorts;
                }
            }
            return true;
        }
    }
    false
}

/// Independent consistency check by reachable sets.
pub fn consistent_by_sets(nfa: &Nfa3, sample: &Sample) -> bool {
    let sigma = nfa.alphabet().len();
    let mut table = vec![vec![0u32; sigma]; nfa.k()];
    for t in nfa.transitions() {
        table[t.from][t.symbol as usize] |= 1 << t.to;
    }
    let set = |states: &std::collections::BTreeSet<usize>| states.iter().fold(0u32, |m, &q| m | 1 << q);
    let (acc, rej) = (set(nfa.accepting()), set(nfa.rejecting()));
    sample.labelled().all(|(label, w)| {
        let Some(w) = nfa.alphabet().translate(w, sample.alphabet()) else { return false };
        let end = reach(&table, &w);
        match label {
            Label::Positive => end & acc != 0 && end & rej == 0,
            Label::Negative => end & rej != 0 && end & acc == 0,
        }
    })
}

/// All paths of `word` as lists of (transition index, last state), by
/// plain recursion over the transition list.
pub fn all_paths(nfa: &Nfa3, word: &[u16]) -> Vec<(Vec<usize>, usize)> {
    fn go(nfa: &Nfa3, word: &[u16], q: usize, acc: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, usize)>) {
        let Some((&s, rest)) = word.split_first() else {
            out.push((acc.clone(), q));
            return;
        };
        for (i, t) in nfa.transitions().iter().enumerate() {
            if t.from == q && t.symbol == s {
                acc.push(i);
                go(nfa, rest, t.to, acc, out);
                acc.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(nfa, word, 0, &mut Vec::new(), &mut out);
    out
}

/// Classifier scores computed path by path: (MM, MA, SM, SA) for one polarity.
pub fn scores_by_enumeration(pnfa: &ProbabilisticNfa<f64>, word: &[u16], label: Label) -> Option<[f64; 4]> {
    let paths = all_paths(pnfa.nfa(), word);
    if paths.is_empty() {
        return None;
    }
    let n = word.len() as f64 + 1.0;
    let products: Vec<f64> = paths
        .iter()
        .map(|(p, last)| p.iter().map(|&i| pnfa.transition_probability(label, i)).product::<f64>() * pnfa.final_probability(label, *last))
        .collect();
    let sums: Vec<f64> = paths
        .iter()
        .map(|(p, last)| (p.iter().map(|&i| pnfa.transition_probability(label, i)).sum::<f64>() + pnfa.final_probability(label, *last)) / n)
        .collect();
    let max = |v: &[f64]| v.iter().copied().fold(f64::MIN, f64::max);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Some([max(&products), mean(&products), max(&sums), mean(&sums)])
}
