//! Scoring words against a probabilistic automaton.
//!
//! Every physical path of a word contributes, whatever sort its last state
//! has. A path's score combines its transition probabilities and the stop
//! probability of its last state, either as a product or as a mean over the
//! `|w| + 1` terms. Path scores are then aggregated by maximum or by mean.
//! All four scores come from dynamic programming over the word, so the
//! number of paths never matters.

use std::fmt;
use std::str::FromStr;

use crate::automaton::{Alphabet, Label, Symbol};
use crate::freqprob::ProbabilisticNfa;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassifierKind {
    /// Product per path, maximum over paths.
    MM,
    /// Product per path, mean over paths.
    MA,
    /// Sum per path, maximum over paths.
    SM,
    /// Sum per path, mean over paths.
    SA,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 4] = [ClassifierKind::MM, ClassifierKind::MA, ClassifierKind::SM, ClassifierKind::SA];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::MM => "mm",
            ClassifierKind::MA => "ma",
            ClassifierKind::SM => "sm",
            ClassifierKind::SA => "sa",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown classifier `{0}`; expected mm, ma, sm or sa")]
pub struct ParseClassifierError(String);

impl FromStr for ClassifierKind {
    type Err = ParseClassifierError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ClassifierKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| ParseClassifierError(s.to_owned()))
    }
}

/// Decision when both scores are equal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieRule {
    Positive,
    #[default]
    Negative,
}

impl FromStr for TieRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pos" => Ok(TieRule::Positive),
            "neg" => Ok(TieRule::Negative),
            _ => Err(format!("unknown tie rule `{s}`; expected pos or neg")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScorePair<T> {
    pub positive: T,
    pub negative: T,
    pub path_count: u128,
}

impl<T: Scalar> ScorePair<T> {
    pub fn zero() -> Self {
        ScorePair { positive: T::zero(), negative: T::zero(), path_count: 0 }
    }
}

/// Scores `word`, which must be written over the automaton's alphabet.
pub fn score<T: Scalar>(pnfa: &ProbabilisticNfa<T>, word: &[Symbol], kind: ClassifierKind) -> ScorePair<T> {
    let path_count = path_counts(pnfa, word).iter().fold(0u128, |a, &c| a.saturating_add(c));
    if path_count == 0 {
        return ScorePair::zero();
    }
    let polarity_score = |label| match kind {
        ClassifierKind::MM => max_product(pnfa, word, label),
        ClassifierKind::MA => sum_of_products(pnfa, word, label) / T::from_count(path_count),
        ClassifierKind::SM => max_sum(pnfa, word, label) / length_divisor::<T>(word),
        ClassifierKind::SA => sum_of_sums(pnfa, word, label) / T::from_count(path_count) / length_divisor::<T>(word),
    };
    ScorePair { positive: polarity_score(Label::Positive), negative: polarity_score(Label::Negative), path_count }
}

/// Scores a word given over `source`; characters the automaton does not
/// know leave the word without paths.
pub fn score_in<T: Scalar>(pnfa: &ProbabilisticNfa<T>, word: &[Symbol], source: &Alphabet, kind: ClassifierKind) -> ScorePair<T> {
    match pnfa.nfa().alphabet().translate(word, source) {
        Some(w) => score(pnfa, &w, kind),
        None => ScorePair::zero(),
    }
}

/// Scores a word given as text.
pub fn score_text<T: Scalar>(pnfa: &ProbabilisticNfa<T>, word: &str, kind: ClassifierKind) -> ScorePair<T> {
    match pnfa.nfa().alphabet().encode(word) {
        Ok(w) => score(pnfa, &w, kind),
        Err(_) => ScorePair::zero(),
    }
}

pub fn decide<T: Scalar>(scores: &ScorePair<T>, tie: TieRule) -> Label {
    if scores.positive > scores.negative {
        Label::Positive
    } else if scores.negative > scores.positive {
        Label::Negative
    } else {
        match tie {
            TieRule::Positive => Label::Positive,
            TieRule::Negative => Label::Negative,
        }
    }
}

fn length_divisor<T: Scalar>(word: &[Symbol]) -> T {
    T::from_usize(word.len() + 1).expect("word length fits the scalar")
}

/// Generic forward pass. `init` is the value of the empty path at the
/// initial state, `step(value, count, gamma)` extends a value along a
/// transition, `merge` combines values reaching the same state, and
/// `finish(value, count, gamma_final)` closes a path at its last state.
/// Values travel together with path counts so averages can be formed.
fn forward<T: Scalar, V: Copy>(
    pnfa: &ProbabilisticNfa<T>,
    word: &[Symbol],
    label: Label,
    init: V,
    step: impl Fn(V, u128, T) -> V,
    merge: impl Fn(V, V) -> V,
) -> Vec<Option<(V, u128)>> {
    let nfa = pnfa.nfa();
    let mut layer: Vec<Option<(V, u128)>> = vec![None; nfa.k()];
    layer[0] = Some((init, 1));
    for &s in word {
        let mut next: Vec<Option<(V, u128)>> = vec![None; nfa.k()];
        for (q, cell) in layer.iter().enumerate() {
            let Some((value, count)) = *cell else { continue };
            for &(to, idx) in nfa.successors(q, s) {
                let extended = step(value, count, pnfa.transition_probability(label, idx));
                next[to] = Some(match next[to] {
                    None => (extended, count),
                    Some((v, c)) => (merge(v, extended), c.saturating_add(count)),
                });
            }
        }
        layer = next;
    }
    layer
}

fn path_counts<T: Scalar>(pnfa: &ProbabilisticNfa<T>, word: &[Symbol]) -> Vec<u128> {
    forward(pnfa, word, Label::Positive, (), |_, _, _| (), |_, _| ())
        .into_iter()
        .map(|cell| cell.map_or(0, |(_, c)| c))
        .collect()
}

fn max_product<T: Scalar>(pnfa: &ProbabilisticNfa<T>, word: &[Symbol], label: Label) -> T {
    let layer = forward(pnfa, word, label, T::one(), |v, _, g| v * g, T::max);
    finals(layer).fold(T::zero(), |best, (q, v, _)| best.max(v * pnfa.final_probability(label, q)))
}

fn sum_of_products<T: Scalar>(pnfa: &ProbabilisticNfa<T>, word: &[Symbol], label: Label) -> T {
    let layer = forward(pnfa, word, label, T::one(), |v, _, g| v * g, |a, b| a + b);
    finals(layer).map(|(q, v, _)| v * pnfa.final_probability(label, q)).sum()
}

fn max_sum<T: Scalar>(pnfa: &ProbabilisticNfa<T>, word: &[Symbol], label: Label) -> T {
    let layer = forward(pnfa, word, label, T::zero(), |v, _, g| v + g, T::max);
    finals(layer).fold(T::zero(), |best, (q, v, _)| best.max(v + pnfa.final_probability(label, q)))
}

/// Sum over paths of each path's probability sum.
fn sum_of_sums<T: Scalar>(pnfa: &ProbabilisticNfa<T>, word: &[Symbol], label: Label) -> T {
    // A transition taken by `count` paths adds `count * gamma` to the total.
    let layer = forward(pnfa, word, label, T::zero(), |v, c, g| v + T::from_count(c) * g, |a, b| a + b);
    finals(layer).map(|(q, v, c)| v + T::from_count(c) * pnfa.final_probability(label, q)).sum()
}

fn finals<V>(layer: Vec<Option<(V, u128)>>) -> impl Iterator<Item = (usize, V, u128)> {
    layer.into_iter().enumerate().filter_map(|(q, cell)| cell.map(|(v, c)| (q, v, c)))
}
