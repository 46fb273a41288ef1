//! Path statistics, weighted-frequency automata and probabilistic automata.
//!
//! Counts are taken over physical paths of sample words. For each polarity
//! there are two tables: paths ending in the polarity's own final sort, and
//! paths ending in a whatever state. Counting runs over a trellis of forward
//! and backward path counts, so no path is ever materialised.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::automaton::{
    format_error, write_structure, AutomatonError, Label, Nfa3, Sample, State, StateSort, Symbol, TextDocument,
    Transition,
};
use crate::scalar::Scalar;

/// One of the four counting tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Table {
    /// Positive words, paths ending in `F+`.
    PosFinal,
    /// Positive words, paths ending in a whatever state.
    PosOpen,
    /// Negative words, paths ending in `F-`.
    NegFinal,
    /// Negative words, paths ending in a whatever state.
    NegOpen,
}

impl Table {
    pub const ALL: [Table; 4] = [Table::PosFinal, Table::PosOpen, Table::NegFinal, Table::NegOpen];

    pub fn label(self) -> Label {
        match self {
            Table::PosFinal | Table::PosOpen => Label::Positive,
            Table::NegFinal | Table::NegOpen => Label::Negative,
        }
    }

    pub fn tables_of(label: Label) -> [Table; 2] {
        match label {
            Label::Positive => [Table::PosFinal, Table::PosOpen],
            Label::Negative => [Table::NegFinal, Table::NegOpen],
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    /// Whether a path ending in a state of `sort` is counted by this table.
    pub fn counts_end(self, sort: StateSort) -> bool {
        matches!(
            (self, sort),
            (Table::PosFinal, StateSort::Accepting)
                | (Table::NegFinal, StateSort::Rejecting)
                | (Table::PosOpen | Table::NegOpen, StateSort::Whatever)
        )
    }
}

fn polarity(label: Label) -> usize {
    match label {
        Label::Positive => 0,
        Label::Negative => 1,
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FreqProbError {
    #[error("weight {0} is negative or not finite")]
    BadWeight(String),
    #[error("probability {0} is outside [0, 1]")]
    BadProbability(String),
    #[error("transition q{} {} q{} is not part of the automaton", .0.from + 1, .0.symbol, .0.to + 1)]
    UnknownTransition(Transition),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
}

/// Weights applied to the counting tables, one for final-state counts and
/// one for transition counts per table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightConfig<T> {
    final_weights: [T; 4],
    transition_weights: [T; 4],
}

impl<T: Scalar> WeightConfig<T> {
    /// Both arrays are in [`Table::ALL`] order.
    pub fn new(final_weights: [T; 4], transition_weights: [T; 4]) -> Result<Self, FreqProbError> {
        if let Some(w) = final_weights.iter().chain(&transition_weights).find(|w| !w.is_finite() || **w < T::zero()) {
            return Err(FreqProbError::BadWeight(w.to_string()));
        }
        Ok(WeightConfig { final_weights, transition_weights })
    }

    pub fn uniform(weight: T) -> Result<Self, FreqProbError> {
        Self::new([weight; 4], [weight; 4])
    }

    /// 0/1 weights: bits 0..4 are the final weights, bits 4..8 the
    /// transition weights, each in [`Table::ALL`] order.
    pub fn from_bitmask(mask: u8) -> Self {
        let bit = |i: usize| if mask >> i & 1 == 1 { T::one() } else { T::zero() };
        WeightConfig { final_weights: [0, 1, 2, 3].map(bit), transition_weights: [4, 5, 6, 7].map(bit) }
    }

    /// Inverse of [`WeightConfig::from_bitmask`] for 0/1 weights.
    pub fn bitmask(&self) -> Option<u8> {
        let mut mask = 0u8;
        for (i, &w) in self.final_weights.iter().chain(&self.transition_weights).enumerate() {
            if w == T::one() {
                mask |= 1 << i;
            } else if w != T::zero() {
                return None;
            }
        }
        Some(mask)
    }

    /// All 256 assignments over {0, 1}, in bitmask order.
    pub fn grid() -> impl Iterator<Item = Self> {
        (0..=255u8).map(Self::from_bitmask)
    }

    pub fn final_weight(&self, table: Table) -> T {
        self.final_weights[table.index()]
    }

    pub fn transition_weight(&self, table: Table) -> T {
        self.transition_weights[table.index()]
    }
}

/// Path counts per state and per transition for each [`Table`].
/// Transition counts follow the order of [`Nfa3::transitions`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyTables {
    states: [Vec<u128>; 4],
    transitions: [Vec<u128>; 4],
}

impl FrequencyTables {
    /// Number of distinct paths counted by `table` that end at `q`.
    pub fn state(&self, table: Table, q: State) -> u128 {
        self.states[table.index()][q]
    }

    /// Occurrences of transition `index` along the paths counted by `table`.
    pub fn transition(&self, table: Table, index: usize) -> u128 {
        self.transitions[table.index()][index]
    }
}

/// Counts the physical paths of every sample word in `nfa`. Words using
/// characters outside the automaton's alphabet have no path. Counts
/// saturate at `u128::MAX`.
pub fn compute_frequencies(nfa: &Nfa3, sample: &Sample) -> FrequencyTables {
    let k = nfa.k();
    let m = nfa.transitions().len();
    let mut tables = FrequencyTables {
        states: std::array::from_fn(|_| vec![0; k]),
        transitions: std::array::from_fn(|_| vec![0; m]),
    };
    for (label, word) in sample.labelled() {
        let Some(word) = nfa.alphabet().translate(word, sample.alphabet()) else {
            continue;
        };
        let forward = forward_counts(nfa, &word);
        for table in Table::tables_of(label) {
            let backward = backward_counts(nfa, &word, table);
            let n = word.len();
            for q in 0..k {
                if table.counts_end(nfa.sort(q)) {
                    let slot = &mut tables.states[table.index()][q];
                    *slot = slot.saturating_add(forward[n][q]);
                }
            }
            for (t, &s) in word.iter().enumerate() {
                for q in (0..k).filter(|&q| forward[t][q] > 0) {
                    for &(to, idx) in nfa.successors(q, s) {
                        let through = forward[t][q].saturating_mul(backward[t + 1][to]);
                        let slot = &mut tables.transitions[table.index()][idx];
                        *slot = slot.saturating_add(through);
                    }
                }
            }
        }
    }
    tables
}

/// `out[t][q]`: paths reading `word[..t]` from the initial state to `q`.
fn forward_counts(nfa: &Nfa3, word: &[Symbol]) -> Vec<Vec<u128>> {
    let mut layers = vec![vec![0u128; nfa.k()]; word.len() + 1];
    layers[0][0] = 1;
    for (t, &s) in word.iter().enumerate() {
        for q in 0..nfa.k() {
            let count = layers[t][q];
            if count == 0 {
                continue;
            }
            for &(to, _) in nfa.successors(q, s) {
                layers[t + 1][to] = layers[t + 1][to].saturating_add(count);
            }
        }
    }
    layers
}

/// `out[t][q]`: paths reading `word[t..]` from `q` into a state counted by `table`.
fn backward_counts(nfa: &Nfa3, word: &[Symbol], table: Table) -> Vec<Vec<u128>> {
    let n = word.len();
    let mut layers = vec![vec![0u128; nfa.k()]; n + 1];
    for q in 0..nfa.k() {
        layers[n][q] = u128::from(table.counts_end(nfa.sort(q)));
    }
    for t in (0..n).rev() {
        for q in 0..nfa.k() {
            layers[t][q] = nfa
                .successors(q, word[t])
                .iter()
                .fold(0u128, |acc, &(to, _)| acc.saturating_add(layers[t + 1][to]));
        }
    }
    layers
}

/// A 3-sort automaton annotated with weighted path counts.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedFrequencyNfa<T> {
    nfa: Nfa3,
    weights: WeightConfig<T>,
    tables: FrequencyTables,
    omega_final: [Vec<T>; 2],
    omega_transition: [Vec<T>; 2],
}

impl<T: Scalar> WeightedFrequencyNfa<T> {
    pub fn nfa(&self) -> &Nfa3 {
        &self.nfa
    }

    pub fn weights(&self) -> &WeightConfig<T> {
        &self.weights
    }

    pub fn tables(&self) -> &FrequencyTables {
        &self.tables
    }

    pub fn omega_final(&self, label: Label, q: State) -> T {
        self.omega_final[polarity(label)][q]
    }

    pub fn omega_transition(&self, label: Label, index: usize) -> T {
        self.omega_transition[polarity(label)][index]
    }
}

fn weighted<T: Scalar>(weight: T, count: u128) -> T {
    if weight.is_zero() {
        T::zero()
    } else {
        weight * T::from_count(count)
    }
}

pub fn build_wffa<T: Scalar>(nfa: &Nfa3, sample: &Sample, weights: WeightConfig<T>) -> WeightedFrequencyNfa<T> {
    weighted_from_tables(nfa, compute_frequencies(nfa, sample), weights)
}

/// Weights precomputed tables; lets a weight grid reuse one counting pass.
pub fn weighted_from_tables<T: Scalar>(nfa: &Nfa3, tables: FrequencyTables, weights: WeightConfig<T>) -> WeightedFrequencyNfa<T> {
    let omega_final = [Label::Positive, Label::Negative].map(|label| {
        let [own, open] = Table::tables_of(label);
        (0..nfa.k())
            .map(|q| match nfa.sort(q) {
                StateSort::Whatever => weighted(weights.final_weight(open), tables.state(open, q)),
                sort if own.counts_end(sort) => weighted(weights.final_weight(own), tables.state(own, q)),
                _ => T::zero(),
            })
            .collect()
    });
    let omega_transition = [Label::Positive, Label::Negative].map(|label| {
        let [own, open] = Table::tables_of(label);
        (0..nfa.transitions().len())
            .map(|i| {
                weighted(weights.transition_weight(own), tables.transition(own, i))
                    + weighted(weights.transition_weight(open), tables.transition(open, i))
            })
            .collect()
    });
    WeightedFrequencyNfa { nfa: nfa.clone(), weights, tables, omega_final, omega_transition }
}

/// A 3-sort automaton with stop and transition probabilities per polarity.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilisticNfa<T> {
    nfa: Nfa3,
    gamma_final: [Vec<T>; 2],
    gamma_transition: [Vec<T>; 2],
}

/// A state whose outgoing probabilities neither vanish nor sum to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationViolation<T> {
    pub label: Label,
    pub state: State,
    pub total: T,
}

impl<T: Scalar> ProbabilisticNfa<T> {
    /// All probabilities zero.
    pub fn zeroed(nfa: Nfa3) -> Self {
        let k = nfa.k();
        let m = nfa.transitions().len();
        ProbabilisticNfa {
            nfa,
            gamma_final: std::array::from_fn(|_| vec![T::zero(); k]),
            gamma_transition: std::array::from_fn(|_| vec![T::zero(); m]),
        }
    }

    pub fn nfa(&self) -> &Nfa3 {
        &self.nfa
    }

    fn check(value: T) -> Result<T, FreqProbError> {
        if value >= T::zero() && value <= T::one() {
            Ok(value)
        } else {
            Err(FreqProbError::BadProbability(value.to_string()))
        }
    }

    pub fn set_final(&mut self, label: Label, q: State, value: T) -> Result<(), FreqProbError> {
        if q >= self.nfa.k() {
            return Err(AutomatonError::StateOutOfRange(q).into());
        }
        self.gamma_final[polarity(label)][q] = Self::check(value)?;
        Ok(())
    }

    pub fn set_transition(&mut self, label: Label, t: &Transition, value: T) -> Result<(), FreqProbError> {
        let idx = self.nfa.transition_index(t).ok_or(FreqProbError::UnknownTransition(*t))?;
        self.gamma_transition[polarity(label)][idx] = Self::check(value)?;
        Ok(())
    }

    pub fn final_probability(&self, label: Label, q: State) -> T {
        self.gamma_final[polarity(label)][q]
    }

    /// Probability of the transition at `index` in [`Nfa3::transitions`].
    pub fn transition_probability(&self, label: Label, index: usize) -> T {
        self.gamma_transition[polarity(label)][index]
    }

    /// Stop probability plus outgoing transition probabilities of every state.
    pub fn outgoing_mass(&self, label: Label) -> Vec<T> {
        let p = polarity(label);
        let mut mass = self.gamma_final[p].clone();
        for (t, &g) in self.nfa.transitions().iter().zip(&self.gamma_transition[p]) {
            mass[t.from] += g;
        }
        mass
    }

    /// States whose outgoing mass is neither zero nor within `tolerance` of one.
    pub fn normalization_violations(&self, tolerance: T) -> Vec<NormalizationViolation<T>> {
        let mut out = Vec::new();
        for label in [Label::Positive, Label::Negative] {
            for (state, total) in self.outgoing_mass(label).into_iter().enumerate() {
                if !total.is_zero() && (total - T::one()).abs() > tolerance {
                    out.push(NormalizationViolation { label, state, total });
                }
            }
        }
        out
    }

    /// The automaton text followed by `pfinal+ q v`, `pfinal- q v`,
    /// `ptrans+ i s j v` and `ptrans- i s j v` lines for every state and
    /// transition, values with 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let nfa = &self.nfa;
        write_structure(&mut out, nfa.k(), nfa.alphabet(), Some((nfa.accepting(), nfa.rejecting())), nfa.transitions());
        for label in [Label::Positive, Label::Negative] {
            for q in 0..nfa.k() {
                writeln!(out, "pfinal{} {} {:.16e}", label.sign(), q + 1, self.final_probability(label, q)).unwrap();
            }
        }
        for label in [Label::Positive, Label::Negative] {
            for (i, t) in nfa.transitions().iter().enumerate() {
                let c = nfa.alphabet().char_of(t.symbol);
                let v = self.transition_probability(label, i);
                writeln!(out, "ptrans{} {} {} {} {:.16e}", label.sign(), t.from + 1, c, t.to + 1, v).unwrap();
            }
        }
        out
    }

    /// Parses [`ProbabilisticNfa::to_text`] output; unlisted probabilities are zero.
    pub fn parse(text: &str) -> Result<Self, FreqProbError> {
        let mut doc = TextDocument::parse(text)?;
        let extra = std::mem::take(&mut doc.extra);
        let nfa = Nfa3::new(
            doc.k,
            doc.alphabet.clone(),
            doc.accepting.iter().copied(),
            doc.rejecting.iter().copied(),
            doc.transitions.iter().copied(),
        )?;
        let mut pnfa = ProbabilisticNfa::zeroed(nfa);
        let mut seen = HashSet::new();
        for (line, fields) in extra {
            let value = |s: &str| s.parse::<T>().map_err(|_| format_error(line, format!("bad probability `{s}`")));
            let (key, v) = match fields.as_slice() {
                [tag @ ("pfinal+" | "pfinal-"), q, v] => {
                    let label = if tag.ends_with('+') { Label::Positive } else { Label::Negative };
                    let q = doc.state(q, line)?;
                    pnfa.set_final(label, q, value(v)?).map_err(|e| line_error(line, e))?;
                    ((label, None), q)
                }
                [tag @ ("ptrans+" | "ptrans-"), from, s, to, v] => {
                    let label = if tag.ends_with('+') { Label::Positive } else { Label::Negative };
                    let t = doc.transition(from, s, to, line)?;
                    pnfa.set_transition(label, &t, value(v)?).map_err(|e| line_error(line, e))?;
                    ((label, Some(t)), 0)
                }
                _ => return Err(format_error(line, "unexpected line").into()),
            };
            if !seen.insert((key, v)) {
                return Err(format_error(line, "duplicate probability").into());
            }
        }
        Ok(pnfa)
    }
}

fn line_error(line: usize, e: FreqProbError) -> FreqProbError {
    format_error(line, e.to_string()).into()
}

/// Normalises weighted counts into per-state distributions. A state with no
/// weighted mass in a polarity gets all-zero probabilities there.
pub fn to_probabilistic<T: Scalar>(wffa: &WeightedFrequencyNfa<T>) -> ProbabilisticNfa<T> {
    let nfa = wffa.nfa();
    let mut pnfa = ProbabilisticNfa::zeroed(nfa.clone());
    for label in [Label::Positive, Label::Negative] {
        let p = polarity(label);
        let mut denominator = wffa.omega_final[p].clone();
        for (t, &w) in nfa.transitions().iter().zip(&wffa.omega_transition[p]) {
            denominator[t.from] += w;
        }
        for q in 0..nfa.k() {
            if denominator[q] > T::zero() {
                pnfa.gamma_final[p][q] = wffa.omega_final[p][q] / denominator[q];
            }
        }
        for (i, t) in nfa.transitions().iter().enumerate() {
            if denominator[t.from] > T::zero() {
                pnfa.gamma_transition[p][i] = wffa.omega_transition[p][i] / denominator[t.from];
            }
        }
    }
    pnfa
}
