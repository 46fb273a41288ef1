//! Reading automata back from satisfying assignments.

use std::collections::BTreeSet;

use crate::automaton::{Nfa3, State, Symbol, Transition};
use crate::encoding::{EncodingArtifacts, ModelKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecodeError {
    #[error("assignment has {got} variables, encoding needs {needed}")]
    ModelTooShort { got: usize, needed: usize },
    #[error("inconsistent model: {0}")]
    InconsistentModel(String),
}

/// Possible final states of the k internal states of a (k+2) solution.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PossibleFinals {
    pub accepting: BTreeSet<State>,
    pub rejecting: BTreeSet<State>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodedAutomaton {
    /// The encoded automaton; `k + 2` states in the (k+2) layout, with
    /// `F+ = {q_{k+1}}` and `F- = {q_{k+2}}`.
    pub nfa: Nfa3,
    /// Present for (k+2) solutions.
    pub possible: Option<PossibleFinals>,
}

/// Reads transitions and final states from `model` (indexed by variable - 1)
/// and checks the structural invariants of the layout.
pub fn decode_nfa(model: &[bool], artifacts: &EncodingArtifacts) -> Result<DecodedAutomaton, DecodeError> {
    let vars = &artifacts.varmap;
    if model.len() < vars.len() {
        return Err(DecodeError::ModelTooShort { got: model.len(), needed: vars.len() });
    }
    if !artifacts.formula.eval(model) {
        return Err(DecodeError::InconsistentModel("assignment violates the encoded formula".into()));
    }
    let value = |v: trisort_sat::Var| model[v.index()];
    let k = artifacts.k;
    let n = vars.total_states();
    let mut transitions = Vec::new();
    for s in 0..vars.symbols() as Symbol {
        for i in 0..n {
            for j in 0..n {
                if value(vars.delta(s, i, j)) {
                    transitions.push(Transition::new(i, s, j));
                }
            }
        }
    }
    let alphabet = artifacts.alphabet.clone();
    let inconsistent = |msg: String| DecodeError::InconsistentModel(msg);
    match artifacts.kind {
        ModelKind::K => {
            let accepting: Vec<State> = (0..k).filter(|&i| value(vars.accept(i).unwrap())).collect();
            let rejecting: Vec<State> = (0..k).filter(|&i| value(vars.reject(i).unwrap())).collect();
            let nfa = Nfa3::new(k, alphabet, accepting, rejecting, transitions)
                .map_err(|e| inconsistent(e.to_string()))?;
            Ok(DecodedAutomaton { nfa, possible: None })
        }
        ModelKind::KPlus2 => {
            let (acc, rej) = (k, k + 1);
            if let Some(t) = transitions.iter().find(|t| t.from >= k) {
                return Err(inconsistent(format!("transition leaves final state q{}", t.from + 1)));
            }
            for t in transitions.iter().filter(|t| t.to >= k) {
                let duplicated = (0..k).any(|j| value(vars.delta(t.symbol, t.from, j)));
                if !duplicated {
                    return Err(inconsistent(format!(
                        "transition q{} -> q{} has no internal copy",
                        t.from + 1,
                        t.to + 1
                    )));
                }
            }
            let accepting: BTreeSet<State> =
                (0..k).filter(|&i| value(vars.accept_possible(i).unwrap())).collect();
            let rejecting: BTreeSet<State> =
                (0..k).filter(|&i| value(vars.reject_possible(i).unwrap())).collect();
            if let Some(q) = accepting.intersection(&rejecting).next() {
                return Err(inconsistent(format!("q{} is both possible accepting and rejecting", q + 1)));
            }
            let nfa = Nfa3::new(k + 2, alphabet, [acc], [rej], transitions).map_err(|e| inconsistent(e.to_string()))?;
            Ok(DecodedAutomaton { nfa, possible: Some(PossibleFinals { accepting, rejecting }) })
        }
    }
}
