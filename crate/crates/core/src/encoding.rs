//! Propositional encodings of "some k-state 3-sort NFA is consistent with
//! the sample".
//!
//! Two layouts are provided. [`encode_core_k`] uses explicit final-state
//! variables `a_i`, `r_i` and joins prefix paths `q_1 → q_j` with suffix paths
//! `q_j → q_i`. [`encode_core_k2`] adds two fixed final states `q_{k+1}`
//! (accepting) and `q_{k+2}` (rejecting) so suffix paths only need a source
//! state, and records possible-final variables `a*_i`, `r*_i` from which a
//! k-state automaton is recovered.
//!
//! Paths for the empty word are never materialised: a λ prefix pins the join
//! state to `q_1`, a λ suffix makes the join state the end state.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use trisort_sat::{lower_with_census, Cnf, Constraint, Formula, Lit, Var};

use crate::automaton::{Alphabet, Sample, State, Symbol, Transition, Word};
use crate::splitting::Splitting;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EncodingError {
    #[error("sample has no words")]
    EmptySample,
    #[error("k must be at least 1")]
    ZeroStates,
    #[error("splitting does not list the sample words in sample order")]
    SplittingMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// k states with free final sorts.
    K,
    /// k internal states plus fixed accepting and rejecting finals.
    KPlus2,
}

/// Target of a suffix path in the (k+2) layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FinalTarget {
    Accept,
    Reject,
}

/// Meaning of one propositional variable. States are 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SemVar {
    Accept(State),
    Reject(State),
    AcceptPossible(State),
    RejectPossible(State),
    Transition(Transition),
    PrefixPath { prefix: Word, to: State },
    SuffixPath { suffix: Word, from: State, to: State },
    SuffixToFinal { suffix: Word, from: State, target: FinalTarget },
    WordPath { word: Word, to: State },
    /// Some symbol labels `from → to`, for `from < to`.
    Edge { from: State, to: State },
    /// `parent` is the smallest state with an edge into `child`.
    Parent { child: State, parent: State },
}

impl SemVar {
    /// Variable family used by the census.
    pub fn family(&self) -> &'static str {
        match self {
            SemVar::Accept(_) => "accept",
            SemVar::Reject(_) => "reject",
            SemVar::AcceptPossible(_) => "possible-accept",
            SemVar::RejectPossible(_) => "possible-reject",
            SemVar::Transition(_) => "transition",
            SemVar::PrefixPath { .. } => "prefix-path",
            SemVar::SuffixPath { .. } => "suffix-path",
            SemVar::SuffixToFinal { target: FinalTarget::Accept, .. } => "suffix-path-accept",
            SemVar::SuffixToFinal { target: FinalTarget::Reject, .. } => "suffix-path-reject",
            SemVar::WordPath { .. } => "word-path",
            SemVar::Edge { .. } => "edge",
            SemVar::Parent { .. } => "parent",
        }
    }
}

impl fmt::Display for SemVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let word = |w: &Word| w.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(".");
        match self {
            SemVar::Accept(i) => write!(f, "a_{}", i + 1),
            SemVar::Reject(i) => write!(f, "r_{}", i + 1),
            SemVar::AcceptPossible(i) => write!(f, "a*_{}", i + 1),
            SemVar::RejectPossible(i) => write!(f, "r*_{}", i + 1),
            SemVar::Transition(t) => write!(f, "d_{},{},{}", t.symbol, t.from + 1, t.to + 1),
            SemVar::PrefixPath { prefix, to } => write!(f, "p[{}]_1,{}", word(prefix), to + 1),
            SemVar::SuffixPath { suffix, from, to } => write!(f, "p[{}]_{},{}", word(suffix), from + 1, to + 1),
            SemVar::SuffixToFinal { suffix, from, target } => {
                write!(f, "p[{}]_{},{:?}", word(suffix), from + 1, target)
            }
            SemVar::WordPath { word: w, to } => write!(f, "w[{}]_1,{}", word(w), to + 1),
            SemVar::Edge { from, to } => write!(f, "e_{},{}", from + 1, to + 1),
            SemVar::Parent { child, parent } => write!(f, "pi_{},{}", child + 1, parent + 1),
        }
    }
}

/// Bijection between semantic variables and dense variable ids.
#[derive(Debug, Clone)]
pub struct VarMap {
    kind: ModelKind,
    k: usize,
    symbols: usize,
    semantics: Vec<SemVar>,
    accept: Vec<Var>,
    reject: Vec<Var>,
    accept_possible: Vec<Var>,
    reject_possible: Vec<Var>,
    /// Indexed `(symbol * n + from) * n + to` with `n` total states.
    delta: Vec<Var>,
}

impl VarMap {
    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// States of the encoded automaton: `k`, or `k + 2`.
    pub fn total_states(&self) -> usize {
        match self.kind {
            ModelKind::K => self.k,
            ModelKind::KPlus2 => self.k + 2,
        }
    }

    pub fn symbols(&self) -> usize {
        self.symbols
    }

    pub fn len(&self) -> usize {
        self.semantics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.semantics.is_empty()
    }

    pub fn meaning(&self, var: Var) -> Option<&SemVar> {
        self.semantics.get(var.index())
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, &SemVar)> + '_ {
        self.semantics.iter().enumerate().map(|(i, s)| (Var::new(i as u32 + 1), s))
    }

    pub fn delta(&self, symbol: Symbol, from: State, to: State) -> Var {
        let n = self.total_states();
        self.delta[(symbol as usize * n + from) * n + to]
    }

    pub fn accept(&self, i: State) -> Option<Var> {
        self.accept.get(i).copied()
    }

    pub fn reject(&self, i: State) -> Option<Var> {
        self.reject.get(i).copied()
    }

    pub fn accept_possible(&self, i: State) -> Option<Var> {
        self.accept_possible.get(i).copied()
    }

    pub fn reject_possible(&self, i: State) -> Option<Var> {
        self.reject_possible.get(i).copied()
    }

    /// Variable count per family.
    pub fn family_counts(&self) -> BTreeMap<&'static str, usize> {
        let mut out = BTreeMap::new();
        for s in &self.semantics {
            *out.entry(s.family()).or_insert(0) += 1;
        }
        out
    }
}

/// Everything an encoding produced.
#[derive(Debug, Clone)]
pub struct EncodingArtifacts {
    pub formula: Formula,
    pub varmap: VarMap,
    pub kind: ModelKind,
    pub k: usize,
    pub alphabet: Alphabet,
    /// The splitting actually encoded. In the (k+2) layout, words split with
    /// an empty suffix have their last symbol moved to the suffix.
    pub splitting: Splitting,
}

impl EncodingArtifacts {
    pub fn to_cnf(&self) -> Cnf {
        trisort_sat::lower_to_cnf(&self.formula)
    }

    /// Restricts the internal states to breadth-first order: every
    /// non-initial state is either unreachable, together with all states
    /// after it, or has a smaller parent, and parents never decrease.
    ///
    /// Any solution can be brought into this form by dropping the edges
    /// of unreachable states and renumbering the rest breadth-first from
    /// the initial state, so satisfiability is unchanged.
    pub fn break_symmetries(&mut self) {
        let k = self.k;
        let mut edges = vec![Vec::new(); k];
        let mut parents = vec![Vec::new(); k];
        for j in 1..k {
            for i in 0..j {
                let e = self.new_var(SemVar::Edge { from: i, to: j });
                let terms = (0..self.varmap.symbols)
                    .map(|s| vec![self.varmap.delta(s as Symbol, i, j).pos()])
                    .collect();
                self.formula.iff(family::EDGE, e.pos(), terms);
                edges[j].push(e);
            }
            for i in 0..j {
                let p = self.new_var(SemVar::Parent { child: j, parent: i });
                let mut term = vec![edges[j][i].pos()];
                term.extend(edges[j][..i].iter().map(|e| e.neg()));
                self.formula.iff(family::PARENT, p.pos(), vec![term]);
                parents[j].push(p);
            }
        }
        for j in 1..k.saturating_sub(1) {
            // Unreachable states come last.
            for e in &edges[j + 1] {
                let mut clause = vec![e.neg()];
                clause.extend(edges[j].iter().map(|e| e.pos()));
                self.formula.clause(family::REACHABLE_PREFIX, clause);
            }
            for i in 1..j {
                for i2 in 0..i {
                    self.formula.clause(family::PARENT_ORDER, vec![parents[j][i].neg(), parents[j + 1][i2].neg()]);
                }
            }
        }
    }

    fn new_var(&mut self, meaning: SemVar) -> Var {
        let v = self.formula.new_var();
        self.varmap.semantics.push(meaning);
        v
    }
}

/// A path existence fact that may be constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PathRef {
    False,
    True,
    Lit(Lit),
}

/// Conjunction of path facts and literals; `None` when some part is false.
fn conj(paths: &[PathRef], lits: &[Lit]) -> Option<Vec<Lit>> {
    let mut out = Vec::with_capacity(paths.len() + lits.len());
    for p in paths {
        match p {
            PathRef::False => return None,
            PathRef::True => {}
            PathRef::Lit(l) => out.push(*l),
        }
    }
    out.extend_from_slice(lits);
    Some(out)
}

mod family {
    pub const FINAL_EXCLUSIVE: &str = "final-exclusive";
    pub const POSITIVE_ACCEPTED: &str = "positive-accepted";
    pub const POSITIVE_NOT_REJECTED: &str = "positive-not-rejected";
    pub const NEGATIVE_REJECTED: &str = "negative-rejected";
    pub const NEGATIVE_NOT_ACCEPTED: &str = "negative-not-accepted";
    pub const WORD_PATH_JOIN: &str = "word-path-join";
    pub const PREFIX_BASE: &str = "prefix-path-base";
    pub const PREFIX_STEP: &str = "prefix-path-step";
    pub const SUFFIX_BASE: &str = "suffix-path-base";
    pub const SUFFIX_STEP: &str = "suffix-path-step";
    pub const SUFFIX_ACCEPT_BASE: &str = "suffix-accept-base";
    pub const SUFFIX_ACCEPT_STEP: &str = "suffix-accept-step";
    pub const SUFFIX_REJECT_BASE: &str = "suffix-reject-base";
    pub const SUFFIX_REJECT_STEP: &str = "suffix-reject-step";
    pub const POSITIVE_REACHES_ACCEPT: &str = "positive-reaches-accept";
    pub const POSITIVE_AVOIDS_REJECT: &str = "positive-avoids-reject";
    pub const NEGATIVE_REACHES_REJECT: &str = "negative-reaches-reject";
    pub const NEGATIVE_AVOIDS_ACCEPT: &str = "negative-avoids-accept";
    pub const FINALS_NO_OUTGOING: &str = "finals-no-outgoing";
    pub const ACCEPT_ENTRY_DUPLICATED: &str = "accept-entry-duplicated";
    pub const REJECT_ENTRY_DUPLICATED: &str = "reject-entry-duplicated";
    pub const WORD_PATH_INTERNAL: &str = "word-path-internal";
    pub const POSSIBLE_ACCEPT_EXCLUDES_NEGATIVES: &str = "possible-accept-excludes-negatives";
    pub const POSSIBLE_REJECT_EXCLUDES_POSITIVES: &str = "possible-reject-excludes-positives";
    pub const POSSIBLE_ACCEPT_WITNESS: &str = "possible-accept-witness";
    pub const POSSIBLE_REJECT_WITNESS: &str = "possible-reject-witness";
    pub const POSITIVE_ENDS_POSSIBLE_ACCEPT: &str = "positive-ends-possible-accept";
    pub const NEGATIVE_ENDS_POSSIBLE_REJECT: &str = "negative-ends-possible-reject";
    pub const POSSIBLE_FINAL_EXCLUSIVE: &str = "possible-final-exclusive";
    pub const EDGE: &str = "edge";
    pub const PARENT: &str = "parent";
    pub const REACHABLE_PREFIX: &str = "reachable-prefix";
    pub const PARENT_ORDER: &str = "parent-order";
}

struct Builder {
    formula: Formula,
    vars: VarMap,
    /// Path variables of each prefix, per internal end state.
    prefixes: HashMap<Vec<Symbol>, Vec<Var>>,
    /// Internal suffix paths, `[from * k + to]`.
    suffixes: HashMap<Vec<Symbol>, Vec<Var>>,
    /// Suffix paths into a fixed final, per source state.
    to_final: HashMap<(Word, FinalTarget), Vec<Var>>,
}

impl Builder {
    fn new(kind: ModelKind, k: usize, symbols: usize) -> Builder {
        let vars = VarMap {
            kind,
            k,
            symbols,
            semantics: Vec::new(),
            accept: Vec::new(),
            reject: Vec::new(),
            accept_possible: Vec::new(),
            reject_possible: Vec::new(),
            delta: Vec::new(),
        };
        let mut b = Builder {
            formula: Formula::new(),
            vars,
            prefixes: HashMap::new(),
            suffixes: HashMap::new(),
            to_final: HashMap::new(),
        };
        let n = b.vars.total_states();
        for s in 0..symbols {
            for i in 0..n {
                for j in 0..n {
                    let v = b.var(SemVar::Transition(Transition::new(i, s as Symbol, j)));
                    b.vars.delta.push(v);
                }
            }
        }
        b
    }

    fn var(&mut self, meaning: SemVar) -> Var {
        let v = self.formula.new_var();
        self.vars.semantics.push(meaning);
        v
    }

    fn delta(&self, s: Symbol, i: State, j: State) -> Lit {
        self.vars.delta(s, i, j).pos()
    }

    fn k(&self) -> usize {
        self.vars.k
    }

    /// Path variables `q_1 → q_i` for `prefix` and, recursively, its prefixes.
    fn prefix_path(&mut self, prefix: &[Symbol]) -> Vec<Var> {
        if let Some(vars) = self.prefixes.get(prefix) {
            return vars.clone();
        }
        let k = self.k();
        let (&s, head) = prefix.split_last().expect("prefix paths exist only for non-empty prefixes");
        let prior = if head.is_empty() { None } else { Some(self.prefix_path(head)) };
        let mut vars = Vec::with_capacity(k);
        for i in 0..k {
            let v = self.var(SemVar::PrefixPath { prefix: Word::from(prefix), to: i });
            match &prior {
                None => self.formula.iff(family::PREFIX_BASE, v.pos(), vec![vec![self.delta(s, 0, i)]]),
                Some(prior) => {
                    let terms = (0..k).map(|j| vec![prior[j].pos(), self.delta(s, j, i)]).collect();
                    self.formula.iff(family::PREFIX_STEP, v.pos(), terms);
                }
            }
            vars.push(v);
        }
        self.prefixes.insert(prefix.to_vec(), vars.clone());
        vars
    }

    /// Internal path variables `q_i → q_j` for `suffix` and its suffixes.
    fn suffix_path(&mut self, suffix: &[Symbol]) -> Vec<Var> {
        if let Some(vars) = self.suffixes.get(suffix) {
            return vars.clone();
        }
        let k = self.k();
        let (&s, tail) = suffix.split_first().expect("suffix paths exist only for non-empty suffixes");
        let rest = if tail.is_empty() { None } else { Some(self.suffix_path(tail)) };
        let mut vars = Vec::with_capacity(k * k);
        for i in 0..k {
            for j in 0..k {
                let v = self.var(SemVar::SuffixPath { suffix: Word::from(suffix), from: i, to: j });
                match &rest {
                    None => self.formula.iff(family::SUFFIX_BASE, v.pos(), vec![vec![self.delta(s, i, j)]]),
                    Some(rest) => {
                        let terms = (0..k).map(|l| vec![self.delta(s, i, l), rest[l * k + j].pos()]).collect();
                        self.formula.iff(family::SUFFIX_STEP, v.pos(), terms);
                    }
                }
                vars.push(v);
            }
        }
        self.suffixes.insert(suffix.to_vec(), vars.clone());
        vars
    }

    /// Path variables `q_i → final` for `suffix` in the (k+2) layout.
    fn suffix_to_final(&mut self, suffix: &[Symbol], target: FinalTarget) -> Vec<Var> {
        let key = (Word::from(suffix), target);
        if let Some(vars) = self.to_final.get(&key) {
            return vars.clone();
        }
        let k = self.k();
        let final_state = match target {
            FinalTarget::Accept => k,
            FinalTarget::Reject => k + 1,
        };
        let (base, step) = match target {
            FinalTarget::Accept => (family::SUFFIX_ACCEPT_BASE, family::SUFFIX_ACCEPT_STEP),
            FinalTarget::Reject => (family::SUFFIX_REJECT_BASE, family::SUFFIX_REJECT_STEP),
        };
        let (&s, tail) = suffix.split_first().expect("suffix paths exist only for non-empty suffixes");
        let rest = if tail.is_empty() { None } else { Some(self.suffix_to_final(tail, target)) };
        let mut vars = Vec::with_capacity(k);
        for i in 0..k {
            let v = self.var(SemVar::SuffixToFinal { suffix: Word::from(suffix), from: i, target });
            match &rest {
                None => self.formula.iff(base, v.pos(), vec![vec![self.delta(s, i, final_state)]]),
                Some(rest) => {
                    let terms = (0..k).map(|j| vec![self.delta(s, i, j), rest[j].pos()]).collect();
                    self.formula.iff(step, v.pos(), terms);
                }
            }
            vars.push(v);
        }
        self.to_final.insert(key, vars.clone());
        vars
    }

    /// Paths `q_1 → q_j` for a possibly empty prefix.
    fn prefix_refs(&mut self, prefix: &[Symbol]) -> Vec<PathRef> {
        if prefix.is_empty() {
            (0..self.k()).map(|j| if j == 0 { PathRef::True } else { PathRef::False }).collect()
        } else {
            self.prefix_path(prefix).into_iter().map(|v| PathRef::Lit(v.pos())).collect()
        }
    }

    fn finish(self, alphabet: &Alphabet, splitting: Splitting) -> EncodingArtifacts {
        let (kind, k) = (self.vars.kind, self.vars.k);
        EncodingArtifacts { formula: self.formula, varmap: self.vars, kind, k, alphabet: alphabet.clone(), splitting }
    }
}

fn check_inputs(sample: &Sample, splitting: &Splitting, k: usize) -> Result<(), EncodingError> {
    if sample.is_empty() {
        return Err(EncodingError::EmptySample);
    }
    if k == 0 {
        return Err(EncodingError::ZeroStates);
    }
    let same = splitting.len() == sample.len() && sample.labelled().zip(splitting.words()).all(|((_, a), b)| a == b);
    if !same {
        return Err(EncodingError::SplittingMismatch);
    }
    Ok(())
}

/// Encoding with explicit final-state variables over `k` states.
pub fn encode_core_k(sample: &Sample, splitting: &Splitting, k: usize) -> Result<EncodingArtifacts, EncodingError> {
    check_inputs(sample, splitting, k)?;
    let mut b = Builder::new(ModelKind::K, k, sample.alphabet().len());
    for i in 0..k {
        let a = b.var(SemVar::Accept(i));
        let r = b.var(SemVar::Reject(i));
        b.vars.accept.push(a);
        b.vars.reject.push(r);
        b.formula.clause(family::FINAL_EXCLUSIVE, vec![a.neg(), r.neg()]);
    }
    for (index, (label, word)) in sample.labelled().enumerate() {
        let (u, v) = splitting.pair(index);
        let ends: Vec<Lit> = if v.is_empty() {
            b.prefix_path(u).into_iter().map(Var::pos).collect()
        } else if u.is_empty() {
            let paths = b.suffix_path(v);
            paths[..k].iter().map(|v| v.pos()).collect()
        } else {
            let pre = b.prefix_path(u);
            let suf = b.suffix_path(v);
            (0..k)
                .map(|i| {
                    let w = b.var(SemVar::WordPath { word: word.clone(), to: i });
                    let terms = (0..k).map(|j| vec![pre[j].pos(), suf[j * k + i].pos()]).collect();
                    b.formula.iff(family::WORD_PATH_JOIN, w.pos(), terms);
                    w.pos()
                })
                .collect()
        };
        let (good, bad, reach, avoid) = match label {
            crate::automaton::Label::Positive => {
                (&b.vars.accept, &b.vars.reject, family::POSITIVE_ACCEPTED, family::POSITIVE_NOT_REJECTED)
            }
            crate::automaton::Label::Negative => {
                (&b.vars.reject, &b.vars.accept, family::NEGATIVE_REJECTED, family::NEGATIVE_NOT_ACCEPTED)
            }
        };
        let reach_terms: Vec<Vec<Lit>> = (0..k).map(|i| vec![ends[i], good[i].pos()]).collect();
        let avoid_clauses: Vec<Vec<Lit>> = (0..k).map(|i| vec![!ends[i], bad[i].neg()]).collect();
        b.formula.any_of(reach, reach_terms);
        for c in avoid_clauses {
            b.formula.clause(avoid, c);
        }
    }
    Ok(b.finish(sample.alphabet(), splitting.clone()))
}

/// Encoding over `k` internal states plus fixed finals `q_{k+1}` (accepting)
/// and `q_{k+2}` (rejecting), with possible-final variables for reduction.
pub fn encode_core_k2(sample: &Sample, splitting: &Splitting, k: usize) -> Result<EncodingArtifacts, EncodingError> {
    use crate::automaton::Label;

    check_inputs(sample, splitting, k)?;
    let symbols = sample.alphabet().len();
    let mut b = Builder::new(ModelKind::KPlus2, k, symbols);
    let (acc, rej) = (k, k + 1);
    for i in 0..k {
        let a = b.var(SemVar::AcceptPossible(i));
        let r = b.var(SemVar::RejectPossible(i));
        b.vars.accept_possible.push(a);
        b.vars.reject_possible.push(r);
        b.formula.clause(family::POSSIBLE_FINAL_EXCLUSIVE, vec![a.neg(), r.neg()]);
    }
    for s in 0..symbols as Symbol {
        for i in 0..k + 2 {
            let (from_acc, from_rej) = (b.delta(s, acc, i), b.delta(s, rej, i));
            b.formula.clause(family::FINALS_NO_OUTGOING, vec![!from_acc]);
            b.formula.clause(family::FINALS_NO_OUTGOING, vec![!from_rej]);
        }
        for i in 0..k {
            for (target, fam) in [(acc, family::ACCEPT_ENTRY_DUPLICATED), (rej, family::REJECT_ENTRY_DUPLICATED)] {
                let mut clause = vec![!b.delta(s, i, target)];
                clause.extend((0..k).map(|j| b.delta(s, i, j)));
                b.formula.clause(fam, clause);
            }
        }
    }

    let mut cuts = Vec::with_capacity(sample.len());
    let mut witnesses: [Vec<Vec<Vec<Lit>>>; 2] = [vec![Vec::new(); k], vec![Vec::new(); k]];
    for (index, (label, word)) in sample.labelled().enumerate() {
        let cut = splitting.cuts()[index].min(word.len() - 1);
        cuts.push(cut);
        let (u, v) = word.split_at(cut);
        let reach_acc = b.suffix_to_final(v, FinalTarget::Accept);
        let reach_rej = b.suffix_to_final(v, FinalTarget::Reject);
        let joins = b.prefix_refs(u);
        let (good, bad) = match label {
            Label::Positive => (&reach_acc, &reach_rej),
            Label::Negative => (&reach_rej, &reach_acc),
        };
        let (reach_family, avoid_family) = match label {
            Label::Positive => (family::POSITIVE_REACHES_ACCEPT, family::POSITIVE_AVOIDS_REJECT),
            Label::Negative => (family::NEGATIVE_REACHES_REJECT, family::NEGATIVE_AVOIDS_ACCEPT),
        };
        let reach_terms = (0..k).filter_map(|j| conj(&[joins[j]], &[good[j].pos()])).collect();
        b.formula.any_of(reach_family, reach_terms);
        for j in 0..k {
            if let Some(term) = conj(&[joins[j]], &[bad[j].pos()]) {
                b.formula.clause(avoid_family, term.into_iter().map(|l| !l).collect());
            }
        }

        // Internal end states of the whole word, through its last transition.
        let (&last, head) = word.split_last().expect("sample words are non-empty");
        let before = b.prefix_refs(head);
        let ends: Vec<Var> = (0..k)
            .map(|i| {
                let e = b.var(SemVar::WordPath { word: word.clone(), to: i });
                let terms = (0..k).filter_map(|j| conj(&[before[j]], &[b.delta(last, j, i)])).collect();
                b.formula.iff(family::WORD_PATH_INTERNAL, e.pos(), terms);
                e
            })
            .collect();
        let (own, other, own_final, excl_family, ends_family, slot) = match label {
            Label::Positive => (
                &b.vars.accept_possible,
                &b.vars.reject_possible,
                acc,
                family::POSSIBLE_REJECT_EXCLUDES_POSITIVES,
                family::POSITIVE_ENDS_POSSIBLE_ACCEPT,
                0,
            ),
            Label::Negative => (
                &b.vars.reject_possible,
                &b.vars.accept_possible,
                rej,
                family::POSSIBLE_ACCEPT_EXCLUDES_NEGATIVES,
                family::NEGATIVE_ENDS_POSSIBLE_REJECT,
                1,
            ),
        };
        let exclusions: Vec<Vec<Lit>> = (0..k).map(|i| vec![other[i].neg(), ends[i].neg()]).collect();
        let ending: Vec<Vec<Lit>> = (0..k).map(|i| vec![ends[i].pos(), own[i].pos()]).collect();
        for c in exclusions {
            b.formula.clause(excl_family, c);
        }
        b.formula.any_of(ends_family, ending);
        for (i, bucket) in witnesses[slot].iter_mut().enumerate() {
            for (j, &path) in before.iter().enumerate() {
                if let Some(term) = conj(&[path], &[b.vars.delta(last, j, i).pos(), b.vars.delta(last, j, own_final).pos()]) {
                    bucket.push(term);
                }
            }
        }
    }
    let [pos_witness, neg_witness] = witnesses;
    for (i, terms) in pos_witness.into_iter().enumerate() {
        let mut all = vec![vec![b.vars.accept_possible[i].neg()]];
        all.extend(terms);
        b.formula.push(family::POSSIBLE_ACCEPT_WITNESS, Constraint::AnyOf(all));
    }
    for (i, terms) in neg_witness.into_iter().enumerate() {
        let mut all = vec![vec![b.vars.reject_possible[i].neg()]];
        all.extend(terms);
        b.formula.push(family::POSSIBLE_REJECT_WITNESS, Constraint::AnyOf(all));
    }
    let used = Splitting::new(splitting.words().to_vec(), cuts);
    Ok(b.finish(sample.alphabet(), used))
}

/// Sizes of an encoding, per variable family and per constraint family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Census {
    /// Encoder variables per family.
    pub variables: BTreeMap<&'static str, usize>,
    /// `(clauses, auxiliary variables)` produced per constraint family.
    pub constraints: BTreeMap<&'static str, (usize, usize)>,
    pub total_variables: usize,
    pub total_clauses: usize,
}

impl Census {
    /// Tab-separated table: `kind family clauses variables`.
    pub fn to_table(&self) -> String {
        let mut out = String::from("kind\tfamily\tclauses\tvariables\n");
        for (name, count) in &self.variables {
            out.push_str(&format!("variables\t{name}\t0\t{count}\n"));
        }
        for (name, (clauses, aux)) in &self.constraints {
            out.push_str(&format!("constraint\t{name}\t{clauses}\t{aux}\n"));
        }
        out.push_str(&format!("total\t-\t{}\t{}\n", self.total_clauses, self.total_variables));
        out
    }
}

/// Lowers the encoding and reports its size by family.
pub fn constraint_census(artifacts: &EncodingArtifacts) -> Census {
    let (cnf, lowered) = lower_with_census(&artifacts.formula);
    Census {
        variables: artifacts.varmap.family_counts(),
        constraints: lowered,
        total_variables: cnf.num_vars(),
        total_clauses: cnf.clauses().len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::splitting::{split_all_prefix, split_all_suffix};
    use trisort_sat::{solve, Backend, SolveStatus};

    fn sat(artifacts: &EncodingArtifacts) -> bool {
        let outcome = solve(&artifacts.to_cnf(), std::time::Duration::from_secs(10), &Backend::Internal).unwrap();
        match outcome.status {
            SolveStatus::Sat(model) => {
                assert!(artifacts.formula.eval(&model));
                true
            }
            SolveStatus::Unsat => false,
            SolveStatus::Timeout => panic!("timeout"),
        }
    }

    #[test]
    fn single_positive_letter() {
        let s = Sample::from_strs(&["a"], &[]).unwrap();
        let enc = encode_core_k(&s, &split_all_prefix(&s), 1).unwrap();
        assert!(sat(&enc));
        let enc = encode_core_k2(&s, &split_all_prefix(&s), 1).unwrap();
        assert!(sat(&enc));
    }

    #[test]
    fn contradictory_sample_is_unsat() {
        let alphabet = crate::automaton::Alphabet::new(['a']).unwrap();
        let a = alphabet.encode("a").unwrap();
        let s = Sample::new_overlapping(alphabet, vec![a.clone()], vec![a]).unwrap();
        for k in 1..=3 {
            assert!(!sat(&encode_core_k(&s, &split_all_prefix(&s), k).unwrap()));
            assert!(!sat(&encode_core_k(&s, &split_all_suffix(&s), k).unwrap()));
            assert!(!sat(&encode_core_k2(&s, &split_all_prefix(&s), k).unwrap()));
        }
    }

    #[test]
    fn letter_pair_needs_two_states() {
        let s = Sample::from_strs(&["a"], &["b"]).unwrap();
        for (k, expected) in [(1, false), (2, true)] {
            assert_eq!(sat(&encode_core_k(&s, &split_all_prefix(&s), k).unwrap()), expected);
            assert_eq!(sat(&encode_core_k(&s, &split_all_suffix(&s), k).unwrap()), expected);
            assert_eq!(sat(&encode_core_k2(&s, &split_all_prefix(&s), k).unwrap()), expected);
            assert_eq!(sat(&encode_core_k2(&s, &split_all_suffix(&s), k).unwrap()), expected);
        }
    }

    #[test]
    fn census_counts_prefix_and_suffix_paths() {
        let s = Sample::from_strs(&["abcab"], &[]).unwrap();
        for k in 1..=3 {
            let p = constraint_census(&encode_core_k(&s, &split_all_prefix(&s), k).unwrap());
            assert_eq!(p.variables["prefix-path"], 5 * k);
            assert!(!p.variables.contains_key("suffix-path"));
            let sfx = constraint_census(&encode_core_k(&s, &split_all_suffix(&s), k).unwrap());
            assert!(sfx.variables["suffix-path"] <= 5 * k * k);
            let k2 = constraint_census(&encode_core_k2(&s, &split_all_suffix(&s), k).unwrap());
            assert!(k2.variables["suffix-path-accept"] <= 5 * k);
            assert!(k2.variables["suffix-path-reject"] <= 5 * k);
            assert!(!k2.variables.contains_key("accept") && !k2.variables.contains_key("reject"));
            for c in [&p, &sfx, &k2] {
                let encoder: usize = c.variables.values().sum();
                let aux: usize = c.constraints.values().map(|(_, a)| a).sum();
                assert_eq!(encoder + aux, c.total_variables);
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let s = Sample::from_strs(&["ab"], &[]).unwrap();
        assert_eq!(encode_core_k(&s, &split_all_prefix(&s), 0).unwrap_err(), EncodingError::ZeroStates);
        let other = Sample::from_strs(&["ba"], &[]).unwrap();
        assert_eq!(encode_core_k(&s, &split_all_prefix(&other), 1).unwrap_err(), EncodingError::SplittingMismatch);
        let empty = Sample::from_strs(&[], &[]).unwrap();
        assert_eq!(encode_core_k(&empty, &split_all_prefix(&empty), 1).unwrap_err(), EncodingError::EmptySample);
    }

    #[test]
    fn k2_shifts_empty_suffixes() {
        let s = Sample::from_strs(&["ab", "b"], &[]).unwrap();
        let enc = encode_core_k2(&s, &split_all_prefix(&s), 1).unwrap();
        assert_eq!(enc.splitting.cuts(), &[1, 0]);
    }
}
