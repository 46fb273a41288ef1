//! Words, samples and 3-sort nondeterministic automata.
//!
//! States are numbered from zero in memory (`0` is the unique initial state)
//! and from one in the text format, where `q_i` is written `i`.

use std::collections::{BTreeSet, HashSet};
use std::fmt::{self, Write as _};
use std::ops::Deref;

/// Dense symbol identifier; an index into an [`Alphabet`].
pub type Symbol = u16;

/// State index, `0` being the initial state.
pub type State = usize;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AutomatonError {
    #[error("alphabet symbol {0:?} is repeated")]
    DuplicateSymbol(char),
    #[error("alphabet symbol {0:?} is whitespace")]
    WhitespaceSymbol(char),
    #[error("alphabet is limited to {max} symbols", max = Symbol::MAX)]
    AlphabetTooLarge,
    #[error("character {0:?} is not in the alphabet")]
    UnknownSymbol(char),
    #[error("automaton needs at least one state")]
    NoStates,
    #[error("state {0} is out of range")]
    StateOutOfRange(usize),
    #[error("symbol id {0} is out of range")]
    SymbolOutOfRange(Symbol),
    #[error("state {0} is both accepting and rejecting")]
    AmbiguousFinal(usize),
    #[error("word contains symbols outside the alphabet")]
    ForeignWord,
    #[error("a word has more than {budget} physical paths")]
    PathBudgetExceeded { budget: u64 },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SampleError {
    #[error("word {0:?} is both positive and negative")]
    Conflict(String),
    #[error("the empty word cannot be part of a sample")]
    EmptyWord,
    #[error("word uses symbols outside the alphabet")]
    ForeignWord,
}

/// Ordered set of distinct, non-whitespace characters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Alphabet {
    chars: Vec<char>,
}

impl Alphabet {
    pub fn new(chars: impl IntoIterator<Item = char>) -> Result<Alphabet, AutomatonError> {
        let mut out = Vec::new();
        for c in chars {
            if c.is_whitespace() {
                return Err(AutomatonError::WhitespaceSymbol(c));
            }
            if out.contains(&c) {
                return Err(AutomatonError::DuplicateSymbol(c));
            }
            out.push(c);
        }
        if out.len() > Symbol::MAX as usize {
            return Err(AutomatonError::AlphabetTooLarge);
        }
        Ok(Alphabet { chars: out })
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    pub fn char_of(&self, symbol: Symbol) -> char {
        self.chars[symbol as usize]
    }

    pub fn symbol_of(&self, c: char) -> Option<Symbol> {
        self.chars.iter().position(|&x| x == c).map(|i| i as Symbol)
    }

    pub fn encode(&self, text: &str) -> Result<Word, AutomatonError> {
        text.chars()
            .map(|c| self.symbol_of(c).ok_or(AutomatonError::UnknownSymbol(c)))
            .collect::<Result<Vec<_>, _>>()
            .map(Word)
    }

    pub fn decode(&self, word: &[Symbol]) -> String {
        word.iter().map(|&s| self.char_of(s)).collect()
    }

    /// Re-expresses `word`, written over `source`, in this alphabet.
    /// `None` when some character is missing here.
    pub fn translate(&self, word: &[Symbol], source: &Alphabet) -> Option<Word> {
        if source == self {
            return Some(Word(word.to_vec()));
        }
        word.iter().map(|&s| self.symbol_of(source.char_of(s))).collect::<Option<Vec<_>>>().map(Word)
    }

    pub fn contains_word(&self, word: &[Symbol]) -> bool {
        word.iter().all(|&s| (s as usize) < self.chars.len())
    }
}

/// A sequence of symbol ids; the empty sequence is λ.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn new(symbols: Vec<Symbol>) -> Word {
        Word(symbols)
    }

    pub fn empty() -> Word {
        Word(Vec::new())
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn into_symbols(self) -> Vec<Symbol> {
        self.0
    }
}

impl Deref for Word {
    type Target = [Symbol];
    fn deref(&self) -> &[Symbol] {
        &self.0
    }
}

impl From<&[Symbol]> for Word {
    fn from(symbols: &[Symbol]) -> Word {
        Word(symbols.to_vec())
    }
}

impl From<Vec<Symbol>> for Word {
    fn from(symbols: Vec<Symbol>) -> Word {
        Word(symbols)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn sign(self) -> char {
        match self {
            Label::Positive => '+',
            Label::Negative => '-',
        }
    }
}

/// Labelled words `S+` and `S-` over an alphabet.
///
/// Both classes are duplicate-free and keep insertion order; they are
/// disjoint and never contain λ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    alphabet: Alphabet,
    positives: Vec<Word>,
    negatives: Vec<Word>,
}

impl Sample {
    pub fn new(alphabet: Alphabet, positives: Vec<Word>, negatives: Vec<Word>) -> Result<Sample, SampleError> {
        let sample = Sample::new_overlapping(alphabet, positives, negatives)?;
        let pos: HashSet<&Word> = sample.positives.iter().collect();
        if let Some(w) = sample.negatives.iter().find(|w| pos.contains(w)) {
            return Err(SampleError::Conflict(sample.alphabet.decode(w)));
        }
        Ok(sample)
    }

    /// Like [`Sample::new`] but keeps words labelled both ways. No automaton
    /// is consistent with such a sample; it exists to exercise infeasibility.
    pub fn new_overlapping(alphabet: Alphabet, positives: Vec<Word>, negatives: Vec<Word>) -> Result<Sample, SampleError> {
        let dedup = |words: Vec<Word>| -> Result<Vec<Word>, SampleError> {
            let mut seen = HashSet::new();
            let mut out = Vec::new();
            for w in words {
                if w.is_empty() {
                    return Err(SampleError::EmptyWord);
                }
                if !alphabet.contains_word(&w) {
                    return Err(SampleError::ForeignWord);
                }
                if seen.insert(w.clone()) {
                    out.push(w);
                }
            }
            Ok(out)
        };
        let positives = dedup(positives)?;
        let negatives = dedup(negatives)?;
        Ok(Sample { alphabet, positives, negatives })
    }

    /// Builds a sample from strings, using the characters in order of first appearance as alphabet.
    pub fn from_strs(positives: &[&str], negatives: &[&str]) -> Result<Sample, SampleError> {
        let mut chars: Vec<char> = Vec::new();
        for c in positives.iter().chain(negatives).flat_map(|w| w.chars()) {
            if !chars.contains(&c) {
                chars.push(c);
            }
        }
        chars.sort_unstable();
        let alphabet = Alphabet::new(chars).map_err(|_| SampleError::ForeignWord)?;
        let encode = |ws: &[&str]| ws.iter().map(|w| alphabet.encode(w).unwrap()).collect();
        let (p, n) = (encode(positives), encode(negatives));
        Sample::new(alphabet.clone(), p, n)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn positives(&self) -> &[Word] {
        &self.positives
    }

    pub fn negatives(&self) -> &[Word] {
        &self.negatives
    }

    pub fn len(&self) -> usize {
        self.positives.len() + self.negatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Positives then negatives, each with its label.
    pub fn labelled(&self) -> impl Iterator<Item = (Label, &Word)> + '_ {
        self.positives
            .iter()
            .map(|w| (Label::Positive, w))
            .chain(self.negatives.iter().map(|w| (Label::Negative, w)))
    }

    /// Total number of symbols over all words.
    pub fn total_length(&self) -> usize {
        self.labelled().map(|(_, w)| w.len()).sum()
    }
}

/// A transition `q_from --symbol--> q_to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transition {
    pub from: State,
    pub symbol: Symbol,
    pub to: State,
}

impl Transition {
    pub fn new(from: State, symbol: Symbol, to: State) -> Transition {
        Transition { from, symbol, to }
    }
}

/// Sort of a state in a 3-sort automaton.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateSort {
    Accepting,
    Rejecting,
    Whatever,
}

/// Cap on the number of physical paths examined for a single word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathBudget(pub u64);

impl Default for PathBudget {
    fn default() -> Self {
        PathBudget(100_000)
    }
}

/// A 3-sort NFA: states `0..k` with `0` initial, disjoint accepting and
/// rejecting final sets, and a transition relation without λ-moves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nfa3 {
    k: usize,
    alphabet: Alphabet,
    accepting: BTreeSet<State>,
    rejecting: BTreeSet<State>,
    transitions: Vec<Transition>,
    /// `successors[q][s]` lists `(target, transition index)`.
    successors: Vec<Vec<Vec<(State, usize)>>>,
}

impl Nfa3 {
    pub fn new(
        k: usize,
        alphabet: Alphabet,
        accepting: impl IntoIterator<Item = State>,
        rejecting: impl IntoIterator<Item = State>,
        transitions: impl IntoIterator<Item = Transition>,
    ) -> Result<Nfa3, AutomatonError> {
        if k == 0 {
            return Err(AutomatonError::NoStates);
        }
        let accepting: BTreeSet<State> = accepting.into_iter().collect();
        let rejecting: BTreeSet<State> = rejecting.into_iter().collect();
        if let Some(&q) = accepting.iter().chain(&rejecting).find(|&&q| q >= k) {
            return Err(AutomatonError::StateOutOfRange(q));
        }
        if let Some(&q) = accepting.intersection(&rejecting).next() {
            return Err(AutomatonError::AmbiguousFinal(q));
        }
        let mut transitions: Vec<Transition> = transitions.into_iter().collect();
        for t in &transitions {
            if t.from >= k || t.to >= k {
                return Err(AutomatonError::StateOutOfRange(t.from.max(t.to)));
            }
            if t.symbol as usize >= alphabet.len() {
                return Err(AutomatonError::SymbolOutOfRange(t.symbol));
            }
        }
        transitions.sort_unstable();
        transitions.dedup();
        let mut successors = vec![vec![Vec::new(); alphabet.len()]; k];
        for (idx, t) in transitions.iter().enumerate() {
            successors[t.from][t.symbol as usize].push((t.to, idx));
        }
        Ok(Nfa3 { k, alphabet, accepting, rejecting, transitions, successors })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn accepting(&self) -> &BTreeSet<State> {
        &self.accepting
    }

    pub fn rejecting(&self) -> &BTreeSet<State> {
        &self.rejecting
    }

    pub fn sort(&self, q: State) -> StateSort {
        if self.accepting.contains(&q) {
            StateSort::Accepting
        } else if self.rejecting.contains(&q) {
            StateSort::Rejecting
        } else {
            StateSort::Whatever
        }
    }

    /// Transitions in canonical `(from, symbol, to)` order.
    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn successors(&self, q: State, symbol: Symbol) -> &[(State, usize)] {
        &self.successors[q][symbol as usize]
    }

    pub fn transition_index(&self, t: &Transition) -> Option<usize> {
        self.transitions.binary_search(t).ok()
    }

    pub fn has_transition(&self, from: State, symbol: Symbol, to: State) -> bool {
        self.transition_index(&Transition::new(from, symbol, to)).is_some()
    }

    /// Canonical text form: header, `accept`/`reject` lines, then `trans` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        write_structure(&mut out, self.k, &self.alphabet, Some((&self.accepting, &self.rejecting)), &self.transitions);
        out
    }

    pub fn parse(text: &str) -> Result<Nfa3, AutomatonError> {
        let mut doc = TextDocument::parse(text)?;
        if let Some((line, _)) = doc.extra.first() {
            return Err(format_error(*line, "unexpected line"));
        }
        let accepting = std::mem::take(&mut doc.accepting);
        let rejecting = std::mem::take(&mut doc.rejecting);
        Nfa3::new(doc.k, doc.alphabet, accepting, rejecting, doc.transitions)
    }

    /// Verdict for `word`, which must be written over this automaton's alphabet.
    pub fn classify(&self, word: &[Symbol], budget: PathBudget) -> Result<Verdict, AutomatonError> {
        classify_word_3sort(self, word, budget)
    }
}

impl fmt::Display for Nfa3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

pub(crate) fn write_structure(
    out: &mut String,
    k: usize,
    alphabet: &Alphabet,
    finals: Option<(&BTreeSet<State>, &BTreeSet<State>)>,
    transitions: &[Transition],
) {
    let chars: String = alphabet.chars().iter().collect();
    writeln!(out, "k {k} alphabet {chars}").unwrap();
    if let Some((accepting, rejecting)) = finals {
        for q in accepting {
            writeln!(out, "accept {}", q + 1).unwrap();
        }
        for q in rejecting {
            writeln!(out, "reject {}", q + 1).unwrap();
        }
    }
    for t in transitions {
        writeln!(out, "trans {} {} {}", t.from + 1, alphabet.char_of(t.symbol), t.to + 1).unwrap();
    }
}

pub(crate) fn format_error(line: usize, message: impl Into<String>) -> AutomatonError {
    AutomatonError::Format { line, message: message.into() }
}

/// Lines of the automaton text format, with unrecognised lines kept aside
/// for formats that extend it.
pub(crate) struct TextDocument<'a> {
    pub k: usize,
    pub alphabet: Alphabet,
    pub accepting: Vec<State>,
    pub rejecting: Vec<State>,
    pub transitions: Vec<Transition>,
    pub extra: Vec<(usize, Vec<&'a str>)>,
}

impl<'a> TextDocument<'a> {
    pub fn parse(text: &'a str) -> Result<TextDocument<'a>, AutomatonError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (header_idx, header) = lines.next().ok_or_else(|| format_error(1, "missing header"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let (k, chars) = match fields.as_slice() {
            ["k", k, "alphabet"] => (*k, ""),
            ["k", k, "alphabet", chars] => (*k, *chars),
            _ => return Err(format_error(header_idx + 1, "expected `k <k> alphabet <chars>`")),
        };
        let k: usize = k.parse().map_err(|_| format_error(header_idx + 1, "bad state count"))?;
        let alphabet = Alphabet::new(chars.chars())?;
        let mut doc = TextDocument {
            k,
            alphabet,
            accepting: Vec::new(),
            rejecting: Vec::new(),
            transitions: Vec::new(),
            extra: Vec::new(),
        };
        for (idx, line) in lines {
            let line_no = idx + 1;
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                ["accept", q] => doc.accepting.push(doc.state(q, line_no)?),
                ["reject", q] => doc.rejecting.push(doc.state(q, line_no)?),
                ["trans", from, symbol, to] => {
                    let t = doc.transition(from, symbol, to, line_no)?;
                    doc.transitions.push(t);
                }
                _ => doc.extra.push((line_no, fields)),
            }
        }
        Ok(doc)
    }

    pub fn state(&self, text: &str, line: usize) -> Result<State, AutomatonError> {
        match text.parse::<usize>() {
            Ok(q) if q >= 1 && q <= self.k => Ok(q - 1),
            _ => Err(format_error(line, format!("bad state `{text}`"))),
        }
    }

    pub fn symbol(&self, text: &str, line: usize) -> Result<Symbol, AutomatonError> {
        let mut chars = text.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => self.alphabet.symbol_of(c).ok_or_else(|| format_error(line, format!("unknown symbol `{c}`"))),
            _ => Err(format_error(line, format!("bad symbol `{text}`"))),
        }
    }

    pub fn transition(&self, from: &str, symbol: &str, to: &str, line: usize) -> Result<Transition, AutomatonError> {
        Ok(Transition::new(self.state(from, line)?, self.symbol(symbol, line)?, self.state(to, line)?))
    }
}

/// A chain of transitions spelling a word from the initial state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PhysicalPath {
    pub transitions: Vec<Transition>,
}

impl PhysicalPath {
    /// Last state visited; the initial state for the empty path.
    pub fn end_state(&self) -> State {
        self.transitions.last().map_or(0, |t| t.to)
    }

    pub fn is_chained(&self) -> bool {
        self.transitions.first().is_none_or(|t| t.from == 0)
            && self.transitions.windows(2).all(|w| w[0].to == w[1].from)
    }

    pub fn word(&self) -> Word {
        Word(self.transitions.iter().map(|t| t.symbol).collect())
    }

    /// Number of positions of the path equal to `t`.
    pub fn occ(&self, t: &Transition) -> usize {
        occ(&self.transitions, t)
    }
}

/// Number of occurrences of `t` in a transition sequence; zero for the empty sequence.
pub fn occ(path: &[Transition], t: &Transition) -> usize {
    match path.split_first() {
        None => 0,
        Some((head, rest)) => usize::from(head == t) + occ(rest, t),
    }
}

/// Counts of physical paths for `word` per end state, saturating at `u64::MAX`.
pub(crate) fn end_state_counts(nfa: &Nfa3, word: &[Symbol]) -> Vec<u64> {
    let mut current = vec![0u64; nfa.k()];
    current[0] = 1;
    for &s in word {
        let mut next = vec![0u64; nfa.k()];
        for (q, &count) in current.iter().enumerate() {
            if count == 0 {
                continue;
            }
            for &(to, _) in nfa.successors(q, s) {
                next[to] = next[to].saturating_add(count);
            }
        }
        current = next;
    }
    current
}

pub(crate) fn check_budget(counts: &[u64], budget: PathBudget) -> Result<u64, AutomatonError> {
    let total = counts.iter().fold(0u64, |acc, &c| acc.saturating_add(c));
    if total > budget.0 {
        Err(AutomatonError::PathBudgetExceeded { budget: budget.0 })
    } else {
        Ok(total)
    }
}

/// Every physical path of `word` from the initial state, in lexicographic
/// order of visited states. Fails without enumerating when the path count
/// exceeds `budget`.
pub fn enumerate_paths(nfa: &Nfa3, word: &[Symbol], budget: PathBudget) -> Result<Vec<PhysicalPath>, AutomatonError> {
    if !nfa.alphabet().contains_word(word) {
        return Err(AutomatonError::ForeignWord);
    }
    check_budget(&end_state_counts(nfa, word), budget)?;
    // alive[t][q]: the suffix word[t..] can be read from q
    let n = word.len();
    let mut alive = vec![vec![false; nfa.k()]; n + 1];
    alive[n].iter_mut().for_each(|a| *a = true);
    for t in (0..n).rev() {
        for q in 0..nfa.k() {
            alive[t][q] = nfa.successors(q, word[t]).iter().any(|&(to, _)| alive[t + 1][to]);
        }
    }
    let mut out = Vec::new();
    if !alive[0][0] {
        return Ok(out);
    }
    let mut stack: Vec<Transition> = Vec::with_capacity(n);
    extend_paths(nfa, word, &alive, 0, &mut stack, &mut out);
    Ok(out)
}

fn extend_paths(
    nfa: &Nfa3,
    word: &[Symbol],
    alive: &[Vec<bool>],
    q: State,
    stack: &mut Vec<Transition>,
    out: &mut Vec<PhysicalPath>,
) {
    let t = stack.len();
    if t == word.len() {
        out.push(PhysicalPath { transitions: stack.clone() });
        return;
    }
    for &(to, _) in nfa.successors(q, word[t]) {
        if alive[t + 1][to] {
            stack.push(Transition::new(q, word[t], to));
            extend_paths(nfa, word, alive, to, stack, out);
            stack.pop();
        }
    }
}

/// What a 3-sort automaton says about a word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Some path ends in `F+`, none in `F-`.
    Accepted,
    /// Some path ends in `F-`, none in `F+`.
    Rejected,
    /// Paths end in both final sorts.
    Both,
    /// No path ends in a final state.
    Inconclusive,
}

pub fn classify_word_3sort(nfa: &Nfa3, word: &[Symbol], budget: PathBudget) -> Result<Verdict, AutomatonError> {
    if !nfa.alphabet().contains_word(word) {
        return Err(AutomatonError::ForeignWord);
    }
    let counts = end_state_counts(nfa, word);
    check_budget(&counts, budget)?;
    let reaches = |set: &BTreeSet<State>| set.iter().any(|&q| counts[q] > 0);
    Ok(match (reaches(nfa.accepting()), reaches(nfa.rejecting())) {
        (true, false) => Verdict::Accepted,
        (false, true) => Verdict::Rejected,
        (true, true) => Verdict::Both,
        (false, false) => Verdict::Inconclusive,
    })
}

/// Whether `nfa` accepts every positive and rejects every negative word
/// without ambiguity. Characters missing from the automaton's alphabet make a
/// word unreadable, hence never accepted or rejected.
pub fn is_consistent(nfa: &Nfa3, sample: &Sample, budget: PathBudget) -> Result<bool, AutomatonError> {
    for (label, word) in sample.labelled() {
        let Some(word) = nfa.alphabet().translate(word, sample.alphabet()) else {
            return Ok(false);
        };
        let expected = match label {
            Label::Positive => Verdict::Accepted,
            Label::Negative => Verdict::Rejected,
        };
        if classify_word_3sort(nfa, &word, budget)? != expected {
            return Ok(false);
        }
    }
    Ok(true)
}
