//! Regular-expression benchmarks.
//!
//! Patterns use alternation, concatenation, grouping, `*`, `+`, `?`,
//! bracketed character classes with ranges and backslash escapes, always with
//! full-match semantics. A pattern is compiled through a Thompson NFA into a
//! DFA over the characters it mentions; per-length word counts on that DFA give
//! uniform sampling by index.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automaton::Label;
use crate::corpus::{CorpusError, LabeledCorpus};

/// Shuffles tried per source word before moving on to the next one.
pub const SHUFFLE_RETRIES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegexpError {
    #[error("pattern error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("invalid benchmark spec: {0}")]
    InvalidSpec(&'static str),
    #[error("language has {available} usable words within the length bounds, {needed} needed")]
    LanguageTooSmall { available: u128, needed: u128 },
    #[error("word counts overflow; narrow the length bounds")]
    LanguageTooLarge,
    #[error("no non-matching shuffle found for negative #{index} after {SHUFFLE_RETRIES} retries per source word")]
    NegativeGenerationStalled { index: usize },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

#[derive(Debug, Clone)]
enum Node {
    Empty,
    Chars(BTreeSet<char>),
    Concat(Vec<Node>),
    Alt(Vec<Node>),
    Star(Box<Node>),
    Plus(Box<Node>),
    Optional(Box<Node>),
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn error(&self, message: impl Into<String>) -> RegexpError {
        RegexpError::Parse { offset: self.pos, message: message.into() }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn alternation(&mut self) -> Result<Node, RegexpError> {
        let mut branches = vec![self.concatenation()?];
        while self.peek() == Some('|') {
            self.pos += 1;
            branches.push(self.concatenation()?);
        }
        Ok(if branches.len() == 1 { branches.pop().unwrap() } else { Node::Alt(branches) })
    }

    fn concatenation(&mut self) -> Result<Node, RegexpError> {
        let mut items = Vec::new();
        while let Some(c) = self.peek() {
            if c == '|' || c == ')' {
                break;
            }
            items.push(self.repetition()?);
        }
        Ok(match items.len() {
            0 => Node::Empty,
            1 => items.pop().unwrap(),
            _ => Node::Concat(items),
        })
    }

    fn repetition(&mut self) -> Result<Node, RegexpError> {
        let mut node = self.atom()?;
        while let Some(c) = self.peek() {
            node = match c {
                '*' => Node::Star(Box::new(node)),
                '+' => Node::Plus(Box::new(node)),
                '?' => Node::Optional(Box::new(node)),
                _ => break,
            };
            self.pos += 1;
        }
        Ok(node)
    }

    fn literal(&mut self) -> Result<char, RegexpError> {
        let c = self.peek().ok_or_else(|| self.error("unexpected end of pattern"))?;
        self.pos += 1;
        if c == '\\' {
            let escaped = self.peek().ok_or_else(|| self.error("dangling escape"))?;
            self.pos += 1;
            return Ok(escaped);
        }
        Ok(c)
    }

    fn atom(&mut self) -> Result<Node, RegexpError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.alternation()?;
                if self.peek() != Some(')') {
                    return Err(self.error("missing `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some('[') => {
                self.pos += 1;
                self.class()
            }
            Some(c @ ('*' | '+' | '?')) => Err(self.error(format!("`{c}` has nothing to repeat"))),
            Some(c @ ('.' | '^' | '$' | '{' | '}')) => Err(self.error(format!("`{c}` is not supported"))),
            Some(']') => Err(self.error("unbalanced `]`")),
            _ => {
                let c = self.literal()?;
                if c.is_whitespace() {
                    return Err(self.error("whitespace cannot be a symbol"));
                }
                Ok(Node::Chars(BTreeSet::from([c])))
            }
        }
    }

    fn class(&mut self) -> Result<Node, RegexpError> {
        let mut set = BTreeSet::new();
        if self.peek() == Some('^') {
            return Err(self.error("negated classes are not supported"));
        }
        loop {
            match self.peek() {
                None => return Err(self.error("missing `]`")),
                Some(']') if !set.is_empty() => {
                    self.pos += 1;
                    break;
                }
                _ => {}
            }
            let lo = self.literal()?;
            if self.peek() == Some('-') && self.chars.get(self.pos + 1).is_some_and(|&c| c != ']') {
                self.pos += 1;
                let hi = self.literal()?;
                if hi < lo {
                    return Err(self.error(format!("empty range {lo}-{hi}")));
                }
                set.extend(lo..=hi);
            } else {
                set.insert(lo);
            }
        }
        if set.iter().any(|c| c.is_whitespace()) {
            return Err(self.error("whitespace cannot be a symbol"));
        }
        Ok(Node::Chars(set))
    }
}

/// Thompson construction over character sets.
#[derive(Default)]
struct Thompson {
    eps: Vec<Vec<usize>>,
    edges: Vec<Vec<(char, usize)>>,
}

impl Thompson {
    fn state(&mut self) -> usize {
        self.eps.push(Vec::new());
        self.edges.push(Vec::new());
        self.eps.len() - 1
    }

    /// Returns `(start, end)` of a fragment recognising `node`.
    fn build(&mut self, node: &Node) -> (usize, usize) {
        let (s, e) = (self.state(), self.state());
        match node {
            Node::Empty => self.eps[s].push(e),
            Node::Chars(set) => {
                for &c in set {
                    self.edges[s].push((c, e));
                }
            }
            Node::Concat(items) => {
                let mut cur = s;
                for item in items {
                    let (is, ie) = self.build(item);
                    self.eps[cur].push(is);
                    cur = ie;
                }
                self.eps[cur].push(e);
            }
            Node::Alt(branches) => {
                for b in branches {
                    let (bs, be) = self.build(b);
                    self.eps[s].push(bs);
                    self.eps[be].push(e);
                }
            }
            Node::Star(inner) | Node::Plus(inner) | Node::Optional(inner) => {
                let (is, ie) = self.build(inner);
                self.eps[s].push(is);
                self.eps[ie].push(e);
                if !matches!(node, Node::Plus(_)) {
                    self.eps[s].push(e);
                }
                if !matches!(node, Node::Optional(_)) {
                    self.eps[ie].push(is);
                }
            }
        }
        (s, e)
    }

    fn closure(&self, seed: impl IntoIterator<Item = usize>) -> BTreeSet<usize> {
        let mut set: BTreeSet<usize> = BTreeSet::new();
        let mut stack: Vec<usize> = seed.into_iter().collect();
        while let Some(q) = stack.pop() {
            if set.insert(q) {
                stack.extend(self.eps[q].iter().copied());
            }
        }
        set
    }
}

/// A compiled pattern: a complete DFA over the pattern's characters.
#[derive(Debug, Clone)]
pub struct Regexp {
    alphabet: Vec<char>,
    /// `delta[q][symbol]`; state 0 is the start.
    delta: Vec<Vec<usize>>,
    accepting: Vec<bool>,
}

impl Regexp {
    pub fn compile(pattern: &str) -> Result<Regexp, RegexpError> {
        let mut parser = Parser { chars: pattern.chars().collect(), pos: 0 };
        let ast = parser.alternation()?;
        if parser.pos != parser.chars.len() {
            return Err(parser.error("unbalanced `)`"));
        }
        let mut nfa = Thompson::default();
        let (start, end) = nfa.build(&ast);
        let alphabet: Vec<char> =
            nfa.edges.iter().flatten().map(|&(c, _)| c).collect::<BTreeSet<_>>().into_iter().collect();

        let mut index: BTreeMap<BTreeSet<usize>, usize> = BTreeMap::new();
        let mut sets = vec![nfa.closure([start])];
        index.insert(sets[0].clone(), 0);
        let mut delta: Vec<Vec<usize>> = Vec::new();
        let mut next = 0;
        while next < sets.len() {
            let current = sets[next].clone();
            let mut row = Vec::with_capacity(alphabet.len());
            for &c in &alphabet {
                let targets = current
                    .iter()
                    .flat_map(|&q| nfa.edges[q].iter().filter(move |&&(x, _)| x == c).map(|&(_, t)| t));
                let closure = nfa.closure(targets);
                let id = *index.entry(closure.clone()).or_insert_with(|| {
                    sets.push(closure);
                    sets.len() - 1
                });
                row.push(id);
            }
            delta.push(row);
            next += 1;
        }
        let accepting = sets.iter().map(|s| s.contains(&end)).collect();
        Ok(Regexp { alphabet, delta, accepting })
    }

    /// Characters mentioned by the pattern, sorted.
    pub fn alphabet(&self) -> &[char] {
        &self.alphabet
    }

    pub fn dfa_states(&self) -> usize {
        self.delta.len()
    }

    pub fn is_match(&self, text: &str) -> bool {
        let mut q = 0;
        for c in text.chars() {
            match self.alphabet.binary_search(&c) {
                Ok(s) => q = self.delta[q][s],
                Err(_) => return false,
            }
        }
        self.accepting[q]
    }

    /// `table[n][q]` = number of words of length `n` accepted from state `q`.
    fn count_table(&self, max_len: usize) -> Result<Vec<Vec<u128>>, RegexpError> {
        let mut table = vec![self.accepting.iter().map(|&a| u128::from(a)).collect::<Vec<_>>()];
        for n in 1..=max_len {
            let prev = &table[n - 1];
            let mut row = vec![0u128; self.delta.len()];
            for (q, slot) in row.iter_mut().enumerate() {
                for &t in &self.delta[q] {
                    *slot = slot.checked_add(prev[t]).ok_or(RegexpError::LanguageTooLarge)?;
                }
            }
            table.push(row);
        }
        Ok(table)
    }

    /// Number of words of each length `0..=max_len` in the language.
    pub fn count_by_length(&self, max_len: usize) -> Result<Vec<u128>, RegexpError> {
        Ok(self.count_table(max_len)?.into_iter().map(|row| row[0]).collect())
    }

    /// The `index`-th word of length `len` in symbol order.
    fn unrank(&self, table: &[Vec<u128>], len: usize, mut index: u128) -> String {
        let mut q = 0;
        let mut out = String::with_capacity(len);
        for remaining in (0..len).rev() {
            for (s, &t) in self.delta[q].iter().enumerate() {
                let c = table[remaining][t];
                if index < c {
                    out.push(self.alphabet[s]);
                    q = t;
                    break;
                }
                index -= c;
            }
        }
        out
    }
}

/// Parameters of a generated benchmark.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegexpBenchmarkSpec {
    pub pattern: String,
    pub total: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub seed: u64,
}

/// Draws `total / 2` distinct words uniformly from the pattern's language
/// within the length bounds, then one shuffled, non-matching anagram of a
/// positive per negative slot. Positives come first in the corpus.
pub fn generate_regexp_benchmark(spec: &RegexpBenchmarkSpec) -> Result<LabeledCorpus, RegexpError> {
    if spec.total == 0 || spec.total % 2 != 0 {
        return Err(RegexpError::InvalidSpec("total must be a positive even number"));
    }
    if spec.min_len < 1 || spec.min_len > spec.max_len {
        return Err(RegexpError::InvalidSpec("length bounds must satisfy 1 <= min_len <= max_len"));
    }
    let regexp = Regexp::compile(&spec.pattern)?;
    let table = regexp.count_table(spec.max_len)?;
    let per_length: Vec<u128> = (spec.min_len..=spec.max_len).map(|n| table[n][0]).collect();
    let available = per_length.iter().try_fold(0u128, |acc, &c| acc.checked_add(c)).ok_or(RegexpError::LanguageTooLarge)?;
    let half = spec.total / 2;
    if available < half as u128 {
        return Err(RegexpError::LanguageTooSmall { available, needed: half as u128 });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    // Floyd's algorithm: a uniform `half`-subset of 0..available.
    let mut chosen: BTreeSet<u128> = BTreeSet::new();
    for j in (available - half as u128)..available {
        let t = rng.gen_range(0..=j);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    let mut positives: Vec<String> = chosen
        .into_iter()
        .map(|mut index| {
            let mut len = spec.min_len;
            for &count in &per_length {
                if index < count {
                    break;
                }
                index -= count;
                len += 1;
            }
            regexp.unrank(&table, len, index)
        })
        .collect();
    positives.shuffle(&mut rng);

    let sources: Vec<&String> = positives
        .iter()
        .filter(|w| w.chars().collect::<BTreeSet<_>>().len() >= 2)
        .collect();
    if sources.is_empty() {
        return Err(RegexpError::LanguageTooSmall { available: 0, needed: half as u128 });
    }
    let mut taken: HashSet<String> = positives.iter().cloned().collect();
    let mut negatives = Vec::with_capacity(half);
    for slot in 0..half {
        let mut found = None;
        'sources: for offset in 0..sources.len() {
            let mut symbols: Vec<char> = sources[(slot + offset) % sources.len()].chars().collect();
            for _ in 0..SHUFFLE_RETRIES {
                symbols.shuffle(&mut rng);
                let candidate: String = symbols.iter().collect();
                if !regexp.is_match(&candidate) && !taken.contains(&candidate) {
                    found = Some(candidate);
                    break 'sources;
                }
            }
        }
        let word = found.ok_or(RegexpError::NegativeGenerationStalled { index: slot })?;
        taken.insert(word.clone());
        negatives.push(word);
    }

    let entries = positives
        .iter()
        .map(|w| (Label::Positive, w.as_str()))
        .chain(negatives.iter().map(|w| (Label::Negative, w.as_str())));
    Ok(LabeledCorpus::from_entries(entries)?)
}
