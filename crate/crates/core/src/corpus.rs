//! Labelled corpora and train/test splitting.
//!
//! A corpus file holds one word per line, `+<TAB>word` or `-<TAB>word`.
//! Blank lines are ignored.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::automaton::{Alphabet, Label, Sample, Word};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CorpusError {
    #[error("line {line}: expected `+<TAB>word` or `-<TAB>word`")]
    Format { line: usize },
    #[error("word {0:?} is labelled both + and -")]
    Conflict(String),
    #[error("line {line}: the empty word cannot be part of a sample")]
    EmptyWord { line: usize },
    #[error("alphabet error: {0}")]
    Alphabet(String),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SplitError {
    #[error("split fraction {0} is not in (0, 1)")]
    BadFraction(f64),
    #[error("split leaves the {side} side without {label} words")]
    DegenerateSplit { side: &'static str, label: &'static str },
}

/// Labelled words in file order, over the sorted set of characters they use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledCorpus {
    alphabet: Alphabet,
    entries: Vec<(Label, Word)>,
}

impl LabeledCorpus {
    /// Builds a corpus from labelled strings, dropping repeated pairs.
    pub fn from_entries<S: AsRef<str>>(entries: impl IntoIterator<Item = (Label, S)>) -> Result<LabeledCorpus, CorpusError> {
        let entries: Vec<(Label, String)> = entries.into_iter().map(|(l, w)| (l, w.as_ref().to_owned())).collect();
        let chars: BTreeSet<char> = entries.iter().flat_map(|(_, w)| w.chars()).collect();
        let alphabet = Alphabet::new(chars).map_err(|e| CorpusError::Alphabet(e.to_string()))?;
        let mut seen: HashMap<&str, Label> = HashMap::new();
        let mut out = Vec::new();
        for (idx, (label, text)) in entries.iter().enumerate() {
            if text.is_empty() {
                return Err(CorpusError::EmptyWord { line: idx + 1 });
            }
            match seen.get(text.as_str()) {
                Some(&l) if l == *label => continue,
                Some(_) => return Err(CorpusError::Conflict(text.clone())),
                None => {
                    seen.insert(text, *label);
                    out.push((*label, alphabet.encode(text).expect("alphabet covers every word")));
                }
            }
        }
        Ok(LabeledCorpus { alphabet, entries: out })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn entries(&self) -> &[(Label, Word)] {
        &self.entries
    }

    pub fn words(&self, label: Label) -> impl Iterator<Item = &Word> + '_ {
        self.entries.iter().filter(move |(l, _)| *l == label).map(|(_, w)| w)
    }

    pub fn count(&self, label: Label) -> usize {
        self.words(label).count()
    }

    /// The whole corpus as a sample.
    pub fn sample(&self) -> Sample {
        let pos = self.words(Label::Positive).cloned().collect();
        let neg = self.words(Label::Negative).cloned().collect();
        Sample::new(self.alphabet.clone(), pos, neg).expect("corpus invariants imply sample invariants")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (label, word) in &self.entries {
            writeln!(out, "{}\t{}", label.sign(), self.alphabet.decode(word)).unwrap();
        }
        out
    }
}

pub fn parse_corpus(text: &str) -> Result<LabeledCorpus, CorpusError> {
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let (tag, word) = line.split_once('\t').ok_or(CorpusError::Format { line: line_no })?;
        let label = match tag.trim() {
            "+" => Label::Positive,
            "-" => Label::Negative,
            _ => return Err(CorpusError::Format { line: line_no }),
        };
        let word = word.trim();
        if word.is_empty() {
            return Err(CorpusError::EmptyWord { line: line_no });
        }
        if word.chars().any(char::is_whitespace) {
            return Err(CorpusError::Format { line: line_no });
        }
        entries.push((label, word));
    }
    LabeledCorpus::from_entries(entries)
}

/// Number of training words taken from a class of `n` words.
pub fn train_size(n: usize, fraction: f64) -> usize {
    // The epsilon keeps exact products such as 0.3 * 70 from rounding down.
    ((fraction * n as f64) + 1e-9).floor() as usize
}

/// Takes the first [`train_size`] words of each class, in corpus order, for
/// training; the rest form the test sample.
pub fn split_train_test(corpus: &LabeledCorpus, fraction: f64) -> Result<(Sample, Sample), SplitError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(SplitError::BadFraction(fraction));
    }
    let mut train = (Vec::new(), Vec::new());
    let mut test = (Vec::new(), Vec::new());
    for (label, name) in [(Label::Positive, "positive"), (Label::Negative, "negative")] {
        let words: Vec<Word> = corpus.words(label).cloned().collect();
        let cut = train_size(words.len(), fraction);
        if cut == 0 {
            return Err(SplitError::DegenerateSplit { side: "train", label: name });
        }
        if cut == words.len() {
            return Err(SplitError::DegenerateSplit { side: "test", label: name });
        }
        let (head, tail) = words.split_at(cut);
        let (tr, te) = match label {
            Label::Positive => (&mut train.0, &mut test.0),
            Label::Negative => (&mut train.1, &mut test.1),
        };
        tr.extend_from_slice(head);
        te.extend_from_slice(tail);
    }
    let alphabet = corpus.alphabet().clone();
    let make = |(p, n): (Vec<Word>, Vec<Word>)| Sample::new(alphabet.clone(), p, n).expect("sub-corpus is a valid sample");
    Ok((make(train), make(test)))
}
