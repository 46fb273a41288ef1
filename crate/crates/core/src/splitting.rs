//! Word splittings `w = uv` and the strategies that choose them.

use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automaton::{Sample, Symbol, Word};

/// One split point per sample word, positives first, in sample order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Splitting {
    words: Vec<Word>,
    cuts: Vec<usize>,
}

impl Splitting {
    /// Pairs each word with its cut; `cut` symbols go to the prefix.
    ///
    /// # Panics
    /// When the lengths differ or a cut exceeds its word's length.
    pub fn new(words: Vec<Word>, cuts: Vec<usize>) -> Splitting {
        assert_eq!(words.len(), cuts.len(), "one cut per word");
        assert!(words.iter().zip(&cuts).all(|(w, &c)| c <= w.len()), "cut beyond word end");
        Splitting { words, cuts }
    }

    fn uniform(sample: &Sample, cut: impl FnMut(&Word) -> usize) -> Splitting {
        let words: Vec<Word> = sample.labelled().map(|(_, w)| w.clone()).collect();
        let cuts = words.iter().map(cut).collect();
        Splitting { words, cuts }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn cuts(&self) -> &[usize] {
        &self.cuts
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    /// `(u, v)` for the `index`-th word.
    pub fn pair(&self, index: usize) -> (&[Symbol], &[Symbol]) {
        self.words[index].split_at(self.cuts[index])
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&[Symbol], &[Symbol])> + '_ {
        (0..self.len()).map(|i| self.pair(i))
    }

    /// Split of `word`, if it belongs to the splitting.
    pub fn split_of(&self, word: &[Symbol]) -> Option<(&[Symbol], &[Symbol])> {
        self.words.iter().position(|w| w.symbols() == word).map(|i| self.pair(i))
    }

    /// `S_u`: the distinct prefixes used, λ included when some word has one.
    pub fn prefixes(&self) -> BTreeSet<Word> {
        self.pairs().map(|(u, _)| Word::from(u)).collect()
    }

    /// `S_v`: the distinct suffixes used.
    pub fn suffixes(&self) -> BTreeSet<Word> {
        self.pairs().map(|(_, v)| Word::from(v)).collect()
    }
}

/// Non-empty prefixes of the given words.
pub fn pref<'a>(words: impl IntoIterator<Item = &'a [Symbol]>) -> BTreeSet<Word> {
    words.into_iter().flat_map(|w| (1..=w.len()).map(move |n| Word::from(&w[..n]))).collect()
}

/// Non-empty suffixes of the given words.
pub fn suf<'a>(words: impl IntoIterator<Item = &'a [Symbol]>) -> BTreeSet<Word> {
    words.into_iter().flat_map(|w| (0..w.len()).map(move |n| Word::from(&w[n..]))).collect()
}

/// `|Pref(S_u)| + k·|Suf(S_v)|`.
pub fn fitness(splitting: &Splitting, k: usize) -> usize {
    let prefixes = pref(splitting.pairs().map(|(u, _)| u));
    let suffixes = suf(splitting.pairs().map(|(_, v)| v));
    prefixes.len() + k * suffixes.len()
}

/// Every word split as `(w, λ)`.
pub fn split_all_prefix(sample: &Sample) -> Splitting {
    Splitting::uniform(sample, |w| w.len())
}

/// Every word split as `(λ, w)`.
pub fn split_all_suffix(sample: &Sample) -> Splitting {
    Splitting::uniform(sample, |_| 0)
}

/// Greedy cover by suffixes ranked by `|v|·|Ω(v)|`, then length, then
/// symbol order; each word is split at the first selected suffix covering it.
pub fn split_best_suffix(sample: &Sample) -> Splitting {
    let words: Vec<Word> = sample.labelled().map(|(_, w)| w.clone()).collect();
    let lens = greedy_cover(&words, |w, n| &w[w.len() - n..]);
    let cuts = words.iter().zip(lens).map(|(w, n)| w.len() - n).collect();
    Splitting { words, cuts }
}

/// Dual of [`split_best_suffix`] over prefixes.
pub fn split_best_prefix(sample: &Sample) -> Splitting {
    let words: Vec<Word> = sample.labelled().map(|(_, w)| w.clone()).collect();
    let cuts = greedy_cover(&words, |w, n| &w[..n]);
    Splitting { words, cuts }
}

/// Returns, per word, the length of the affix that covers it.
fn greedy_cover(words: &[Word], affix: impl for<'a> Fn(&'a [Symbol], usize) -> &'a [Symbol]) -> Vec<usize> {
    let mut owners: HashMap<&[Symbol], Vec<usize>> = HashMap::new();
    for (i, w) in words.iter().enumerate() {
        for n in 1..=w.len() {
            owners.entry(affix(w, n)).or_default().push(i);
        }
    }
    let mut ranked: Vec<(&[Symbol], &Vec<usize>)> = owners.iter().map(|(a, o)| (*a, o)).collect();
    ranked.sort_by(|(a, oa), (b, ob)| {
        (b.len() * ob.len())
            .cmp(&(a.len() * oa.len()))
            .then(b.len().cmp(&a.len()))
            .then(a.cmp(b))
    });
    let mut cover: Vec<Option<usize>> = vec![None; words.len()];
    let mut left = words.len();
    for (candidate, owners) in ranked {
        if left == 0 {
            break;
        }
        for &i in owners {
            if cover[i].is_none() {
                cover[i] = Some(candidate.len());
                left -= 1;
            }
        }
    }
    cover.into_iter().map(|c| c.expect("every word covers itself")).collect()
}

/// Starting point of the local search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IlsInit {
    Random,
    BestPrefix,
    BestSuffix,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IlsConfig {
    pub init: IlsInit,
    pub max_iterations: usize,
    /// Words re-split per perturbation; `None` means `⌈|S|/10⌉`.
    pub perturbation_strength: Option<usize>,
    pub seed: u64,
}

impl IlsConfig {
    pub fn new(init: IlsInit, seed: u64) -> IlsConfig {
        IlsConfig { init, max_iterations: 500, perturbation_strength: None, seed }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IlsError {
    #[error("ILS needs at least one iteration")]
    NoIterations,
    #[error("ILS needs k >= 1")]
    ZeroStates,
}

/// Incremental fitness: multiplicities of every interned prefix and suffix.
struct FitnessState<'a> {
    words: &'a [Word],
    k: usize,
    /// `prefix_ids[i][n]` names `w_i[..n]`, `n >= 1`.
    prefix_ids: Vec<Vec<usize>>,
    /// `suffix_ids[i][n]` names `w_i[n..]`, `n < |w_i|`.
    suffix_ids: Vec<Vec<usize>>,
    prefix_count: Vec<u32>,
    suffix_count: Vec<u32>,
    distinct_prefixes: usize,
    distinct_suffixes: usize,
    cuts: Vec<usize>,
}

impl<'a> FitnessState<'a> {
    fn new(words: &'a [Word], k: usize, cuts: Vec<usize>) -> FitnessState<'a> {
        let mut prefix_index: HashMap<&[Symbol], usize> = HashMap::new();
        let mut suffix_index: HashMap<&[Symbol], usize> = HashMap::new();
        let mut prefix_ids = Vec::with_capacity(words.len());
        let mut suffix_ids = Vec::with_capacity(words.len());
        for w in words {
            let mut p = vec![usize::MAX];
            for n in 1..=w.len() {
                let next = prefix_index.len();
                p.push(*prefix_index.entry(&w[..n]).or_insert(next));
            }
            let mut s = Vec::with_capacity(w.len());
            for n in 0..w.len() {
                let next = suffix_index.len();
                s.push(*suffix_index.entry(&w[n..]).or_insert(next));
            }
            prefix_ids.push(p);
            suffix_ids.push(s);
        }
        let mut state = FitnessState {
            words,
            k,
            prefix_ids,
            suffix_ids,
            prefix_count: vec![0; prefix_index.len()],
            suffix_count: vec![0; suffix_index.len()],
            distinct_prefixes: 0,
            distinct_suffixes: 0,
            cuts: vec![0; words.len()],
        };
        for (i, c) in cuts.into_iter().enumerate() {
            state.place(i, c);
        }
        state
    }

    fn fitness(&self) -> usize {
        self.distinct_prefixes + self.k * self.distinct_suffixes
    }

    /// Adds word `i` with cut `c`; the word must currently be absent (cut 0, no counts).
    fn place(&mut self, i: usize, c: usize) {
        for n in 1..=c {
            self.add_prefix(self.prefix_ids[i][n], 1);
        }
        for n in c..self.words[i].len() {
            self.add_suffix(self.suffix_ids[i][n], 1);
        }
        self.cuts[i] = c;
    }

    fn remove(&mut self, i: usize) {
        let c = self.cuts[i];
        for n in 1..=c {
            self.add_prefix(self.prefix_ids[i][n], -1);
        }
        for n in c..self.words[i].len() {
            self.add_suffix(self.suffix_ids[i][n], -1);
        }
    }

    fn add_prefix(&mut self, id: usize, delta: i32) {
        let before = self.prefix_count[id];
        let after = (before as i32 + delta) as u32;
        self.prefix_count[id] = after;
        match (before, after) {
            (0, _) => self.distinct_prefixes += 1,
            (_, 0) => self.distinct_prefixes -= 1,
            _ => {}
        }
    }

    fn add_suffix(&mut self, id: usize, delta: i32) {
        let before = self.suffix_count[id];
        let after = (before as i32 + delta) as u32;
        self.suffix_count[id] = after;
        match (before, after) {
            (0, _) => self.distinct_suffixes += 1,
            (_, 0) => self.distinct_suffixes -= 1,
            _ => {}
        }
    }

    /// Fitness change from moving word `i`'s cut one step right (`true`) or left.
    fn delta(&self, i: usize, right: bool) -> Option<isize> {
        let c = self.cuts[i];
        let k = self.k as isize;
        if right {
            if c == self.words[i].len() {
                return None;
            }
            // prefix w[..c+1] appears, suffix w[c..] disappears
            let gain = isize::from(self.prefix_count[self.prefix_ids[i][c + 1]] == 0);
            let loss = isize::from(self.suffix_count[self.suffix_ids[i][c]] == 1);
            Some(gain - k * loss)
        } else {
            if c == 0 {
                return None;
            }
            // prefix w[..c] disappears, suffix w[c-1..] appears
            let loss = isize::from(self.prefix_count[self.prefix_ids[i][c]] == 1);
            let gain = isize::from(self.suffix_count[self.suffix_ids[i][c - 1]] == 0);
            Some(k * gain - loss)
        }
    }

    fn shift(&mut self, i: usize, right: bool) {
        let c = self.cuts[i];
        if right {
            self.add_prefix(self.prefix_ids[i][c + 1], 1);
            self.add_suffix(self.suffix_ids[i][c], -1);
            self.cuts[i] = c + 1;
        } else {
            self.add_prefix(self.prefix_ids[i][c], -1);
            self.add_suffix(self.suffix_ids[i][c - 1], 1);
            self.cuts[i] = c - 1;
        }
    }

    fn resplit(&mut self, i: usize, c: usize) {
        self.remove(i);
        self.place(i, c);
    }

    /// Sweeps over all words, moving each cut by at most one position when the
    /// fitness does not increase. Stops after a sweep without strict improvement.
    fn descend(&mut self) {
        loop {
            let start = self.fitness();
            for i in 0..self.words.len() {
                let best = [false, true]
                    .into_iter()
                    .filter_map(|right| self.delta(i, right).map(|d| (d, right)))
                    .min_by_key(|&(d, _)| d);
                if let Some((d, right)) = best {
                    if d <= 0 {
                        self.shift(i, right);
                    }
                }
            }
            if self.fitness() >= start {
                return;
            }
        }
    }
}

/// Starting splitting of [`ils_optimize`] for `config`.
pub fn ils_initial(sample: &Sample, config: &IlsConfig) -> Splitting {
    match config.init {
        IlsInit::BestPrefix => split_best_prefix(sample),
        IlsInit::BestSuffix => split_best_suffix(sample),
        IlsInit::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            Splitting::uniform(sample, |w| rng.gen_range(0..=w.len()))
        }
    }
}

/// Iterated local search over split points minimising [`fitness`].
pub fn ils_optimize(sample: &Sample, k: usize, config: &IlsConfig) -> Result<Splitting, IlsError> {
    if config.max_iterations == 0 {
        return Err(IlsError::NoIterations);
    }
    if k == 0 {
        return Err(IlsError::ZeroStates);
    }
    let init = ils_initial(sample, config);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);
    if init.is_empty() {
        return Ok(init);
    }
    let strength = config.perturbation_strength.unwrap_or(init.len().div_ceil(10)).max(1);
    let mut state = FitnessState::new(&init.words, k, init.cuts.clone());
    let mut best_cuts = init.cuts.clone();
    let mut best_fitness = state.fitness();
    for _ in 0..config.max_iterations {
        state.descend();
        if state.fitness() < best_fitness {
            best_fitness = state.fitness();
            best_cuts = state.cuts.clone();
        }
        for (i, &c) in best_cuts.iter().enumerate() {
            if state.cuts[i] != c {
                state.resplit(i, c);
            }
        }
        for _ in 0..strength {
            let i = rng.gen_range(0..init.len());
            let c = rng.gen_range(0..=init.words[i].len());
            state.resplit(i, c);
        }
    }
    Ok(Splitting { words: init.words, cuts: best_cuts })
}
