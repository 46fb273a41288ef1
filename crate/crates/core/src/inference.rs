//! The inference pipeline: split, encode, solve, decode, verify.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::Serialize;
use trisort_sat::{lower_to_cnf, solve, Backend, SolveError, SolveStatus};

use crate::automaton::{is_consistent, AutomatonError, Nfa3, PathBudget, Sample};
use crate::decode::{decode_nfa, DecodeError, PossibleFinals};
use crate::encoding::{encode_core_k, encode_core_k2, EncodingError, ModelKind};
use crate::splitting::{
    ils_optimize, split_all_prefix, split_all_suffix, split_best_prefix, split_best_suffix, IlsConfig, IlsError,
    IlsInit, Splitting,
};

/// How words are split before encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Splitter {
    Prefix,
    Suffix,
    BestPrefix,
    BestSuffix,
    IlsRandom,
    IlsPrefix,
    IlsSuffix,
}

impl Splitter {
    pub const ALL: [Splitter; 7] = [
        Splitter::Prefix,
        Splitter::Suffix,
        Splitter::BestPrefix,
        Splitter::BestSuffix,
        Splitter::IlsRandom,
        Splitter::IlsPrefix,
        Splitter::IlsSuffix,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Splitter::Prefix => "P",
            Splitter::Suffix => "S",
            Splitter::BestPrefix => "Pstar",
            Splitter::BestSuffix => "Sstar",
            Splitter::IlsRandom => "ILS-rand",
            Splitter::IlsPrefix => "ILS-P",
            Splitter::IlsSuffix => "ILS-S",
        }
    }

    fn ils_init(self) -> Option<IlsInit> {
        match self {
            Splitter::IlsRandom => Some(IlsInit::Random),
            Splitter::IlsPrefix => Some(IlsInit::BestPrefix),
            Splitter::IlsSuffix => Some(IlsInit::BestSuffix),
            _ => None,
        }
    }
}

/// A splitter paired with an encoding layout, written `P`, `Sstar+2`, `ILS-P`, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Model {
    pub splitter: Splitter,
    pub kind: ModelKind,
}

impl Model {
    pub fn new(splitter: Splitter, kind: ModelKind) -> Model {
        Model { splitter, kind }
    }

    /// The four non-ILS splitters in both layouts.
    pub fn basic() -> Vec<Model> {
        let splitters = [Splitter::Prefix, Splitter::Suffix, Splitter::BestPrefix, Splitter::BestSuffix];
        [ModelKind::K, ModelKind::KPlus2]
            .into_iter()
            .flat_map(|kind| splitters.into_iter().map(move |s| Model::new(s, kind)))
            .collect()
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.splitter.name())?;
        if self.kind == ModelKind::KPlus2 {
            f.write_str("+2")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown model `{0}`; expected P, S, Pstar, Sstar, ILS-rand, ILS-P or ILS-S, optionally followed by +2")]
pub struct ParseModelError(String);

impl FromStr for Model {
    type Err = ParseModelError;

    fn from_str(text: &str) -> Result<Model, ParseModelError> {
        let (base, kind) = match text.strip_suffix("+2") {
            Some(base) => (base, ModelKind::KPlus2),
            None => (text, ModelKind::K),
        };
        Splitter::ALL
            .into_iter()
            .find(|s| s.name() == base)
            .map(|splitter| Model { splitter, kind })
            .ok_or_else(|| ParseModelError(text.to_owned()))
    }
}

/// Solver and search settings shared by every attempt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InferenceOptions {
    pub timeout: Duration,
    pub backend: Backend,
    pub ils_iterations: usize,
    pub seed: u64,
    /// Adds breadth-first ordering constraints over the states.
    pub symmetry_breaking: bool,
}

impl Default for InferenceOptions {
    fn default() -> Self {
        InferenceOptions {
            timeout: Duration::from_secs(15 * 60),
            backend: Backend::Internal,
            ils_iterations: 500,
            seed: 0,
            symmetry_breaking: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KChoice {
    Fixed(usize),
    /// Smallest k in `1..=k_max`.
    UpTo(usize),
}

#[derive(Debug, Clone)]
pub struct InferenceRequest {
    pub sample: Sample,
    pub model: Model,
    pub k: KChoice,
    pub options: InferenceOptions,
}

#[derive(Debug, thiserror::Error)]
pub enum InferenceError {
    #[error("k must be at least 1")]
    ZeroStates,
    #[error("encoding: {0}")]
    Encoding(#[from] EncodingError),
    #[error("splitting: {0}")]
    Splitting(#[from] IlsError),
    #[error("solver: {0}")]
    Solve(#[from] SolveError),
    #[error("decoding: {0}")]
    Decode(#[from] DecodeError),
    #[error("simulation: {0}")]
    Automaton(#[from] AutomatonError),
    #[error("decoded {k}-state automaton is not consistent with the sample")]
    Inconsistent { k: usize },
    #[error("reduced {k}-state automaton is not consistent with the sample")]
    ReductionInconsistent { k: usize },
}

/// One solver call.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Attempt {
    pub model: String,
    pub k: usize,
    pub status: &'static str,
    pub seconds: f64,
    pub clauses: usize,
    pub variables: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Found {
    /// The k-state automaton; for (k+2) models, the reduction.
    pub nfa: Nfa3,
    pub k_used: usize,
    /// The (k+2)-state automaton of (k+2) models.
    pub raw: Option<Nfa3>,
    pub possible: Option<PossibleFinals>,
}

impl Found {
    /// Automaton handed to the frequency stage: the raw (k+2) automaton when
    /// there is one, the k-state automaton otherwise.
    pub fn classification_automaton(&self) -> &Nfa3 {
        self.raw.as_ref().unwrap_or(&self.nfa)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InferenceStatus {
    Found(Found),
    Infeasible,
    TimedOut,
}

#[derive(Debug, Clone)]
pub struct InferenceResult {
    pub status: InferenceStatus,
    pub attempts: Vec<Attempt>,
}

impl InferenceResult {
    pub fn found(&self) -> Option<&Found> {
        match &self.status {
            InferenceStatus::Found(f) => Some(f),
            _ => None,
        }
    }

    /// One JSON object per attempt, newline-terminated.
    pub fn stats_jsonl(&self) -> String {
        self.attempts
            .iter()
            .map(|a| serde_json::to_string(a).expect("attempts serialise") + "\n")
            .collect()
    }
}

/// Splitting a model uses at `k`.
pub fn splitting_for(sample: &Sample, model: Model, k: usize, options: &InferenceOptions) -> Result<Splitting, IlsError> {
    Ok(match model.splitter {
        Splitter::Prefix => split_all_prefix(sample),
        Splitter::Suffix => split_all_suffix(sample),
        Splitter::BestPrefix => split_best_prefix(sample),
        Splitter::BestSuffix => split_best_suffix(sample),
        other => {
            let mut config = IlsConfig::new(other.ils_init().expect("ILS splitter"), options.seed);
            config.max_iterations = options.ils_iterations;
            ils_optimize(sample, k, &config)?
        }
    })
}

/// Runs one attempt at a fixed k.
fn attempt(sample: &Sample, model: Model, k: usize, options: &InferenceOptions) -> Result<(Attempt, InferenceStatus), InferenceError> {
    if k == 0 {
        return Err(InferenceError::ZeroStates);
    }
    let splitting = splitting_for(sample, model, k, options)?;
    let mut artifacts = match model.kind {
        ModelKind::K => encode_core_k(sample, &splitting, k)?,
        ModelKind::KPlus2 => encode_core_k2(sample, &splitting, k)?,
    };
    if options.symmetry_breaking {
        artifacts.break_symmetries();
    }
    let cnf = lower_to_cnf(&artifacts.formula);
    let outcome = solve(&cnf, options.timeout, &options.backend)?;
    let record = Attempt {
        model: model.to_string(),
        k,
        status: outcome.status.label(),
        seconds: outcome.wall_time.as_secs_f64(),
        clauses: outcome.clauses,
        variables: outcome.variables,
    };
    let status = match outcome.status {
        SolveStatus::Unsat => InferenceStatus::Infeasible,
        SolveStatus::Timeout => InferenceStatus::TimedOut,
        SolveStatus::Sat(model_bits) => {
            let decoded = decode_nfa(&model_bits, &artifacts)?;
            // Trellis counts saturate, so verification needs no path cap.
            let unbounded = PathBudget(u64::MAX);
            if !is_consistent(&decoded.nfa, sample, unbounded)? {
                return Err(InferenceError::Inconsistent { k: decoded.nfa.k() });
            }
            match decoded.possible {
                None => InferenceStatus::Found(Found { nfa: decoded.nfa, k_used: k, raw: None, possible: None }),
                Some(possible) => {
                    let reduced = reduce_k2_to_k(&decoded.nfa, &possible, sample)?;
                    InferenceStatus::Found(Found {
                        nfa: reduced,
                        k_used: k,
                        raw: Some(decoded.nfa),
                        possible: Some(possible),
                    })
                }
            }
        }
    };
    Ok((record, status))
}

/// Runs the request: one attempt for a fixed k, or the minimal-k search.
pub fn infer(request: &InferenceRequest) -> Result<InferenceResult, InferenceError> {
    match request.k {
        KChoice::Fixed(k) => {
            let (record, status) = attempt(&request.sample, request.model, k, &request.options)?;
            Ok(InferenceResult { status, attempts: vec![record] })
        }
        KChoice::UpTo(k_max) => find_min_k(&request.sample, request.model, k_max, &request.options),
    }
}

/// Tries `k = 1, 2, ..., k_max` and stops at the first satisfiable k or the
/// first timeout.
pub fn find_min_k(sample: &Sample, model: Model, k_max: usize, options: &InferenceOptions) -> Result<InferenceResult, InferenceError> {
    if k_max == 0 {
        return Err(InferenceError::ZeroStates);
    }
    let mut attempts = Vec::new();
    for k in 1..=k_max {
        let (record, status) = attempt(sample, model, k, options)?;
        attempts.push(record);
        if status != InferenceStatus::Infeasible {
            return Ok(InferenceResult { status, attempts });
        }
    }
    Ok(InferenceResult { status: InferenceStatus::Infeasible, attempts })
}

/// Drops the two fixed finals of a (k+2) automaton and their incoming
/// transitions, then makes the possible finals final.
pub fn reduce_k2_to_k(nfa_k2: &Nfa3, possible: &PossibleFinals, sample: &Sample) -> Result<Nfa3, InferenceError> {
    let k = nfa_k2.k() - 2;
    let transitions = nfa_k2.transitions().iter().copied().filter(|t| t.from < k && t.to < k);
    let reduced = Nfa3::new(
        k,
        nfa_k2.alphabet().clone(),
        possible.accepting.iter().copied(),
        possible.rejecting.iter().copied(),
        transitions,
    )?;
    if !is_consistent(&reduced, sample, PathBudget(u64::MAX))? {
        return Err(InferenceError::ReductionInconsistent { k });
    }
    Ok(reduced)
}
