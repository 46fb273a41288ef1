//! Metrics, experiment plans and the evaluation grid.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use rayon::prelude::*;
use trisort_sat::Backend;

use crate::automaton::{Label, Sample, Word};
use crate::classifier::{decide, score_in, ClassifierKind, TieRule};
use crate::corpus::{parse_corpus, split_train_test, CorpusError, LabeledCorpus, SplitError};
use crate::freqprob::{compute_frequencies, to_probabilistic, weighted_from_tables, WeightConfig};
use crate::inference::{find_min_k, Attempt, InferenceOptions, InferenceStatus, Model};
use crate::regexp::{generate_regexp_benchmark, RegexpBenchmarkSpec, RegexpError};
use crate::scalar::Scalar;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("{decisions} decisions for {labels} labels")]
    LengthMismatch { decisions: usize, labels: usize },
    #[error("empty test set")]
    EmptyTestSet,
    #[error("plan line {line}: {message}")]
    Plan { line: usize, message: String },
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("corpus: {0}")]
    Corpus(#[from] CorpusError),
    #[error("benchmark generation: {0}")]
    Generate(#[from] RegexpError),
    #[error("split {fraction}: {source}")]
    Split { fraction: f64, source: SplitError },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Confusion {
    pub true_pos: usize,
    pub true_neg: usize,
    pub false_pos: usize,
    pub false_neg: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.true_pos + self.true_neg + self.false_pos + self.false_neg
    }

    pub fn record(&mut self, decision: Label, label: Label) {
        match (decision, label) {
            (Label::Positive, Label::Positive) => self.true_pos += 1,
            (Label::Negative, Label::Negative) => self.true_neg += 1,
            (Label::Positive, Label::Negative) => self.false_pos += 1,
            (Label::Negative, Label::Positive) => self.false_neg += 1,
        }
    }
}

pub fn confusion(decisions: &[Label], labels: &[Label]) -> Result<Confusion, EvalError> {
    if decisions.len() != labels.len() {
        return Err(EvalError::LengthMismatch { decisions: decisions.len(), labels: labels.len() });
    }
    let mut c = Confusion::default();
    for (&d, &l) in decisions.iter().zip(labels) {
        c.record(d, l);
    }
    Ok(c)
}

pub fn accuracy(c: &Confusion) -> Result<f64, EvalError> {
    match c.total() {
        0 => Err(EvalError::EmptyTestSet),
        total => Ok((c.true_pos + c.true_neg) as f64 / total as f64),
    }
}

/// Zero when there are no positives, predicted or actual.
pub fn f1(c: &Confusion) -> f64 {
    let denominator = 2 * c.true_pos + c.false_pos + c.false_neg;
    if denominator == 0 {
        0.0
    } else {
        (2 * c.true_pos) as f64 / denominator as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CorpusSource {
    File(PathBuf),
    Regexp(RegexpBenchmarkSpec),
}

/// An experiment: one corpus, evaluated at each split fraction with every
/// model, weight assignment and classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub dataset: String,
    pub source: CorpusSource,
    pub splits: Vec<f64>,
    pub models: Vec<Model>,
    pub classifiers: Vec<ClassifierKind>,
    /// Weight assignments as bitmasks, see [`WeightConfig::from_bitmask`].
    pub weights: Vec<u8>,
    pub timeout: Duration,
    pub k_max: usize,
    pub seed: u64,
    pub ils_iterations: usize,
    pub tie: TieRule,
    pub symmetry_breaking: bool,
    pub backend: Backend,
}

impl ExperimentPlan {
    /// Parses `key = value` lines; `#` starts a comment. Relative corpus
    /// paths are resolved against `base`.
    ///
    /// Keys: `dataset`, `corpus` or `pattern` (with `total`, `min_len`,
    /// `max_len`, `corpus_seed`), `splits`, `models`, `classifiers`,
    /// `weights` (`all` or bitmasks), `timeout` (seconds), `k_max`, `seed`,
    /// `ils_iterations`, `tie`, `symmetry_breaking`.
    pub fn parse(text: &str, base: &Path) -> Result<ExperimentPlan, EvalError> {
        let mut values: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let plan_error = |message: String| EvalError::Plan { line: idx + 1, message };
            let (key, value) = line.split_once('=').ok_or_else(|| plan_error("expected `key = value`".into()))?;
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(plan_error(format!("unknown key `{key}`")));
            }
            if values.insert(key, (idx + 1, value.trim())).is_some() {
                return Err(plan_error(format!("duplicate key `{key}`")));
            }
        }
        let get = |key: &str| values.get(key).copied();
        let field = |key: &str, default: &'static str| get(key).unwrap_or((0, default));
        fn parsed<V: std::str::FromStr>(key: &str, (line, text): (usize, &str)) -> Result<V, EvalError> {
            text.trim().parse().map_err(|_| EvalError::Plan { line, message: format!("bad value `{text}` for `{key}`") })
        }
        fn list<V: std::str::FromStr>(key: &str, (line, text): (usize, &str)) -> Result<Vec<V>, EvalError> {
            let items = text
                .split(',')
                .map(|item| parsed(key, (line, item)))
                .collect::<Result<Vec<V>, _>>()?;
            if items.is_empty() {
                return Err(EvalError::Plan { line, message: format!("`{key}` is empty") });
            }
            Ok(items)
        }

        let source = match (get("corpus"), get("pattern")) {
            (Some((_, path)), None) => CorpusSource::File(base.join(path)),
            (None, Some((_, pattern))) => CorpusSource::Regexp(RegexpBenchmarkSpec {
                pattern: pattern.to_owned(),
                total: parsed("total", field("total", "200"))?,
                min_len: parsed("min_len", field("min_len", "1"))?,
                max_len: parsed("max_len", field("max_len", "15"))?,
                seed: parsed("corpus_seed", field("corpus_seed", "0"))?,
            }),
            _ => return Err(EvalError::Plan { line: 0, message: "exactly one of `corpus` and `pattern` is required".into() }),
        };
        let weights = match field("weights", "all") {
            (_, "all") => (0..=255u8).collect(),
            entry => list("weights", entry)?,
        };
        let timeout: f64 = parsed("timeout", field("timeout", "900"))?;
        if !(timeout > 0.0 && timeout.is_finite()) {
            return Err(EvalError::Plan { line: field("timeout", "").0, message: "timeout must be positive".into() });
        }
        let models: Vec<String> = list("models", field("models", "P"))?;
        let models = models
            .iter()
            .map(|m| m.trim().parse::<Model>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| EvalError::Plan { line: field("models", "").0, message: e.to_string() })?;
        let tie: String = parsed("tie", field("tie", "neg"))?;
        let tie = tie.parse().map_err(|message| EvalError::Plan { line: field("tie", "").0, message })?;
        Ok(ExperimentPlan {
            dataset: field("dataset", "dataset").1.to_owned(),
            source,
            splits: list("splits", field("splits", "0.5"))?,
            models,
            classifiers: list("classifiers", field("classifiers", "mm,ma,sm,sa"))?,
            weights,
            timeout: Duration::from_secs_f64(timeout),
            k_max: parsed("k_max", field("k_max", "10"))?,
            seed: parsed("seed", field("seed", "0"))?,
            ils_iterations: parsed("ils_iterations", field("ils_iterations", "500"))?,
            tie,
            symmetry_breaking: parsed("symmetry_breaking", field("symmetry_breaking", "true"))?,
            backend: Backend::Internal,
        })
    }

    pub fn load_corpus(&self) -> Result<LabeledCorpus, EvalError> {
        match &self.source {
            CorpusSource::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| EvalError::Io { path: path.clone(), source })?;
                Ok(parse_corpus(&text)?)
            }
            CorpusSource::Regexp(spec) => Ok(generate_regexp_benchmark(spec)?),
        }
    }

    fn inference_options(&self) -> InferenceOptions {
        InferenceOptions {
            timeout: self.timeout,
            backend: self.backend.clone(),
            ils_iterations: self.ils_iterations,
            seed: self.seed,
            symmetry_breaking: self.symmetry_breaking,
        }
    }
}

const KNOWN_KEYS: [&str; 17] = [
    "dataset",
    "corpus",
    "pattern",
    "total",
    "min_len",
    "max_len",
    "corpus_seed",
    "splits",
    "models",
    "classifiers",
    "weights",
    "timeout",
    "k_max",
    "seed",
    "ils_iterations",
    "tie",
    "symmetry_breaking",
];

/// One grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub dataset: String,
    pub split: f64,
    pub model: String,
    pub classifier: ClassifierKind,
    pub weights: u8,
    pub confusion: Confusion,
    pub accuracy: f64,
    pub f1: f64,
}

/// A (split, model) pair for which no automaton was inferred.
#[derive(Debug, Clone, PartialEq)]
pub struct MissingCell {
    pub dataset: String,
    pub split: f64,
    pub model: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub rows: Vec<ReportRow>,
    pub missing: Vec<MissingCell>,
    /// Solver attempts per split.
    pub attempts: Vec<(f64, Attempt)>,
}

/// Best accuracy of a group of cells with its F1.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    /// `model-split` (all weights and classifiers) or `model-classifier`
    /// (all weights and splits).
    pub aggregation: &'static str,
    pub dataset: String,
    pub split: Option<f64>,
    pub model: String,
    pub classifier: Option<ClassifierKind>,
    pub accuracy: f64,
    /// Best F1 among the cells reaching the best accuracy.
    pub f1: f64,
    /// Some cell of the group has a higher F1 than `f1`.
    pub f1_elsewhere: bool,
}

fn group_best<'a>(rows: impl Iterator<Item = &'a ReportRow>) -> Option<(f64, f64, bool)> {
    let rows: Vec<&ReportRow> = rows.collect();
    let best_acc = rows.iter().map(|r| r.accuracy).fold(None, |m: Option<f64>, a| Some(m.map_or(a, |m| m.max(a))))?;
    let f1_at_best = rows.iter().filter(|r| r.accuracy == best_acc).map(|r| r.f1).fold(0.0, f64::max);
    let best_f1 = rows.iter().map(|r| r.f1).fold(0.0, f64::max);
    Some((best_acc, f1_at_best, best_f1 > f1_at_best))
}

impl Report {
    pub fn is_complete(&self) -> bool {
        self.missing.is_empty()
    }

    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut out = Vec::new();
        let mut by_split: Vec<(&str, f64, &str)> = Vec::new();
        let mut by_classifier: Vec<(&str, &str, ClassifierKind)> = Vec::new();
        for r in &self.rows {
            let key = (r.dataset.as_str(), r.split, r.model.as_str());
            if !by_split.contains(&key) {
                by_split.push(key);
            }
            let key = (r.dataset.as_str(), r.model.as_str(), r.classifier);
            if !by_classifier.contains(&key) {
                by_classifier.push(key);
            }
        }
        for (dataset, split, model) in by_split {
            let group = self.rows.iter().filter(|r| r.dataset == dataset && r.split == split && r.model == model);
            if let Some((accuracy, f1, f1_elsewhere)) = group_best(group) {
                out.push(SummaryRow {
                    aggregation: "model-split",
                    dataset: dataset.to_owned(),
                    split: Some(split),
                    model: model.to_owned(),
                    classifier: None,
                    accuracy,
                    f1,
                    f1_elsewhere,
                });
            }
        }
        for (dataset, model, classifier) in by_classifier {
            let group = self.rows.iter().filter(|r| r.dataset == dataset && r.model == model && r.classifier == classifier);
            if let Some((accuracy, f1, f1_elsewhere)) = group_best(group) {
                out.push(SummaryRow {
                    aggregation: "model-classifier",
                    dataset: dataset.to_owned(),
                    split: None,
                    model: model.to_owned(),
                    classifier: Some(classifier),
                    accuracy,
                    f1,
                    f1_elsewhere,
                });
            }
        }
        out
    }

    /// Every grid cell at full precision.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "dataset", "split", "model", "classifier", "weights-bitmask", "accuracy", "f1", "TP", "TN", "FP", "FN",
        ])
        .unwrap();
        for r in &self.rows {
            let c = &r.confusion;
            w.write_record([
                r.dataset.clone(),
                r.split.to_string(),
                r.model.clone(),
                r.classifier.to_string(),
                r.weights.to_string(),
                r.accuracy.to_string(),
                r.f1.to_string(),
                c.true_pos.to_string(),
                c.true_neg.to_string(),
                c.false_pos.to_string(),
                c.false_neg.to_string(),
            ])
            .unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }

    /// Best cells rounded to two decimals; `*` marks a better F1 elsewhere
    /// in the group. Missing inferences appear with empty metrics.
    pub fn summary_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["aggregation", "dataset", "split", "model", "classifier", "accuracy", "f1", "flag", "status"]).unwrap();
        for s in self.summary() {
            w.write_record([
                s.aggregation.to_owned(),
                s.dataset,
                s.split.map_or("all".into(), |f| f.to_string()),
                s.model,
                s.classifier.map_or("all".into(), |c| c.to_string()),
                format!("{:.2}", s.accuracy),
                format!("{:.2}", s.f1),
                if s.f1_elsewhere { "*".into() } else { String::new() },
                "ok".into(),
            ])
            .unwrap();
        }
        for m in &self.missing {
            w.write_record([
                "model-split".to_owned(),
                m.dataset.clone(),
                m.split.to_string(),
                m.model.clone(),
                "all".into(),
                String::new(),
                String::new(),
                String::new(),
                format!("missing: {}", m.reason),
            ])
            .unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }

    /// Solver attempts as JSON lines, each tagged with its split.
    pub fn stats_jsonl(&self) -> String {
        self.attempts
            .iter()
            .map(|(split, a)| {
                let mut value = serde_json::to_value(a).expect("attempts serialise");
                value["split"] = serde_json::json!(split);
                value.to_string() + "\n"
            })
            .collect()
    }
}

/// Evaluates every weight assignment and classifier on one inferred automaton.
#[allow(clippy::too_many_arguments)]
fn grid_rows<T: Scalar>(
    plan: &ExperimentPlan,
    split: f64,
    model: &str,
    nfa: &crate::automaton::Nfa3,
    train: &Sample,
    test: &Sample,
) -> Vec<ReportRow> {
    let tables = compute_frequencies(nfa, train);
    let words: Vec<(Label, &Word)> = test.labelled().collect();
    let cells: Vec<(u8, ClassifierKind)> =
        plan.weights.iter().flat_map(|&w| plan.classifiers.iter().map(move |&c| (w, c))).collect();
    cells
        .par_iter()
        .map(|&(mask, kind)| {
            let wffa = weighted_from_tables(nfa, tables.clone(), WeightConfig::<T>::from_bitmask(mask));
            let pnfa = to_probabilistic(&wffa);
            let mut c = Confusion::default();
            for &(label, word) in &words {
                let decision = decide(&score_in(&pnfa, word, test.alphabet(), kind), plan.tie);
                c.record(decision, label);
            }
            ReportRow {
                dataset: plan.dataset.clone(),
                split,
                model: model.to_owned(),
                classifier: kind,
                weights: mask,
                confusion: c,
                accuracy: accuracy(&c).expect("split leaves a nonempty test set"),
                f1: f1(&c),
            }
        })
        .collect()
}

/// Infers once per (split, model) and evaluates the whole grid on the test
/// part. Failed inferences become [`MissingCell`]s.
pub fn run_experiment<T: Scalar>(plan: &ExperimentPlan) -> Result<Report, EvalError> {
    let corpus = plan.load_corpus()?;
    let options = plan.inference_options();
    let mut report = Report { rows: Vec::new(), missing: Vec::new(), attempts: Vec::new() };
    for &fraction in &plan.splits {
        let (train, test) = split_train_test(&corpus, fraction).map_err(|source| EvalError::Split { fraction, source })?;
        for &model in &plan.models {
            let name = model.to_string();
            let missing = |reason: String| MissingCell { dataset: plan.dataset.clone(), split: fraction, model: name.clone(), reason };
            let result = match find_min_k(&train, model, plan.k_max, &options) {
                Ok(result) => result,
                Err(e) => {
                    report.missing.push(missing(e.to_string()));
                    continue;
                }
            };
            report.attempts.extend(result.attempts.iter().cloned().map(|a| (fraction, a)));
            match &result.status {
                InferenceStatus::Found(found) => {
                    let nfa = found.classification_automaton();
                    report.rows.extend(grid_rows::<T>(plan, fraction, &name, nfa, &train, &test));
                }
                InferenceStatus::Infeasible => report.missing.push(missing(format!("no automaton with at most {} states", plan.k_max))),
                InferenceStatus::TimedOut => report.missing.push(missing("solver timed out".into())),
            }
        }
    }
    Ok(report)
}
