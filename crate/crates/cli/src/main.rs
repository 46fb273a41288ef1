use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use trisort::automaton::{Label, Nfa3};
use trisort::classifier::{decide, score_text, ClassifierKind, TieRule};
use trisort::corpus::parse_corpus;
use trisort::eval::{run_experiment, ExperimentPlan};
use trisort::freqprob::{build_wffa, to_probabilistic, WeightConfig};
use trisort::inference::{infer, InferenceOptions, InferenceRequest, InferenceStatus, KChoice, Model};
use trisort::regexp::{generate_regexp_benchmark, RegexpBenchmarkSpec};
use trisort::ProbabilisticNfaF64;
use trisort_sat::Backend;

/// Infer 3-sort NFAs from labelled words and classify with them.
#[derive(Debug, Parser)]
#[command(name = "trisort", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a labelled corpus from a regular expression.
    Gen(GenArgs),
    /// Infer an automaton consistent with a corpus.
    Infer(InferArgs),
    /// Turn an automaton into a probabilistic automaton using a corpus.
    Transform(TransformArgs),
    /// Score words with a probabilistic automaton.
    Classify(ClassifyArgs),
    /// Run an experiment plan and write CSV reports.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct SolverArgs {
    /// External DIMACS solver; overrides TRISORT_SAT_SOLVER. The built-in
    /// CDCL solver is used when neither is set.
    #[arg(long, value_name = "PATH")]
    solver: Option<PathBuf>,
}

impl SolverArgs {
    fn backend(&self) -> Backend {
        match &self.solver {
            Some(path) => Backend::External(path.clone()),
            None => Backend::from_env(),
        }
    }
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Pattern over single characters with `|`, `*`, `+`, `?`, groups and `[...]` classes.
    #[arg(long)]
    pattern: String,
    /// Number of words; half positive, half negative.
    #[arg(long, default_value_t = 200)]
    total: usize,
    #[arg(long, default_value_t = 1)]
    min_len: usize,
    #[arg(long, default_value_t = 15)]
    max_len: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Corpus file to write; stdout when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("states").required(true).args(["k", "min_k"]))]
struct InferArgs {
    /// Training corpus.
    #[arg(long)]
    corpus: PathBuf,
    /// P, S, Pstar, Sstar, ILS-rand, ILS-P or ILS-S, with `+2` for the
    /// layout with fixed final states.
    #[arg(long, default_value = "P")]
    model: Model,
    /// Number of states to try.
    #[arg(long)]
    k: Option<usize>,
    /// Search the smallest k from 1 up to this bound.
    #[arg(long, value_name = "K_MAX")]
    min_k: Option<usize>,
    /// Per-solve time limit in seconds.
    #[arg(long, default_value_t = 900.0)]
    timeout: f64,
    /// Seed for randomised splittings.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 500)]
    ils_iterations: usize,
    /// Drop the state-ordering constraints from the encoding.
    #[arg(long)]
    no_symmetry_breaking: bool,
    #[command(flatten)]
    solver: SolverArgs,
    /// Automaton used for classification. For `+2` models this is the
    /// automaton with fixed finals.
    #[arg(long, short)]
    out: PathBuf,
    /// Reduced k-state automaton of a `+2` model.
    #[arg(long)]
    reduced_out: Option<PathBuf>,
    /// JSON-lines record per solver attempt.
    #[arg(long)]
    stats: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TransformArgs {
    /// Automaton file written by `infer`.
    #[arg(long)]
    automaton: PathBuf,
    /// Corpus whose words provide the path frequencies.
    #[arg(long)]
    corpus: PathBuf,
    /// Stop weight from paths of positive words ending in an accepting state.
    #[arg(long, default_value_t = 1.0)]
    w_final_pos_acc: f64,
    /// Stop weight from paths of positive words ending in a whatever state.
    #[arg(long, default_value_t = 1.0)]
    w_final_pos_open: f64,
    /// Stop weight from paths of negative words ending in a rejecting state.
    #[arg(long, default_value_t = 1.0)]
    w_final_neg_rej: f64,
    /// Stop weight from paths of negative words ending in a whatever state.
    #[arg(long, default_value_t = 1.0)]
    w_final_neg_open: f64,
    /// Transition weight from paths of positive words ending in an accepting state.
    #[arg(long, default_value_t = 1.0)]
    w_trans_pos_acc: f64,
    /// Transition weight from paths of positive words ending in a whatever state.
    #[arg(long, default_value_t = 1.0)]
    w_trans_pos_open: f64,
    /// Transition weight from paths of negative words ending in a rejecting state.
    #[arg(long, default_value_t = 1.0)]
    w_trans_neg_rej: f64,
    /// Transition weight from paths of negative words ending in a whatever state.
    #[arg(long, default_value_t = 1.0)]
    w_trans_neg_open: f64,
    /// Probabilistic automaton file to write.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    /// Probabilistic automaton written by `transform`.
    #[arg(long)]
    pnfa: PathBuf,
    /// One word per line; blank lines are skipped.
    #[arg(long)]
    words: PathBuf,
    #[arg(long, default_value = "mm")]
    classifier: ClassifierKind,
    /// Decision when both scores are equal: pos or neg.
    #[arg(long, default_value = "neg")]
    tie: TieRule,
    /// TSV file to write; stdout when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Experiment plan of `key = value` lines.
    #[arg(long)]
    plan: PathBuf,
    /// Overrides the plan's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the plan's `timeout`, in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Directory for grid.csv, summary.csv and stats.jsonl.
    #[arg(long)]
    out_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("trisort: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Gen(args) => gen(args),
        Command::Infer(args) => run_infer(args),
        Command::Transform(args) => transform(args),
        Command::Classify(args) => classify(args),
        Command::Bench(args) => bench(args),
    }
}

fn read(path: &Path, stage: &str) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("{stage}: cannot read {}", path.display()))
}

fn write(path: &Path, text: &str, stage: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("{stage}: cannot write {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str, stage: &str) -> Result<()> {
    match out {
        Some(path) => write(path, text, stage),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn timeout(seconds: f64) -> Result<Duration> {
    Duration::try_from_secs_f64(seconds).ok().filter(|d| !d.is_zero()).context("timeout must be a positive number of seconds")
}

fn gen(args: GenArgs) -> Result<ExitCode> {
    let spec = RegexpBenchmarkSpec {
        pattern: args.pattern,
        total: args.total,
        min_len: args.min_len,
        max_len: args.max_len,
        seed: args.seed,
    };
    let corpus = generate_regexp_benchmark(&spec).context("generate")?;
    emit(args.out.as_deref(), &corpus.to_text(), "generate")?;
    Ok(ExitCode::SUCCESS)
}

fn run_infer(args: InferArgs) -> Result<ExitCode> {
    let corpus = parse_corpus(&read(&args.corpus, "corpus")?).context("corpus")?;
    let options = InferenceOptions {
        timeout: timeout(args.timeout)?,
        backend: args.solver.backend(),
        ils_iterations: args.ils_iterations,
        seed: args.seed,
        symmetry_breaking: !args.no_symmetry_breaking,
    };
    let k = match (args.k, args.min_k) {
        (Some(k), _) => KChoice::Fixed(k),
        (None, Some(k_max)) => KChoice::UpTo(k_max),
        (None, None) => unreachable!("clap requires one of --k and --min-k"),
    };
    let request = InferenceRequest { sample: corpus.sample(), model: args.model, k, options };
    let result = infer(&request).context("infer")?;
    if let Some(path) = &args.stats {
        write(path, &result.stats_jsonl(), "stats")?;
    }
    match &result.status {
        InferenceStatus::Found(found) => {
            write(&args.out, &found.classification_automaton().to_text(), "infer")?;
            if let Some(path) = &args.reduced_out {
                write(path, &found.nfa.to_text(), "infer")?;
            }
            Ok(ExitCode::SUCCESS)
        }
        InferenceStatus::Infeasible => bail!("infer: no consistent automaton with the requested number of states"),
        InferenceStatus::TimedOut => bail!("infer: solver timed out"),
    }
}

fn transform(args: TransformArgs) -> Result<ExitCode> {
    let nfa = Nfa3::parse(&read(&args.automaton, "automaton")?).context("automaton")?;
    let corpus = parse_corpus(&read(&args.corpus, "corpus")?).context("corpus")?;
    let weights = WeightConfig::new(
        [args.w_final_pos_acc, args.w_final_pos_open, args.w_final_neg_rej, args.w_final_neg_open],
        [args.w_trans_pos_acc, args.w_trans_pos_open, args.w_trans_neg_rej, args.w_trans_neg_open],
    )
    .context("weights")?;
    let pnfa = to_probabilistic(&build_wffa(&nfa, &corpus.sample(), weights));
    write(&args.out, &pnfa.to_text(), "transform")?;
    Ok(ExitCode::SUCCESS)
}

fn classify(args: ClassifyArgs) -> Result<ExitCode> {
    let pnfa = ProbabilisticNfaF64::parse(&read(&args.pnfa, "pnfa")?).context("pnfa")?;
    let words = read(&args.words, "words")?;
    let mut out = String::new();
    for word in words.lines().map(str::trim).filter(|w| !w.is_empty()) {
        let scores = score_text(&pnfa, word, args.classifier);
        let decision = match decide(&scores, args.tie) {
            Label::Positive => "positive",
            Label::Negative => "negative",
        };
        out.push_str(&format!("{word}\t{}\t{}\t{decision}\n", scores.positive, scores.negative));
    }
    emit(args.out.as_deref(), &out, "classify")?;
    Ok(ExitCode::SUCCESS)
}

fn bench(args: BenchArgs) -> Result<ExitCode> {
    let base = args.plan.parent().unwrap_or(Path::new("."));
    let mut plan = ExperimentPlan::parse(&read(&args.plan, "plan")?, base).context("plan")?;
    plan.backend = args.solver.backend();
    if let Some(seed) = args.seed {
        plan.seed = seed;
    }
    if let Some(seconds) = args.timeout {
        plan.timeout = timeout(seconds)?;
    }
    let report = run_experiment::<f64>(&plan).context("bench")?;
    fs::create_dir_all(&args.out_dir).with_context(|| format!("bench: cannot create {}", args.out_dir.display()))?;
    write(&args.out_dir.join("grid.csv"), &report.to_csv(), "bench")?;
    write(&args.out_dir.join("summary.csv"), &report.summary_csv(), "bench")?;
    write(&args.out_dir.join("stats.jsonl"), &report.stats_jsonl(), "bench")?;
    for cell in &report.missing {
        eprintln!("trisort: bench: missing {} split {} model {}: {}", cell.dataset, cell.split, cell.model, cell.reason);
    }
    Ok(if report.is_complete() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
