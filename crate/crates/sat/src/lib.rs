//! Propositional plumbing for the automaton inference pipeline.
//!
//! The crate covers four concerns:
//!
//! * [`Formula`]: a conjunction of clauses and structural gates (biconditionals
//!   and disjunctions of conjunctions) as produced by an encoder.
//! * [`Cnf`] and [`lower_to_cnf`]: Tseitin-style lowering of a formula into
//!   clausal form, with auxiliary variables appended after the originals.
//! * [`dimacs`]: bit-exact DIMACS CNF emission and parsing.
//! * [`solve`]: a pluggable backend, either the embedded CDCL engine
//!   ([`CdclSolver`]) or an external process speaking the SAT-competition
//!   output protocol.

mod cdcl;
mod cnf;
pub mod dimacs;
mod external;
mod formula;
mod lit;

use std::path::PathBuf;
use std::time::{Duration, Instant};

pub use cdcl::{CdclSolver, SolverStats};
pub use cnf::{lower_to_cnf, lower_with_census, Cnf, CnfError, LoweringCensus};
pub use external::{parse_solver_output, ExternalSolver};
pub use formula::{Constraint, Formula};
pub use lit::{Lit, Var};

/// Environment variable naming an external DIMACS solver executable.
pub const SOLVER_ENV: &str = "TRISORT_SAT_SOLVER";

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error("solver timeout must be positive")]
    InvalidTimeout,
    #[error("external solver failure: {0}")]
    BackendFailure(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Answer of a single solver run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveStatus {
    /// Model indexed by variable: `model[v - 1]` is the value of variable `v`.
    Sat(Vec<bool>),
    Unsat,
    Timeout,
}

impl SolveStatus {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveStatus::Sat(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            SolveStatus::Sat(_) => "sat",
            SolveStatus::Unsat => "unsat",
            SolveStatus::Timeout => "timeout",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub wall_time: Duration,
    pub clauses: usize,
    pub variables: usize,
}

impl SolveOutcome {
    /// Value of `var` in the model, if the outcome is satisfiable.
    pub fn value(&self, var: Var) -> Option<bool> {
        match &self.status {
            SolveStatus::Sat(model) => model.get(var.index()).copied(),
            _ => None,
        }
    }
}

/// Which engine answers [`solve`] calls.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum Backend {
    #[default]
    Internal,
    External(PathBuf),
}

impl Backend {
    /// External backend if [`SOLVER_ENV`] is set, internal otherwise.
    pub fn from_env() -> Backend {
        match std::env::var_os(SOLVER_ENV) {
            Some(path) if !path.is_empty() => Backend::External(PathBuf::from(path)),
            _ => Backend::Internal,
        }
    }
}

/// Solves `cnf` within `timeout` using `backend`.
pub fn solve(cnf: &Cnf, timeout: Duration, backend: &Backend) -> Result<SolveOutcome, SolveError> {
    if timeout.is_zero() {
        return Err(SolveError::InvalidTimeout);
    }
    let start = Instant::now();
    let status = match backend {
        Backend::Internal => {
            let mut solver = CdclSolver::new(cnf);
            solver.solve(Some(start + timeout))
        }
        Backend::External(program) => ExternalSolver::new(program.clone()).solve(cnf, timeout)?,
    };
    Ok(SolveOutcome {
        status,
        wall_time: start.elapsed(),
        clauses: cnf.clauses().len(),
        variables: cnf.num_vars(),
    })
}
