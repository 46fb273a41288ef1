use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use crate::cnf::Cnf;
use crate::{dimacs, SolveError, SolveStatus};

/// A DIMACS solver run as a child process: `<program> <file.cnf>`.
///
/// The answer is read from the `s SATISFIABLE` / `s UNSATISFIABLE` line and
/// the model from `v` lines. Satisfying models are checked against the CNF,
/// so a misbehaving solver surfaces as [`SolveError::BackendFailure`].
#[derive(Debug, Clone)]
pub struct ExternalSolver {
    program: PathBuf,
}

impl ExternalSolver {
    pub fn new(program: PathBuf) -> ExternalSolver {
        ExternalSolver { program }
    }

    pub fn solve(&self, cnf: &Cnf, timeout: Duration) -> Result<SolveStatus, SolveError> {
        let mut file = tempfile::Builder::new().suffix(".cnf").tempfile()?;
        file.write_all(dimacs::emit(cnf).as_bytes())?;
        file.flush()?;

        let mut child = Command::new(&self.program)
            .arg(file.path())
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| SolveError::BackendFailure(format!("cannot start {}: {e}", self.program.display())))?;
        let mut stdout = child.stdout.take().expect("piped stdout");
        let reader = std::thread::spawn(move || {
            let mut text = String::new();
            stdout.read_to_string(&mut text).map(|_| text)
        });

        let deadline = Instant::now() + timeout;
        loop {
            if child.try_wait()?.is_some() {
                break;
            }
            if Instant::now() >= deadline {
                let _ = child.kill();
                let _ = child.wait();
                return Ok(SolveStatus::Timeout);
            }
            std::thread::sleep(Duration::from_millis(5));
        }
        let text = reader
            .join()
            .map_err(|_| SolveError::BackendFailure("output reader panicked".into()))??;
        let status = parse_solver_output(&text, cnf.num_vars())?;
        if let SolveStatus::Sat(model) = &status {
            if !cnf.is_satisfied_by(model) {
                return Err(SolveError::BackendFailure("reported model does not satisfy the formula".into()));
            }
        }
        Ok(status)
    }
}

/// Parses SAT-competition style output. Variables absent from `v` lines are
/// reported false.
pub fn parse_solver_output(text: &str, num_vars: usize) -> Result<SolveStatus, SolveError> {
    let mut answer: Option<bool> = None;
    let mut model = vec![false; num_vars];
    for line in text.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("s ") {
            answer = match rest.trim() {
                "SATISFIABLE" => Some(true),
                "UNSATISFIABLE" => Some(false),
                "UNKNOWN" => return Ok(SolveStatus::Timeout),
                other => return Err(SolveError::BackendFailure(format!("unexpected status `{other}`"))),
            };
        } else if let Some(rest) = line.strip_prefix("v ").or_else(|| (line == "v").then_some("")) {
            for token in rest.split_whitespace() {
                let value: i64 = token
                    .parse()
                    .map_err(|_| SolveError::BackendFailure(format!("bad model literal `{token}`")))?;
                let var = value.unsigned_abs() as usize;
                if var == 0 {
                    continue;
                }
                if var > num_vars {
                    return Err(SolveError::BackendFailure(format!("model literal {value} out of range")));
                }
                model[var - 1] = value > 0;
            }
        }
    }
    match answer {
        Some(true) => Ok(SolveStatus::Sat(model)),
        Some(false) => Ok(SolveStatus::Unsat),
        None => Err(SolveError::BackendFailure("no `s` status line in solver output".into())),
    }
}
