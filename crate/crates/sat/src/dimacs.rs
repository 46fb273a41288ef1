//! DIMACS CNF text format.

use std::fmt::Write;

use crate::cnf::{Cnf, CnfError};
use crate::lit::Lit;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DimacsError {
    #[error("missing `p cnf` header")]
    MissingHeader,
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("header announces {expected} clauses, found {found}")]
    ClauseCount { expected: usize, found: usize },
    #[error(transparent)]
    Cnf(#[from] CnfError),
}

/// Writes `p cnf <vars> <clauses>` followed by one zero-terminated clause per line.
pub fn emit(cnf: &Cnf) -> String {
    let mut out = String::new();
    writeln!(out, "p cnf {} {}", cnf.num_vars(), cnf.clauses().len()).unwrap();
    for clause in cnf.clauses() {
        for lit in clause {
            write!(out, "{} ", lit.to_dimacs()).unwrap();
        }
        out.push_str("0\n");
    }
    out
}

/// Parses DIMACS CNF. Comment lines (`c ...`) are skipped and clauses may span lines.
pub fn parse(text: &str) -> Result<Cnf, DimacsError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<Lit> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            let fields: Vec<&str> = line.split_whitespace().collect();
            let syntax = |message: &str| DimacsError::Syntax { line: line_no, message: message.into() };
            if header.is_some() {
                return Err(syntax("duplicate header"));
            }
            if fields.len() != 4 || fields[1] != "cnf" {
                return Err(syntax("expected `p cnf <vars> <clauses>`"));
            }
            let vars = fields[2].parse().map_err(|_| syntax("bad variable count"))?;
            let count = fields[3].parse().map_err(|_| syntax("bad clause count"))?;
            header = Some((vars, count));
            continue;
        }
        if header.is_none() {
            return Err(DimacsError::MissingHeader);
        }
        for token in line.split_whitespace() {
            let value: i32 = token.parse().map_err(|_| DimacsError::Syntax {
                line: line_no,
                message: format!("bad literal `{token}`"),
            })?;
            if value == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                current.push(Lit::from_dimacs(value));
            }
        }
    }
    let (vars, count) = header.ok_or(DimacsError::MissingHeader)?;
    if !current.is_empty() {
        clauses.push(current);
    }
    if clauses.len() != count {
        return Err(DimacsError::ClauseCount { expected: count, found: clauses.len() });
    }
    Ok(Cnf::new(vars, clauses)?)
}
