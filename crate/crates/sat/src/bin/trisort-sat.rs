//! Standalone DIMACS solver following the SAT-competition output protocol.
//!
//! Usage: `trisort-sat <file.cnf>`. Exit status 10 for SAT, 20 for UNSAT,
//! 1 on errors.

use std::process::ExitCode;

use trisort_sat::{dimacs, CdclSolver, SolveStatus};

fn main() -> ExitCode {
    let Some(path) = std::env::args().nth(1) else {
        eprintln!("usage: trisort-sat <file.cnf>");
        return ExitCode::from(1);
    };
    let cnf = match std::fs::read_to_string(&path).map_err(|e| e.to_string()).and_then(|text| {
        dimacs::parse(&text).map_err(|e| e.to_string())
    }) {
        Ok(cnf) => cnf,
        Err(e) => {
            eprintln!("c error: {path}: {e}");
            return ExitCode::from(1);
        }
    };
    match CdclSolver::new(&cnf).solve(None) {
        SolveStatus::Sat(model) => {
            println!("s SATISFIABLE");
            let mut line = String::from("v");
            for (i, value) in model.iter().enumerate() {
                let lit = (i + 1) as i64;
                line.push_str(&format!(" {}", if *value { lit } else { -lit }));
            }
            println!("{line} 0");
            ExitCode::from(10)
        }
        SolveStatus::Unsat => {
            println!("s UNSATISFIABLE");
            ExitCode::from(20)
        }
        SolveStatus::Timeout => {
            println!("s UNKNOWN");
            ExitCode::from(0)
        }
    }
}
