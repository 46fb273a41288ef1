use std::collections::BTreeMap;

use crate::formula::{Constraint, Formula};
use crate::lit::{Lit, Var};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CnfError {
    #[error("empty clause at position {0}")]
    EmptyClause(usize),
    #[error("literal {lit} exceeds variable count {num_vars}")]
    LiteralOutOfRange { lit: i32, num_vars: usize },
}

/// Clausal normal form.
///
/// Invariants: no clause is empty, no clause holds a literal and its negation,
/// no literal repeats inside a clause and every variable is `<= num_vars`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cnf {
    num_vars: usize,
    clauses: Vec<Vec<Lit>>,
}

impl Cnf {
    /// Builds a CNF, dropping tautologies and repeated literals.
    pub fn new(num_vars: usize, clauses: Vec<Vec<Lit>>) -> Result<Cnf, CnfError> {
        let mut out = Vec::with_capacity(clauses.len());
        for (idx, clause) in clauses.into_iter().enumerate() {
            if clause.is_empty() {
                return Err(CnfError::EmptyClause(idx));
            }
            if let Some(lit) = clause.iter().find(|l| l.var().index() >= num_vars) {
                return Err(CnfError::LiteralOutOfRange { lit: lit.to_dimacs(), num_vars });
            }
            if let Some(clause) = normalize(clause) {
                out.push(clause);
            }
        }
        Ok(Cnf { num_vars, clauses: out })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    pub fn is_satisfied_by(&self, model: &[bool]) -> bool {
        model.len() >= self.num_vars
            && self.clauses.iter().all(|c| c.iter().any(|l| l.eval(model)))
    }
}

/// Removes duplicate literals (keeping first occurrences); `None` for a tautology.
fn normalize(clause: Vec<Lit>) -> Option<Vec<Lit>> {
    let mut out: Vec<Lit> = Vec::with_capacity(clause.len());
    for lit in clause {
        if out.contains(&!lit) {
            return None;
        }
        if !out.contains(&lit) {
            out.push(lit);
        }
    }
    Some(out)
}

struct Lowering {
    num_vars: u32,
    clauses: Vec<Vec<Lit>>,
}

impl Lowering {
    fn fresh(&mut self) -> Var {
        self.num_vars += 1;
        Var::new(self.num_vars)
    }

    fn emit(&mut self, clause: Vec<Lit>) {
        if let Some(clause) = normalize(clause) {
            self.clauses.push(clause);
        }
    }

    fn contradiction(&mut self) {
        let g = self.fresh();
        self.emit(vec![g.pos()]);
        self.emit(vec![g.neg()]);
    }

    /// A literal equivalent to the conjunction `term` (which must be non-empty).
    fn conjunction(&mut self, term: &[Lit]) -> Lit {
        if let [single] = term {
            return *single;
        }
        let g = self.fresh().pos();
        self.define_and(g, term);
        g
    }

    /// Clauses for `lhs ↔ ⋀ term`.
    fn define_and(&mut self, lhs: Lit, term: &[Lit]) {
        for &l in term {
            self.emit(vec![!lhs, l]);
        }
        let mut back = vec![lhs];
        back.extend(term.iter().map(|&l| !l));
        self.emit(back);
    }

    fn lower(&mut self, constraint: &Constraint) {
        match constraint {
            Constraint::Clause(lits) if lits.is_empty() => self.contradiction(),
            Constraint::Clause(lits) => self.emit(lits.clone()),
            Constraint::Iff { lhs, terms } => {
                let lhs = *lhs;
                if terms.is_empty() {
                    self.emit(vec![!lhs]);
                } else if terms.iter().any(|t| t.is_empty()) {
                    self.emit(vec![lhs]);
                } else if let [term] = terms.as_slice() {
                    self.define_and(lhs, term);
                } else {
                    let gates: Vec<Lit> = terms.iter().map(|t| self.conjunction(t)).collect();
                    let mut forward = vec![!lhs];
                    forward.extend(gates.iter().copied());
                    self.emit(forward);
                    for g in gates {
                        self.emit(vec![lhs, !g]);
                    }
                }
            }
            Constraint::AnyOf(terms) => {
                if terms.is_empty() {
                    self.contradiction();
                } else if terms.iter().any(|t| t.is_empty()) {
                    // trivially true
                } else if let [term] = terms.as_slice() {
                    for &l in term {
                        self.emit(vec![l]);
                    }
                } else {
                    let gates: Vec<Lit> = terms.iter().map(|t| self.conjunction(t)).collect();
                    self.emit(gates);
                }
            }
        }
    }
}

/// Lowers `formula` to an equisatisfiable CNF.
///
/// Original variables keep their ids; auxiliary gate variables are numbered
/// after them. Projected onto the original variables the model set is
/// unchanged, since every auxiliary is fully defined by its inputs.
pub fn lower_to_cnf(formula: &Formula) -> Cnf {
    lower_with_census(formula).0
}

/// Per-family counts produced while lowering: `(clauses, auxiliary variables)`.
pub type LoweringCensus = BTreeMap<&'static str, (usize, usize)>;

/// Like [`lower_to_cnf`], also reporting clause and auxiliary-variable counts per family label.
pub fn lower_with_census(formula: &Formula) -> (Cnf, LoweringCensus) {
    let mut lowering = Lowering { num_vars: formula.num_vars() as u32, clauses: Vec::new() };
    let mut census = LoweringCensus::new();
    for (family, constraint) in formula.constraints() {
        let (clauses_before, vars_before) = (lowering.clauses.len(), lowering.num_vars);
        lowering.lower(constraint);
        let entry = census.entry(family).or_default();
        entry.0 += lowering.clauses.len() - clauses_before;
        entry.1 += (lowering.num_vars - vars_before) as usize;
    }
    let cnf = Cnf { num_vars: lowering.num_vars as usize, clauses: lowering.clauses };
    (cnf, census)
}
