use crate::lit::{Lit, Var};

/// One conjunct of a [`Formula`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Constraint {
    /// Plain disjunction of literals.
    Clause(Vec<Lit>),
    /// `lhs ↔ ⋁_t ⋀ terms[t]`.
    Iff { lhs: Lit, terms: Vec<Vec<Lit>> },
    /// `⋁_t ⋀ terms[t]`. An empty term is `true`; an empty term list is `false`.
    AnyOf(Vec<Vec<Lit>>),
}

impl Constraint {
    /// Literals mentioned by the constraint.
    pub fn literals(&self) -> Box<dyn Iterator<Item = Lit> + '_> {
        match self {
            Constraint::Clause(lits) => Box::new(lits.iter().copied()),
            Constraint::Iff { lhs, terms } => {
                Box::new(std::iter::once(*lhs).chain(terms.iter().flatten().copied()))
            }
            Constraint::AnyOf(terms) => Box::new(terms.iter().flatten().copied()),
        }
    }

    pub fn eval(&self, model: &[bool]) -> bool {
        let dnf = |terms: &[Vec<Lit>]| terms.iter().any(|t| t.iter().all(|l| l.eval(model)));
        match self {
            Constraint::Clause(lits) => lits.iter().any(|l| l.eval(model)),
            Constraint::Iff { lhs, terms } => lhs.eval(model) == dnf(terms),
            Constraint::AnyOf(terms) => dnf(terms),
        }
    }
}

/// A labelled conjunction of constraints over variables `1..=num_vars`.
///
/// Labels name the constraint family a conjunct came from; they only matter
/// for diagnostics such as per-family clause counts.
#[derive(Debug, Clone, Default)]
pub struct Formula {
    num_vars: u32,
    constraints: Vec<(&'static str, Constraint)>,
}

impl Formula {
    pub fn new() -> Formula {
        Formula::default()
    }

    pub fn new_var(&mut self) -> Var {
        self.num_vars += 1;
        Var::new(self.num_vars)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars as usize
    }

    pub fn push(&mut self, family: &'static str, constraint: Constraint) {
        debug_assert!(
            constraint.literals().all(|l| l.var().id() <= self.num_vars),
            "constraint mentions an unallocated variable"
        );
        self.constraints.push((family, constraint));
    }

    pub fn clause(&mut self, family: &'static str, lits: Vec<Lit>) {
        self.push(family, Constraint::Clause(lits));
    }

    pub fn iff(&mut self, family: &'static str, lhs: Lit, terms: Vec<Vec<Lit>>) {
        self.push(family, Constraint::Iff { lhs, terms });
    }

    pub fn any_of(&mut self, family: &'static str, terms: Vec<Vec<Lit>>) {
        self.push(family, Constraint::AnyOf(terms));
    }

    pub fn constraints(&self) -> &[(&'static str, Constraint)] {
        &self.constraints
    }

    /// Whether `model` (over at least the formula's variables) satisfies every conjunct.
    pub fn eval(&self, model: &[bool]) -> bool {
        self.constraints.iter().all(|(_, c)| c.eval(model))
    }
}
