//! Conflict-driven clause learning.
//!
//! A compact MiniSat-style engine: two watched literals with blocker
//! literals, first-UIP learning with recursive clause minimization, VSIDS
//! branching (ties broken by lowest variable index), phase saving, Luby
//! restarts and LBD-based learnt clause reduction. There is no randomness,
//! so repeated runs on the same input return the same model.

use std::time::Instant;

use crate::cnf::Cnf;
use crate::SolveStatus;

const NO_REASON: u32 = u32::MAX;
const RESTART_UNIT: u64 = 100;
const VAR_DECAY: f64 = 0.95;
const CLAUSE_DECAY: f64 = 0.999;
const FIRST_REDUCE: u64 = 2000;
const REDUCE_INCREMENT: u64 = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Value {
    True,
    False,
    Unassigned,
}

/// Literal code: `2 * var + negated`, with zero-based variables.
type LitCode = u32;

#[inline]
fn code_of(dimacs: i32) -> LitCode {
    let var = dimacs.unsigned_abs() - 1;
    2 * var + u32::from(dimacs < 0)
}

#[inline]
fn var_of(lit: LitCode) -> usize {
    (lit >> 1) as usize
}

#[inline]
fn negate(lit: LitCode) -> LitCode {
    lit ^ 1
}

#[derive(Debug, Clone, Copy)]
struct Watcher {
    cref: u32,
    blocker: LitCode,
}

#[derive(Debug)]
struct Clause {
    lits: Vec<LitCode>,
    learnt: bool,
    deleted: bool,
    activity: f64,
    lbd: u32,
}

/// Counters reported after a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub decisions: u64,
    pub conflicts: u64,
    pub propagations: u64,
    pub restarts: u64,
    pub learnt_clauses: u64,
}

/// Max-heap of variables ordered by activity, lower index first on ties.
#[derive(Debug, Default)]
struct VarOrder {
    heap: Vec<u32>,
    position: Vec<Option<usize>>,
}

impl VarOrder {
    fn new(num_vars: usize) -> VarOrder {
        let mut order = VarOrder { heap: Vec::with_capacity(num_vars), position: vec![None; num_vars] };
        for v in 0..num_vars {
            order.position[v] = Some(order.heap.len());
            order.heap.push(v as u32);
        }
        order
    }

    #[inline]
    fn before(activity: &[f64], a: u32, b: u32) -> bool {
        let (x, y) = (activity[a as usize], activity[b as usize]);
        x > y || (x == y && a < b)
    }

    fn contains(&self, v: usize) -> bool {
        self.position[v].is_some()
    }

    fn sift_up(&mut self, mut i: usize, activity: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            if !Self::before(activity, v, self.heap[parent]) {
                break;
            }
            self.heap[i] = self.heap[parent];
            self.position[self.heap[i] as usize] = Some(i);
            i = parent;
        }
        self.heap[i] = v;
        self.position[v as usize] = Some(i);
    }

    fn sift_down(&mut self, mut i: usize, activity: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let left = 2 * i + 1;
            if left >= n {
                break;
            }
            let right = left + 1;
            let child = if right < n && Self::before(activity, self.heap[right], self.heap[left]) {
                right
            } else {
                left
            };
            if !Self::before(activity, self.heap[child], v) {
                break;
            }
            self.heap[i] = self.heap[child];
            self.position[self.heap[i] as usize] = Some(i);
            i = child;
        }
        self.heap[i] = v;
        self.position[v as usize] = Some(i);
    }

    fn insert(&mut self, v: usize, activity: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.heap.push(v as u32);
        let i = self.heap.len() - 1;
        self.position[v] = Some(i);
        self.sift_up(i, activity);
    }

    fn increased(&mut self, v: usize, activity: &[f64]) {
        if let Some(i) = self.position[v] {
            self.sift_up(i, activity);
        }
    }

    fn pop(&mut self, activity: &[f64]) -> Option<usize> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().unwrap();
        self.position[top as usize] = None;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.position[last as usize] = Some(0);
            self.sift_down(0, activity);
        }
        Some(top as usize)
    }
}

/// Single-use CDCL solver over a [`Cnf`].
#[derive(Debug)]
pub struct CdclSolver {
    num_vars: usize,
    clauses: Vec<Clause>,
    learnts: Vec<u32>,
    watches: Vec<Vec<Watcher>>,
    assigns: Vec<Value>,
    level: Vec<u32>,
    reason: Vec<u32>,
    trail: Vec<LitCode>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    clause_inc: f64,
    order: VarOrder,
    phase: Vec<bool>,
    seen: Vec<bool>,
    analyze_stack: Vec<LitCode>,
    analyze_clear: Vec<LitCode>,
    level_stamp: Vec<u64>,
    stamp: u64,
    trivially_unsat: bool,
    stats: SolverStats,
}

impl CdclSolver {
    pub fn new(cnf: &Cnf) -> CdclSolver {
        let n = cnf.num_vars();
        let mut solver = CdclSolver {
            num_vars: n,
            clauses: Vec::with_capacity(cnf.clauses().len()),
            learnts: Vec::new(),
            watches: vec![Vec::new(); 2 * n],
            assigns: vec![Value::Unassigned; n],
            level: vec![0; n],
            reason: vec![NO_REASON; n],
            trail: Vec::with_capacity(n),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: vec![0.0; n],
            var_inc: 1.0,
            clause_inc: 1.0,
            order: VarOrder::new(n),
            phase: vec![false; n],
            seen: vec![false; n],
            analyze_stack: Vec::new(),
            analyze_clear: Vec::new(),
            level_stamp: vec![0; n + 1],
            stamp: 0,
            trivially_unsat: false,
            stats: SolverStats::default(),
        };
        for clause in cnf.clauses() {
            let lits: Vec<LitCode> = clause.iter().map(|l| code_of(l.to_dimacs())).collect();
            solver.add_original(lits);
            if solver.trivially_unsat {
                break;
            }
        }
        solver
    }

    pub fn stats(&self) -> SolverStats {
        self.stats
    }

    #[inline]
    fn value(&self, lit: LitCode) -> Value {
        match self.assigns[var_of(lit)] {
            Value::Unassigned => Value::Unassigned,
            Value::True if lit & 1 == 0 => Value::True,
            Value::False if lit & 1 == 1 => Value::True,
            _ => Value::False,
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn add_original(&mut self, mut lits: Vec<LitCode>) {
        if lits.iter().any(|&l| self.value(l) == Value::True) {
            return;
        }
        lits.retain(|&l| self.value(l) != Value::False);
        match lits.len() {
            0 => self.trivially_unsat = true,
            1 => self.enqueue(lits[0], NO_REASON),
            _ => {
                self.attach(lits, false, 0);
            }
        }
    }

    fn attach(&mut self, lits: Vec<LitCode>, learnt: bool, lbd: u32) -> u32 {
        let cref = self.clauses.len() as u32;
        self.watches[negate(lits[0]) as usize].push(Watcher { cref, blocker: lits[1] });
        self.watches[negate(lits[1]) as usize].push(Watcher { cref, blocker: lits[0] });
        self.clauses.push(Clause { lits, learnt, deleted: false, activity: 0.0, lbd });
        if learnt {
            self.learnts.push(cref);
            self.stats.learnt_clauses += 1;
        }
        cref
    }

    fn enqueue(&mut self, lit: LitCode, reason: u32) {
        let v = var_of(lit);
        self.assigns[v] = if lit & 1 == 0 { Value::True } else { Value::False };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(lit);
    }

    /// Unit propagation; returns a conflicting clause if one is found.
    fn propagate(&mut self) -> Option<u32> {
        let mut conflict = None;
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = negate(p);
            let mut ws = std::mem::take(&mut self.watches[p as usize]);
            let (mut i, mut j) = (0, 0);
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value(w.blocker) == Value::True {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cref = w.cref as usize;
                if self.clauses[cref].deleted {
                    continue;
                }
                {
                    let lits = &mut self.clauses[cref].lits;
                    if lits[0] == false_lit {
                        lits.swap(0, 1);
                    }
                }
                let first = self.clauses[cref].lits[0];
                let nw = Watcher { cref: w.cref, blocker: first };
                if first != w.blocker && self.value(first) == Value::True {
                    ws[j] = nw;
                    j += 1;
                    continue;
                }
                let len = self.clauses[cref].lits.len();
                let mut moved = false;
                for k in 2..len {
                    let candidate = self.clauses[cref].lits[k];
                    if self.value(candidate) != Value::False {
                        let lits = &mut self.clauses[cref].lits;
                        lits[1] = candidate;
                        lits[k] = false_lit;
                        self.watches[negate(candidate) as usize].push(nw);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = nw;
                j += 1;
                if self.value(first) == Value::False {
                    conflict = Some(w.cref);
                    self.qhead = self.trail.len();
                    while i < ws.len() {
                        ws[j] = ws[i];
                        i += 1;
                        j += 1;
                    }
                } else {
                    self.enqueue(first, w.cref);
                }
            }
            ws.truncate(j);
            self.watches[p as usize] = ws;
            if conflict.is_some() {
                break;
            }
        }
        conflict
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in self.activity.iter_mut() {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.order.increased(v, &self.activity);
    }

    fn bump_clause(&mut self, cref: usize) {
        let clause = &mut self.clauses[cref];
        if !clause.learnt {
            return;
        }
        clause.activity += self.clause_inc;
        if clause.activity > 1e20 {
            for &c in &self.learnts {
                self.clauses[c as usize].activity *= 1e-20;
            }
            self.clause_inc *= 1e-20;
        }
    }

    fn abstract_level(&self, v: usize) -> u32 {
        1 << (self.level[v] & 31)
    }

    /// First-UIP conflict analysis. Returns the learnt clause (asserting
    /// literal first) and the backjump level.
    fn analyze(&mut self, conflict: u32) -> (Vec<LitCode>, u32) {
        let mut learnt: Vec<LitCode> = vec![0];
        let mut pending = 0usize;
        let mut p: Option<LitCode> = None;
        let mut index = self.trail.len();
        let mut confl = conflict as usize;
        let current = self.decision_level();
        loop {
            self.bump_clause(confl);
            let start = usize::from(p.is_some());
            for k in start..self.clauses[confl].lits.len() {
                let q = self.clauses[confl].lits[k];
                let v = var_of(q);
                if !self.seen[v] && self.level[v] > 0 {
                    self.bump_var(v);
                    self.seen[v] = true;
                    if self.level[v] >= current {
                        pending += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[var_of(self.trail[index])] {
                    break;
                }
            }
            let lit = self.trail[index];
            let v = var_of(lit);
            p = Some(lit);
            self.seen[v] = false;
            pending -= 1;
            if pending == 0 {
                break;
            }
            confl = self.reason[v] as usize;
        }
        learnt[0] = negate(p.unwrap());

        // recursive minimization
        self.analyze_clear.clear();
        self.analyze_clear.extend_from_slice(&learnt);
        let levels = learnt[1..].iter().fold(0u32, |acc, &l| acc | self.abstract_level(var_of(l)));
        let mut kept = vec![learnt[0]];
        for &lit in &learnt[1..] {
            let v = var_of(lit);
            if self.reason[v] == NO_REASON || !self.redundant(lit, levels) {
                kept.push(lit);
            }
        }
        for &l in &self.analyze_clear {
            self.seen[var_of(l)] = false;
        }
        let mut learnt = kept;

        let backjump = if learnt.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[var_of(learnt[i])] > self.level[var_of(learnt[max_i])] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            self.level[var_of(learnt[1])]
        };
        (learnt, backjump)
    }

    fn redundant(&mut self, lit: LitCode, levels: u32) -> bool {
        self.analyze_stack.clear();
        self.analyze_stack.push(lit);
        let top = self.analyze_clear.len();
        while let Some(p) = self.analyze_stack.pop() {
            let cref = self.reason[var_of(p)] as usize;
            let len = self.clauses[cref].lits.len();
            for k in 1..len {
                let q = self.clauses[cref].lits[k];
                let v = var_of(q);
                if self.seen[v] || self.level[v] == 0 {
                    continue;
                }
                if self.reason[v] != NO_REASON && self.abstract_level(v) & levels != 0 {
                    self.seen[v] = true;
                    self.analyze_stack.push(q);
                    self.analyze_clear.push(q);
                } else {
                    for &l in &self.analyze_clear[top..] {
                        self.seen[var_of(l)] = false;
                    }
                    self.analyze_clear.truncate(top);
                    return false;
                }
            }
        }
        true
    }

    fn lbd(&mut self, lits: &[LitCode]) -> u32 {
        self.stamp += 1;
        let mut count = 0;
        for &l in lits {
            let lvl = self.level[var_of(l)] as usize;
            if self.level_stamp[lvl] != self.stamp {
                self.level_stamp[lvl] = self.stamp;
                count += 1;
            }
        }
        count
    }

    fn cancel_until(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let stop = self.trail_lim[level as usize];
        for idx in (stop..self.trail.len()).rev() {
            let lit = self.trail[idx];
            let v = var_of(lit);
            self.phase[v] = lit & 1 == 0;
            self.assigns[v] = Value::Unassigned;
            self.reason[v] = NO_REASON;
            self.order.insert(v, &self.activity);
        }
        self.trail.truncate(stop);
        self.trail_lim.truncate(level as usize);
        self.qhead = stop;
    }

    fn locked(&self, cref: u32) -> bool {
        let first = self.clauses[cref as usize].lits[0];
        self.value(first) == Value::True && self.reason[var_of(first)] == cref
    }

    fn reduce_learnts(&mut self) {
        let mut candidates: Vec<u32> = self
            .learnts
            .iter()
            .copied()
            .filter(|&c| self.clauses[c as usize].lbd > 2 && !self.locked(c))
            .collect();
        candidates.sort_by(|&a, &b| {
            let (ca, cb) = (&self.clauses[a as usize], &self.clauses[b as usize]);
            cb.lbd
                .cmp(&ca.lbd)
                .then(ca.activity.partial_cmp(&cb.activity).unwrap())
                .then(a.cmp(&b))
        });
        let remove = candidates.len() / 2;
        for &c in &candidates[..remove] {
            let clause = &mut self.clauses[c as usize];
            clause.deleted = true;
            clause.lits = Vec::new();
        }
        let clauses = &self.clauses;
        self.learnts.retain(|&c| !clauses[c as usize].deleted);
        for ws in self.watches.iter_mut() {
            ws.retain(|w| !clauses[w.cref as usize].deleted);
        }
    }

    fn pick_branch(&mut self) -> Option<LitCode> {
        while let Some(v) = self.order.pop(&self.activity) {
            if self.assigns[v] == Value::Unassigned {
                return Some(2 * v as u32 + u32::from(!self.phase[v]));
            }
        }
        None
    }

    /// Runs the search. `deadline` bounds wall time; `None` means unbounded.
    pub fn solve(&mut self, deadline: Option<Instant>) -> SolveStatus {
        if self.trivially_unsat || self.propagate().is_some() {
            return SolveStatus::Unsat;
        }
        let mut restart_index = 0u32;
        let mut next_reduce = FIRST_REDUCE;
        let mut reductions = 0u64;
        loop {
            let budget = luby(restart_index) * RESTART_UNIT;
            restart_index += 1;
            let mut conflicts_here = 0u64;
            loop {
                if let Some(conflict) = self.propagate() {
                    self.stats.conflicts += 1;
                    conflicts_here += 1;
                    if self.decision_level() == 0 {
                        return SolveStatus::Unsat;
                    }
                    let (learnt, backjump) = self.analyze(conflict);
                    self.cancel_until(backjump);
                    if learnt.len() == 1 {
                        self.enqueue(learnt[0], NO_REASON);
                    } else {
                        let lbd = self.lbd(&learnt);
                        let asserting = learnt[0];
                        let cref = self.attach(learnt, true, lbd);
                        self.bump_clause(cref as usize);
                        self.enqueue(asserting, cref);
                    }
                    self.var_inc /= VAR_DECAY;
                    self.clause_inc /= CLAUSE_DECAY;
                    if self.stats.conflicts % 256 == 0 && deadline.is_some_and(|d| Instant::now() >= d) {
                        self.cancel_until(0);
                        return SolveStatus::Timeout;
                    }
                } else {
                    if conflicts_here >= budget {
                        self.stats.restarts += 1;
                        self.cancel_until(0);
                        break;
                    }
                    if self.stats.conflicts >= next_reduce {
                        reductions += 1;
                        next_reduce = self.stats.conflicts + FIRST_REDUCE + REDUCE_INCREMENT * reductions;
                        self.reduce_learnts();
                    }
                    match self.pick_branch() {
                        None => return SolveStatus::Sat(self.model()),
                        Some(lit) => {
                            self.stats.decisions += 1;
                            if self.stats.decisions % 4096 == 0 && deadline.is_some_and(|d| Instant::now() >= d) {
                                self.cancel_until(0);
                                return SolveStatus::Timeout;
                            }
                            self.trail_lim.push(self.trail.len());
                            self.enqueue(lit, NO_REASON);
                        }
                    }
                }
            }
        }
    }

    fn model(&self) -> Vec<bool> {
        (0..self.num_vars).map(|v| self.assigns[v] == Value::True).collect()
    }
}

/// The Luby restart sequence 1, 1, 2, 1, 1, 2, 4, ...
fn luby(mut i: u32) -> u64 {
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < u64::from(i) + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != u64::from(i) {
        size = (size - 1) >> 1;
        seq -= 1;
        i %= size as u32;
    }
    1u64 << seq
}
