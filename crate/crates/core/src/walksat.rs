//! WalkSAT local search: the endgame once message passing reports a
//! bias-free (paramagnetic) residual formula, and a standalone baseline.

use crate::cnf::{evaluate, Assignment, Formula};
use crate::rng::Rng;

#[derive(Clone, Debug)]
pub struct WalkSatParams {
    /// Probability of a random-walk move when no freebie exists.
    pub noise: f64,
    /// Flip budget per try; None means 100 times the variable count.
    pub max_flips: Option<u64>,
    /// Independent restarts from fresh random assignments.
    pub tries: u32,
    pub seed: u64,
}

impl Default for WalkSatParams {
    fn default() -> Self {
        WalkSatParams {
            noise: 0.5,
            max_flips: None,
            tries: 10,
            seed: 0,
        }
    }
}

impl WalkSatParams {
    pub fn flips_per_try(&self, n_vars: u32) -> u64 {
        self.max_flips.unwrap_or(100 * n_vars as u64)
    }
}

#[derive(Clone, Debug)]
pub enum WalkSatStatus {
    /// Verified satisfying assignment over all n_vars variables.
    Found(Assignment),
    Timeout,
}

#[derive(Clone, Debug)]
pub struct WalkSatResult {
    pub status: WalkSatStatus,
    /// Total flips across tries; at most tries * max_flips.
    pub flips: u64,
    pub tries_used: u32,
}

struct SearchState {
    /// Per variable: (clause id, negated) occurrences.
    occ: Vec<Vec<(u32, bool)>>,
    values: Vec<bool>,
    n_true: Vec<u32>,
    unsat: Vec<u32>,
    /// Clause id -> index in `unsat`, or SENTINEL.
    unsat_pos: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

impl SearchState {
    fn new(f: &Formula) -> Self {
        let n = f.n_vars() as usize;
        let mut occ = vec![Vec::new(); n];
        for (c, clause) in f.clauses().iter().enumerate() {
            for lit in clause.literals() {
                occ[(lit.var() - 1) as usize].push((c as u32, lit.is_negated()));
            }
        }
        SearchState {
            occ,
            values: vec![false; n],
            n_true: vec![0; f.n_clauses()],
            unsat: Vec::new(),
            unsat_pos: vec![ABSENT; f.n_clauses()],
        }
    }

    fn randomize(&mut self, f: &Formula, rng: &mut Rng) {
        for v in self.values.iter_mut() {
            *v = rng.next_bool();
        }
        self.unsat.clear();
        self.unsat_pos.fill(ABSENT);
        for (c, clause) in f.clauses().iter().enumerate() {
            let t = clause
                .literals()
                .iter()
                .filter(|l| l.satisfied_by(self.values[(l.var() - 1) as usize]))
                .count() as u32;
            self.n_true[c] = t;
            if t == 0 {
                self.unsat_pos[c] = self.unsat.len() as u32;
                self.unsat.push(c as u32);
            }
        }
    }

    /// Clauses this flip would leave with no true literal: those where
    /// the variable's literal is currently the only true one.
    fn break_count(&self, var0: usize) -> u32 {
        let val = self.values[var0];
        self.occ[var0]
            .iter()
            .filter(|&&(c, negated)| val != negated && self.n_true[c as usize] == 1)
            .count() as u32
    }

    fn flip(&mut self, var0: usize) {
        self.values[var0] = !self.values[var0];
        let val = self.values[var0];
        for i in 0..self.occ[var0].len() {
            let (c, negated) = self.occ[var0][i];
            let c = c as usize;
            if val != negated {
                self.n_true[c] += 1;
                if self.n_true[c] == 1 {
                    let pos = self.unsat_pos[c];
                    let last = *self.unsat.last().expect("clause was tracked unsat");
                    self.unsat.swap_remove(pos as usize);
                    if (pos as usize) < self.unsat.len() {
                        self.unsat_pos[last as usize] = pos;
                    }
                    self.unsat_pos[c] = ABSENT;
                }
            } else {
                self.n_true[c] -= 1;
                if self.n_true[c] == 0 {
                    self.unsat_pos[c] = self.unsat.len() as u32;
                    self.unsat.push(c as u32);
                }
            }
        }
    }
}

/// Standard WalkSAT. Per try: random full assignment, then repeatedly
/// pick a random unsatisfied clause; flip a zero-break variable when one
/// exists (random among them), otherwise with probability `noise` a
/// random variable of the clause, otherwise a minimum-break variable
/// (random among ties). Any returned assignment has been re-verified.
pub fn walksat(f: &Formula, params: &WalkSatParams) -> WalkSatResult {
    let mut rng = Rng::new(params.seed);
    let budget = params.flips_per_try(f.n_vars());
    let mut state = SearchState::new(f);
    let mut total_flips = 0u64;
    let mut candidates: Vec<(u32, u32)> = Vec::new();

    for try_no in 1..=params.tries.max(1) {
        state.randomize(f, &mut rng);
        let mut flips = 0u64;
        loop {
            if state.unsat.is_empty() {
                let assignment = Assignment::from_bools(&state.values);
                let report = evaluate(f, &assignment).expect("assignment is total");
                assert!(report.satisfied, "search invariants out of sync");
                return WalkSatResult {
                    status: WalkSatStatus::Found(assignment),
                    flips: total_flips,
                    tries_used: try_no,
                };
            }
            if flips >= budget {
                break;
            }
            let clause = state.unsat[rng.below(state.unsat.len() as u64) as usize];
            let lits = f.clauses()[clause as usize].literals();
            candidates.clear();
            let mut min_break = u32::MAX;
            for lit in lits {
                let var0 = lit.var() - 1;
                let b = state.break_count(var0 as usize);
                min_break = min_break.min(b);
                candidates.push((var0, b));
            }
            let target = if min_break == 0 {
                pick_with_break(&candidates, 0, &mut rng)
            } else if rng.next_f64() < params.noise {
                candidates[rng.below(candidates.len() as u64) as usize].0
            } else {
                pick_with_break(&candidates, min_break, &mut rng)
            };
            state.flip(target as usize);
            flips += 1;
            total_flips += 1;
        }
    }
    WalkSatResult {
        status: WalkSatStatus::Timeout,
        flips: total_flips,
        tries_used: params.tries.max(1),
    }
}

fn pick_with_break(candidates: &[(u32, u32)], want: u32, rng: &mut Rng) -> u32 {
    let matching = candidates.iter().filter(|&&(_, b)| b == want).count() as u64;
    let skip = rng.below(matching);
    candidates
        .iter()
        .filter(|&&(_, b)| b == want)
        .nth(skip as usize)
        .expect("count was just taken")
        .0
}
