//! Factor graph over a CNF formula with live/dead bookkeeping.
//!
//! Clause literals live in one flat array; the edge id of a literal
//! occurrence is its index in that array, which message passing uses to
//! address messages without hashing. Deletion is lazy: liveness flags on
//! variables and clauses, and iteration skips dead entries. Streamlining
//! appends clauses at the end, so clause spans stay valid forever.

use crate::cnf::{Assignment, Clause, ClauseOrigin, Formula, Literal};
use std::collections::VecDeque;
use thiserror::Error;

/// Raised when branching or propagation kills every extension of the
/// current assignment. With streamlining clauses present this refutes the
/// augmented formula, not necessarily the original one.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum Contradiction {
    #[error("clause {clause} lost all its literals unsatisfied")]
    EmptyClause { clause: usize },
    #[error("propagation forces variable {var} to both values")]
    ConflictingFixes { var: u32 },
}

#[derive(Clone, Debug)]
pub struct FactorGraph {
    n_vars: u32,
    /// Flat literal array; edge id = index.
    lits: Vec<Literal>,
    /// Per clause: (start, len) into `lits`.
    clause_span: Vec<(u32, u32)>,
    clause_origin: Vec<ClauseOrigin>,
    clause_live: Vec<bool>,
    /// Per live clause: how many of its literals reference unassigned vars.
    clause_free_lits: Vec<u32>,
    var_live: Vec<bool>,
    /// Per variable (0-based): (clause id, edge id) for each occurrence.
    var_edges: Vec<Vec<(u32, u32)>>,
    assignment: Assignment,
    n_live_clauses: usize,
    n_live_vars: usize,
}

/// One clause node per clause, one edge per literal occurrence, all nodes
/// live, empty assignment.
pub fn build_factor_graph(f: &Formula) -> FactorGraph {
    let n_vars = f.n_vars();
    let mut g = FactorGraph {
        n_vars,
        lits: Vec::new(),
        clause_span: Vec::new(),
        clause_origin: Vec::new(),
        clause_live: Vec::new(),
        clause_free_lits: Vec::new(),
        var_live: vec![true; n_vars as usize],
        var_edges: vec![Vec::new(); n_vars as usize],
        assignment: Assignment::empty(n_vars),
        n_live_clauses: 0,
        n_live_vars: n_vars as usize,
    };
    for clause in f.clauses() {
        g.add_clause(clause);
    }
    g
}

impl FactorGraph {
    pub fn n_vars(&self) -> u32 {
        self.n_vars
    }

    pub fn n_clauses(&self) -> usize {
        self.clause_span.len()
    }

    /// Total literal occurrences ever added; dead edges included.
    pub fn total_edges(&self) -> usize {
        self.lits.len()
    }

    pub fn live_var_count(&self) -> usize {
        self.n_live_vars
    }

    pub fn live_clause_count(&self) -> usize {
        self.n_live_clauses
    }

    pub fn var_is_live(&self, var: u32) -> bool {
        self.var_live[(var - 1) as usize]
    }

    pub fn clause_is_live(&self, clause: usize) -> bool {
        self.clause_live[clause]
    }

    pub fn clause_origin(&self, clause: usize) -> ClauseOrigin {
        self.clause_origin[clause]
    }

    /// All literals of the clause, dead ones included.
    pub fn clause_lits(&self, clause: usize) -> &[Literal] {
        let (start, len) = self.clause_span[clause];
        &self.lits[start as usize..(start + len) as usize]
    }

    /// Edge id of the clause's first literal; edge ids are contiguous.
    pub fn clause_edge_base(&self, clause: usize) -> u32 {
        self.clause_span[clause].0
    }

    pub fn edge_literal(&self, edge: u32) -> Literal {
        self.lits[edge as usize]
    }

    /// Occurrences of `var` as (clause id, edge id), dead clauses included.
    pub fn var_occurrences(&self, var: u32) -> &[(u32, u32)] {
        &self.var_edges[(var - 1) as usize]
    }

    pub fn live_clauses(&self) -> impl Iterator<Item = usize> + '_ {
        self.clause_live
            .iter()
            .enumerate()
            .filter_map(|(c, &live)| live.then_some(c))
    }

    pub fn live_vars(&self) -> impl Iterator<Item = u32> + '_ {
        self.var_live
            .iter()
            .enumerate()
            .filter_map(|(i, &live)| live.then_some(i as u32 + 1))
    }

    /// Edges whose clause and variable are both live.
    pub fn live_edge_count(&self) -> usize {
        self.live_clauses()
            .map(|c| {
                self.clause_lits(c)
                    .iter()
                    .filter(|l| self.var_is_live(l.var()))
                    .count()
            })
            .sum()
    }

    pub fn value(&self, var: u32) -> Option<bool> {
        self.assignment.get(var)
    }

    pub fn assignment(&self) -> &Assignment {
        &self.assignment
    }

    /// Appends a clause node and its edges. A literal already satisfied by
    /// the assignment kills the clause on arrival; falsified literals do
    /// not count as free.
    pub fn add_clause(&mut self, clause: &Clause) -> usize {
        let id = self.clause_span.len();
        let start = self.lits.len() as u32;
        let mut free = 0u32;
        let mut satisfied = false;
        for lit in clause.literals() {
            let edge = self.lits.len() as u32;
            self.lits.push(*lit);
            self.var_edges[(lit.var() - 1) as usize].push((id as u32, edge));
            match self.assignment.get(lit.var()) {
                None => free += 1,
                Some(v) => satisfied |= lit.satisfied_by(v),
            }
        }
        self.clause_span.push((start, clause.len() as u32));
        self.clause_origin.push(clause.origin());
        self.clause_free_lits.push(free);
        let live = !satisfied;
        self.clause_live.push(live);
        if live {
            self.n_live_clauses += 1;
        }
        id
    }

    /// Applies the fixes and runs unit propagation to fixpoint. Satisfied
    /// clauses die with their edges; falsified literals shrink their
    /// clauses; a clause shrunk to one free literal enqueues that fix.
    /// Returns every (variable, value) assigned during the call.
    pub fn unit_propagate(
        &mut self,
        fixes: &[(u32, bool)],
    ) -> Result<Vec<(u32, bool)>, Contradiction> {
        let mut queue: VecDeque<(u32, bool)> = fixes.iter().copied().collect();
        let mut assigned = Vec::new();
        while let Some((var, value)) = queue.pop_front() {
            match self.assignment.get(var) {
                Some(prev) if prev == value => continue,
                Some(_) => return Err(Contradiction::ConflictingFixes { var }),
                None => {}
            }
            self.assignment.set(var, value);
            self.var_live[(var - 1) as usize] = false;
            self.n_live_vars -= 1;
            assigned.push((var, value));
            let occurrences = std::mem::take(&mut self.var_edges[(var - 1) as usize]);
            for &(c, e) in &occurrences {
                let c = c as usize;
                if !self.clause_live[c] {
                    continue;
                }
                if self.lits[e as usize].satisfied_by(value) {
                    self.clause_live[c] = false;
                    self.n_live_clauses -= 1;
                    continue;
                }
                self.clause_free_lits[c] -= 1;
                match self.clause_free_lits[c] {
                    0 => {
                        self.var_edges[(var - 1) as usize] = occurrences;
                        return Err(Contradiction::EmptyClause { clause: c });
                    }
                    1 => {
                        let lit = self
                            .clause_lits(c)
                            .iter()
                            .find(|l| self.assignment.get(l.var()).is_none() && l.var() != var)
                            .copied()
                            .expect("free-literal count says one remains");
                        queue.push_back((lit.var(), !lit.is_negated()));
                    }
                    _ => {}
                }
            }
            self.var_edges[(var - 1) as usize] = occurrences;
        }
        Ok(assigned)
    }

    /// Live clauses restricted to their unassigned literals; variable ids
    /// and n_vars unchanged.
    pub fn residual_formula(&self) -> Formula {
        let clauses = self
            .live_clauses()
            .map(|c| {
                let lits: Vec<Literal> = self
                    .clause_lits(c)
                    .iter()
                    .filter(|l| self.var_is_live(l.var()))
                    .copied()
                    .collect();
                Clause::new(lits, self.clause_origin(c))
                    .expect("live clause has at least one free literal")
            })
            .collect();
        Formula::new(self.n_vars, clauses).expect("graph literals are in range")
    }

    /// Every clause ever added, full literal lists, liveness ignored.
    /// Intended for graphs that never decimated (streamlining output).
    pub fn to_formula(&self) -> Formula {
        let clauses = (0..self.n_clauses())
            .map(|c| {
                Clause::new(self.clause_lits(c).to_vec(), self.clause_origin(c))
                    .expect("stored clause is valid")
            })
            .collect();
        Formula::new(self.n_vars, clauses).expect("graph literals are in range")
    }

    /// Drops dead-clause entries from live variables' occurrence lists so
    /// message passing stops re-skipping them. Edge ids are untouched.
    pub fn compact_occurrences(&mut self) {
        for vi in 0..self.var_edges.len() {
            if !self.var_live[vi] {
                continue;
            }
            let clause_live = &self.clause_live;
            self.var_edges[vi].retain(|&(c, _)| clause_live[c as usize]);
        }
    }

    /// Validates internal bookkeeping; test support.
    pub fn check_consistency(&self) -> Result<(), String> {
        let mut adjacency = vec![0u32; self.lits.len()];
        for (vi, edges) in self.var_edges.iter().enumerate() {
            for &(c, e) in edges {
                adjacency[e as usize] += 1;
                let lit = self.lits[e as usize];
                if lit.var() != vi as u32 + 1 {
                    return Err(format!("edge {e} listed under wrong variable {}", vi + 1));
                }
                let (start, len) = self.clause_span[c as usize];
                if e < start || e >= start + len {
                    return Err(format!("edge {e} outside clause {c} span"));
                }
            }
        }
        // Both adjacency directions must agree on every live edge;
        // compaction may have dropped dead ones from the variable side.
        for c in self.live_clauses() {
            let base = self.clause_edge_base(c);
            for (off, lit) in self.clause_lits(c).iter().enumerate() {
                let e = base + off as u32;
                if self.var_is_live(lit.var()) && adjacency[e as usize] != 1 {
                    return Err(format!(
                        "live edge {e} appears {} times in variable adjacency",
                        adjacency[e as usize]
                    ));
                }
            }
        }
        for c in 0..self.n_clauses() {
            if !self.clause_live[c] {
                continue;
            }
            let free = self
                .clause_lits(c)
                .iter()
                .filter(|l| self.assignment.get(l.var()).is_none())
                .count() as u32;
            if free != self.clause_free_lits[c] {
                return Err(format!(
                    "clause {c}: free-literal count {} but recount {free}",
                    self.clause_free_lits[c]
                ));
            }
            if free == 0 {
                return Err(format!("live clause {c} has no free literals"));
            }
            for l in self.clause_lits(c) {
                if let Some(v) = self.assignment.get(l.var()) {
                    if l.satisfied_by(v) {
                        return Err(format!("live clause {c} is satisfied"));
                    }
                }
            }
        }
        for v in 1..=self.n_vars {
            let live = self.var_live[(v - 1) as usize];
            let assigned = self.assignment.get(v).is_some();
            if live == assigned {
                return Err(format!("variable {v}: live={live}, assigned={assigned}"));
            }
        }
        let live_clauses = self.clause_live.iter().filter(|&&b| b).count();
        if live_clauses != self.n_live_clauses {
            return Err("live clause counter out of sync".into());
        }
        let live_vars = self.var_live.iter().filter(|&&b| b).count();
        if live_vars != self.n_live_vars {
            return Err("live variable counter out of sync".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::Formula;

    /// Five variables (i,j,k,l,m) = (1..5), three clauses:
    /// a=(¬i∨k∨¬l), b=(i∨j∨¬k), c=(k∨l∨¬m).
    fn three_clause_graph() -> FactorGraph {
        let f = Formula::from_codes(5, &[&[-1, 3, -4], &[1, 2, -3], &[3, 4, -5]]).unwrap();
        build_factor_graph(&f)
    }

    #[test]
    fn build_counts_nodes_and_edges() {
        let g = three_clause_graph();
        assert_eq!(g.n_vars(), 5);
        assert_eq!(g.n_clauses(), 3);
        assert_eq!(g.total_edges(), 9);
        assert_eq!(g.live_edge_count(), 9);
        assert_eq!(g.live_var_count(), 5);
        assert_eq!(g.live_clause_count(), 3);
        g.check_consistency().unwrap();
    }

    #[test]
    fn build_no_clauses_isolated_vars() {
        let f = Formula::new(4, vec![]).unwrap();
        let g = build_factor_graph(&f);
        assert_eq!(g.live_var_count(), 4);
        assert_eq!(g.total_edges(), 0);
        g.check_consistency().unwrap();
    }

    #[test]
    fn edge_count_is_sum_of_clause_lengths() {
        let f = Formula::from_codes(3, &[&[1, 2], &[-1, 2, 3], &[3]]).unwrap();
        let g = build_factor_graph(&f);
        assert_eq!(g.total_edges(), 2 + 3 + 1);
    }

    #[test]
    fn fix_deletes_satisfied_clause_and_its_edges() {
        let mut g = three_clause_graph();
        let fixed = g.unit_propagate(&[(3, false)]).unwrap();
        assert_eq!(fixed, vec![(3, false)]);
        assert!(!g.clause_is_live(1));
        assert!(g.clause_is_live(0));
        assert!(g.clause_is_live(2));
        assert_eq!(g.live_edge_count(), 4);
        assert_eq!(g.live_var_count(), 4);
        g.check_consistency().unwrap();
    }

    #[test]
    fn fix_isolated_var_only_extends_assignment() {
        let f = Formula::from_codes(3, &[&[1, 2]]).unwrap();
        let mut g = build_factor_graph(&f);
        g.unit_propagate(&[(3, true)]).unwrap();
        assert_eq!(g.live_edge_count(), 2);
        assert_eq!(g.value(3), Some(true));
        g.check_consistency().unwrap();
    }

    #[test]
    fn direct_conflict_is_contradiction() {
        let f = Formula::from_codes(1, &[&[1], &[-1]]).unwrap();
        let mut g = build_factor_graph(&f);
        let err = g.unit_propagate(&[(1, true)]).unwrap_err();
        assert_eq!(err, Contradiction::EmptyClause { clause: 1 });
    }

    #[test]
    fn propagation_chains_through_units() {
        // (¬1∨2)∧(¬2∨3): fixing 1=1 forces 2=1 then 3=1.
        let f = Formula::from_codes(3, &[&[-1, 2], &[-2, 3]]).unwrap();
        let mut g = build_factor_graph(&f);
        let fixed = g.unit_propagate(&[(1, true)]).unwrap();
        assert_eq!(fixed, vec![(1, true), (2, true), (3, true)]);
        assert_eq!(g.live_clause_count(), 0);
        g.check_consistency().unwrap();
    }

    #[test]
    fn conflicting_enqueued_fixes_detected() {
        // Fixing 1=1 forces 2=1 via first clause and 2=0 via second.
        let f = Formula::from_codes(2, &[&[-1, 2], &[-1, -2]]).unwrap();
        let mut g = build_factor_graph(&f);
        let err = g.unit_propagate(&[(1, true)]).unwrap_err();
        assert!(matches!(
            err,
            Contradiction::ConflictingFixes { var: 2 } | Contradiction::EmptyClause { .. }
        ));
    }

    #[test]
    fn residual_drops_dead_material() {
        let mut g = three_clause_graph();
        g.unit_propagate(&[(3, false)]).unwrap();
        let r = g.residual_formula();
        assert_eq!(r.n_vars(), 5);
        assert_eq!(r.n_clauses(), 2);
        let codes: Vec<Vec<i32>> = r
            .clauses()
            .iter()
            .map(|c| c.literals().iter().map(|l| l.code()).collect())
            .collect();
        assert_eq!(codes, vec![vec![-1, -4], vec![4, -5]]);
    }

    #[test]
    fn compaction_preserves_live_structure() {
        let mut g = three_clause_graph();
        g.unit_propagate(&[(3, false)]).unwrap();
        let before = g.live_edge_count();
        g.compact_occurrences();
        assert_eq!(g.live_edge_count(), before);
        g.check_consistency().unwrap();
        assert!(g.var_occurrences(1).iter().all(|&(c, _)| g.clause_is_live(c as usize)));
    }

    #[test]
    fn streamlining_clause_insertion_coexists_with_deletion() {
        let mut g = three_clause_graph();
        g.unit_propagate(&[(3, false)]).unwrap();
        let extra = Clause::new(
            vec![Literal::pos(1), Literal::pos(5)],
            ClauseOrigin::Streamlining,
        )
        .unwrap();
        let id = g.add_clause(&extra);
        assert!(g.clause_is_live(id));
        assert_eq!(g.clause_origin(id), ClauseOrigin::Streamlining);
        assert_eq!(g.live_edge_count(), 6);
        g.check_consistency().unwrap();
        // A clause satisfied by the current assignment is born dead.
        let sat = Clause::new(vec![Literal::neg(3)], ClauseOrigin::Original).unwrap();
        let id2 = g.add_clause(&sat);
        assert!(!g.clause_is_live(id2));
        g.check_consistency().unwrap();
    }
}
