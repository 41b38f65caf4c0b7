//! Branching on warning marginals: candidate ranking by magnetization,
//! decimation fixes, and streamlining disjunctions with pairing and
//! per-variable participation counters.

use crate::cnf::{Clause, ClauseOrigin, Literal};
use crate::graph::FactorGraph;
use crate::sp::MarginalTable;
use std::collections::HashSet;

/// One branching candidate: the variable, the value it leans toward
/// (ties lean to 0), and how hard it leans.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Candidate {
    pub var: u32,
    pub preferred: bool,
    pub magnetization: f64,
}

impl Candidate {
    /// The literal made true by the preferred value.
    pub fn literal(&self) -> Literal {
        Literal::new(self.var, !self.preferred)
    }
}

/// Descending magnetization, ties broken by lowest variable id.
pub type CandidateList = Vec<Candidate>;

/// How the top 2R candidates are joined into R disjunctions.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum PairingMode {
    /// Most confident with least confident: (ℓ1∨ℓE), (ℓ2∨ℓE−1), …
    #[default]
    HighLow,
    /// First half with second half elementwise: (ℓ1∨ℓh+1), (ℓ2∨ℓh+2), …
    Block,
}

/// Tracks how many streamlining clauses each variable sits in; variables
/// at the threshold stop being streamlining candidates. Also remembers
/// every streamlining clause added, to skip duplicates.
#[derive(Clone, Debug)]
pub struct StreamlineCounters {
    counts: Vec<u32>,
    threshold: u32,
    seen: HashSet<(Literal, Literal)>,
}

impl StreamlineCounters {
    pub fn new(n_vars: u32, threshold: u32) -> Self {
        StreamlineCounters {
            counts: vec![0; n_vars as usize],
            threshold,
            seen: HashSet::new(),
        }
    }

    pub fn count(&self, var: u32) -> u32 {
        self.counts[(var - 1) as usize]
    }

    pub fn threshold(&self) -> u32 {
        self.threshold
    }

    pub fn eligible(&self, var: u32) -> bool {
        self.count(var) < self.threshold
    }

    fn bump(&mut self, var: u32) {
        debug_assert!(self.eligible(var), "counter ceiling breached");
        self.counts[(var - 1) as usize] += 1;
    }

    fn remember(&mut self, a: Literal, b: Literal) -> bool {
        let key = if a <= b { (a, b) } else { (b, a) };
        self.seen.insert(key)
    }
}

fn ranked(m: &MarginalTable, counters: Option<&StreamlineCounters>, limit: usize) -> CandidateList {
    let mut list: CandidateList = m
        .rows()
        .iter()
        .filter(|r| counters.is_none_or(|c| c.eligible(r.var)))
        .map(|r| Candidate {
            var: r.var,
            preferred: r.preferred(),
            magnetization: r.magnetization(),
        })
        .collect();
    list.sort_unstable_by(|a, b| {
        b.magnetization
            .partial_cmp(&a.magnetization)
            .expect("magnetizations are finite")
            .then(a.var.cmp(&b.var))
    });
    list.truncate(limit);
    list
}

/// Top `limit` live variables by magnetization, skipping variables whose
/// streamlining counter reached the threshold.
pub fn rank_candidates(
    m: &MarginalTable,
    counters: &StreamlineCounters,
    limit: usize,
) -> CandidateList {
    ranked(m, Some(counters), limit)
}

/// Top `r` variables paired with their preferred values, ready for unit
/// propagation. Counters do not apply to decimation. Empty when the
/// table has no live variables left.
pub fn decimate_step(g: &FactorGraph, m: &MarginalTable, r: usize) -> Vec<(u32, bool)> {
    let fixes: Vec<(u32, bool)> = ranked(m, None, r)
        .into_iter()
        .map(|c| (c.var, c.preferred))
        .collect();
    debug_assert!(fixes.iter().all(|&(v, _)| g.var_is_live(v)));
    fixes
}

/// Takes the top 2r eligible candidates as preferred literals, pairs them
/// per `mode`, adds each fresh pair to the graph as a two-literal clause,
/// and bumps the counters of the participating variables. Returns the
/// clauses actually added; empty when fewer than two candidates remain
/// (the caller then falls back to decimation). An odd candidate list
/// drops its unpaired middle element.
pub fn streamline_step(
    g: &mut FactorGraph,
    m: &MarginalTable,
    r: usize,
    counters: &mut StreamlineCounters,
    mode: PairingMode,
) -> Vec<Clause> {
    let cands = rank_candidates(m, counters, 2 * r);
    let e = cands.len();
    if e < 2 {
        return Vec::new();
    }
    let half = e / 2;
    let skip = e % 2;
    let mut added = Vec::with_capacity(half);
    for i in 0..half {
        let (first, second) = match mode {
            PairingMode::HighLow => (&cands[i], &cands[e - 1 - i]),
            PairingMode::Block => (&cands[i], &cands[half + skip + i]),
        };
        let (la, lb) = (first.literal(), second.literal());
        if !counters.remember(la, lb) {
            continue;
        }
        let clause =
            Clause::new(vec![la, lb], ClauseOrigin::Streamlining).expect("paired vars distinct");
        g.add_clause(&clause);
        counters.bump(la.var());
        counters.bump(lb.var());
        added.push(clause);
    }
    added
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::Formula;
    use crate::gen::{gen_ksat, GenKind, GenSpec};
    use crate::graph::build_factor_graph;
    use crate::oracle::{enumerate_with, EnumerateOptions};
    use crate::rng::Rng;
    use crate::sp::{MarginalRow, MarginalTable};

    fn row(var: u32, mu0: f64, mu1: f64) -> MarginalRow {
        MarginalRow {
            var,
            mu0,
            mu1,
            mu_star: 1.0 - mu0 - mu1,
        }
    }

    fn spec_table() -> MarginalTable {
        MarginalTable::from_rows(vec![
            row(1, 0.9, 0.05),
            row(2, 0.1, 0.8),
            row(3, 0.5, 0.5),
        ])
    }

    #[test]
    fn ranking_orders_by_magnetization_then_id() {
        let c = StreamlineCounters::new(3, 2);
        let list = rank_candidates(&spec_table(), &c, 10);
        let got: Vec<(u32, bool)> = list.iter().map(|c| (c.var, c.preferred)).collect();
        assert_eq!(got, vec![(1, false), (2, true), (3, false)]);
        assert!((list[0].magnetization - 0.85).abs() < 1e-12);
        assert!((list[1].magnetization - 0.7).abs() < 1e-12);
        assert_eq!(list[2].magnetization, 0.0);
    }

    #[test]
    fn ranking_excludes_saturated_counters() {
        let mut c = StreamlineCounters::new(3, 2);
        c.counts[0] = 2;
        let list = rank_candidates(&spec_table(), &c, 10);
        assert_eq!(list.iter().map(|c| c.var).collect::<Vec<_>>(), vec![2, 3]);
    }

    #[test]
    fn ranking_ties_break_by_variable_id() {
        let table = MarginalTable::from_rows(vec![
            row(1, 0.6, 0.2),
            row(2, 0.2, 0.6),
            row(3, 0.6, 0.2),
        ]);
        let c = StreamlineCounters::new(3, 2);
        let list = rank_candidates(&table, &c, 10);
        assert_eq!(list.iter().map(|c| c.var).collect::<Vec<_>>(), vec![1, 2, 3]);
    }

    #[test]
    fn decimation_takes_top_r_preferred_values() {
        let f = Formula::new(3, vec![]).unwrap();
        let g = build_factor_graph(&f);
        let m = spec_table();
        assert_eq!(decimate_step(&g, &m, 1), vec![(1, false)]);
        assert_eq!(decimate_step(&g, &m, 2), vec![(1, false), (2, true)]);
        assert_eq!(decimate_step(&g, &m, 9).len(), 3);
    }

    #[test]
    fn decimation_ignores_counters() {
        let f = Formula::new(3, vec![]).unwrap();
        let mut g = build_factor_graph(&f);
        let m = spec_table();
        let mut c = StreamlineCounters::new(3, 1);
        streamline_step(&mut g, &m, 1, &mut c, PairingMode::HighLow);
        assert!(!c.eligible(1), "top pair saturates at threshold 1");
        assert_eq!(decimate_step(&g, &m, 1), vec![(1, false)]);
    }

    #[test]
    fn streamlining_pairs_high_with_low() {
        let table = MarginalTable::from_rows(vec![
            row(1, 0.95, 0.0),
            row(2, 0.0, 0.85),
            row(3, 0.75, 0.0),
            row(4, 0.0, 0.65),
        ]);
        let f = Formula::new(4, vec![]).unwrap();
        let mut g = build_factor_graph(&f);
        let mut c = StreamlineCounters::new(4, 2);
        let added = streamline_step(&mut g, &table, 2, &mut c, PairingMode::HighLow);
        let codes: Vec<Vec<i32>> = added
            .iter()
            .map(|cl| cl.literals().iter().map(|l| l.code()).collect())
            .collect();
        assert_eq!(codes, vec![vec![-1, 4], vec![2, -3]]);
        for v in 1..=4 {
            assert_eq!(c.count(v), 1);
        }
        assert_eq!(g.n_clauses(), 2);
    }

    #[test]
    fn streamlining_block_mode_pairs_halves() {
        let table = MarginalTable::from_rows(vec![
            row(1, 0.95, 0.0),
            row(2, 0.0, 0.85),
            row(3, 0.75, 0.0),
            row(4, 0.0, 0.65),
        ]);
        let f = Formula::new(4, vec![]).unwrap();
        let mut g = build_factor_graph(&f);
        let mut c = StreamlineCounters::new(4, 2);
        let added = streamline_step(&mut g, &table, 2, &mut c, PairingMode::Block);
        let codes: Vec<Vec<i32>> = added
            .iter()
            .map(|cl| cl.literals().iter().map(|l| l.code()).collect())
            .collect();
        assert_eq!(codes, vec![vec![-1, -3], vec![2, 4]]);
    }

    #[test]
    fn streamlining_odd_list_drops_middle() {
        let f = Formula::new(3, vec![]).unwrap();
        let mut g = build_factor_graph(&f);
        let mut c = StreamlineCounters::new(3, 2);
        let added = streamline_step(&mut g, &spec_table(), 2, &mut c, PairingMode::HighLow);
        assert_eq!(added.len(), 1);
        let codes: Vec<i32> = added[0].literals().iter().map(|l| l.code()).collect();
        assert_eq!(codes, vec![-1, -3], "middle candidate 2 sits out");
        assert_eq!(c.count(2), 0);
    }

    #[test]
    fn streamlining_needs_two_candidates() {
        let table = MarginalTable::from_rows(vec![row(1, 0.9, 0.05)]);
        let f = Formula::new(1, vec![]).unwrap();
        let mut g = build_factor_graph(&f);
        let mut c = StreamlineCounters::new(1, 2);
        assert!(streamline_step(&mut g, &table, 3, &mut c, PairingMode::HighLow).is_empty());
    }

    #[test]
    fn streamlining_skips_duplicate_clauses() {
        let f = Formula::new(4, vec![]).unwrap();
        let mut g = build_factor_graph(&f);
        let table = MarginalTable::from_rows(vec![
            row(1, 0.95, 0.0),
            row(2, 0.0, 0.85),
            row(3, 0.75, 0.0),
            row(4, 0.0, 0.65),
        ]);
        let mut c = StreamlineCounters::new(4, 5);
        let first = streamline_step(&mut g, &table, 2, &mut c, PairingMode::HighLow);
        assert_eq!(first.len(), 2);
        let second = streamline_step(&mut g, &table, 2, &mut c, PairingMode::HighLow);
        assert!(second.is_empty(), "same table pairs identically");
        assert_eq!(c.count(1), 1, "skipped duplicates leave counters alone");
    }

    #[test]
    fn counters_never_exceed_threshold() {
        let mut rng = Rng::new(400);
        let f = Formula::new(6, vec![]).unwrap();
        let mut g = build_factor_graph(&f);
        let mut c = StreamlineCounters::new(6, 2);
        for round in 0..20 {
            let rows: Vec<MarginalRow> = (1..=6)
                .map(|v| {
                    let a = rng.next_f64();
                    let b = rng.next_f64() * (1.0 - a);
                    row(v, a, b)
                })
                .collect();
            let table = MarginalTable::from_rows(rows);
            streamline_step(&mut g, &table, 3, &mut c, PairingMode::HighLow);
            for v in 1..=6 {
                assert!(c.count(v) <= 2, "round {round}: variable {v} over limit");
            }
        }
    }

    fn random_table(n: u32, rng: &mut Rng) -> MarginalTable {
        let rows = (1..=n)
            .map(|v| {
                let a = rng.next_f64();
                let b = rng.next_f64() * (1.0 - a);
                row(v, a, b)
            })
            .collect();
        MarginalTable::from_rows(rows)
    }

    fn full_solutions(f: &Formula) -> Vec<u64> {
        let opts = EnumerateOptions {
            max_solutions: 1 << f.n_vars(),
            ..Default::default()
        };
        let mut s = enumerate_with(f, &opts).unwrap().solutions;
        s.sort_unstable();
        s
    }

    #[test]
    fn decimation_solutions_satisfy_streamlined_formula() {
        // Fixing the top R candidates true makes the first literal of
        // every high-low pair true, so any solution surviving decimation
        // also satisfies the streamlining clauses from the same list.
        let mut rng = Rng::new(2718);
        for trial in 0..25 {
            let n = 6 + (trial % 5) as u32;
            let spec = GenSpec {
                n,
                alpha: 1.5 + 0.2 * (trial % 4) as f64,
                k: 3,
                seed: 9000 + trial,
                kind: GenKind::KSat,
            };
            let f = gen_ksat(&spec).unwrap();
            let table = random_table(n, &mut rng);
            let r = 1 + (trial as usize % 3);

            let g0 = build_factor_graph(&f);
            let fixes = decimate_step(&g0, &table, r);
            let mut decimated_clauses = f.clauses().to_vec();
            for &(v, val) in &fixes {
                let lit = Literal::new(v, !val);
                decimated_clauses.push(Clause::new(vec![lit], ClauseOrigin::Original).unwrap());
            }
            let f_d = Formula::new(n, decimated_clauses).unwrap();

            let mut g = build_factor_graph(&f);
            let mut c = StreamlineCounters::new(n, u32::MAX);
            streamline_step(&mut g, &table, r, &mut c, PairingMode::HighLow);
            let f_s = g.to_formula();

            let sols_d = full_solutions(&f_d);
            let sols_s = full_solutions(&f_s);
            for s in &sols_d {
                assert!(
                    sols_s.binary_search(s).is_ok(),
                    "trial {trial}: decimation survivor lost under streamlining"
                );
            }
        }
    }

    #[test]
    fn two_clause_state_space_arithmetic() {
        // |sol(F ∧ (ℓi∨ℓj))| = |sol(F)| − |sol(F ∧ ¬ℓi ∧ ¬ℓj)|, and on
        // the free hypercube one fresh 2-clause removes a quarter of it.
        let spec = GenSpec {
            n: 10,
            alpha: 1.2,
            k: 3,
            seed: 51,
            kind: GenKind::KSat,
        };
        let f = gen_ksat(&spec).unwrap();
        let (li, lj) = (Literal::pos(2), Literal::neg(7));
        let mut with_clause = f.clauses().to_vec();
        with_clause
            .push(Clause::new(vec![li, lj], ClauseOrigin::Streamlining).unwrap());
        let f_or = Formula::new(10, with_clause).unwrap();
        let mut with_negation = f.clauses().to_vec();
        with_negation
            .push(Clause::new(vec![li.complement()], ClauseOrigin::Original).unwrap());
        with_negation
            .push(Clause::new(vec![lj.complement()], ClauseOrigin::Original).unwrap());
        let f_neg = Formula::new(10, with_negation).unwrap();
        assert_eq!(
            full_solutions(&f_or).len(),
            full_solutions(&f).len() - full_solutions(&f_neg).len()
        );

        let empty = Formula::new(10, vec![]).unwrap();
        let mut hyper = empty.clauses().to_vec();
        hyper.push(Clause::new(vec![li, lj], ClauseOrigin::Streamlining).unwrap());
        let cube_cut = Formula::new(10, hyper).unwrap();
        assert_eq!(full_solutions(&cube_cut).len(), 3 * (1 << 8));
    }
}
