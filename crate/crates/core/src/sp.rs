//! Survey propagation message passing: warning surveys on clause-variable
//! edges, convergence control, and warning marginals.
//!
//! A message η on edge (a, i) estimates the probability that clause a
//! warns variable i, i.e. that a's other variables are all frozen the
//! wrong way and i alone must satisfy a.

use crate::graph::FactorGraph;
use crate::rng::{mix_seed, Rng};
use thiserror::Error;

#[derive(Clone, Debug)]
pub struct SpConfig {
    /// Convergence tolerance on the max absolute message change per sweep.
    pub msg_tol: f64,
    /// Sweep cap per attempt.
    pub max_sweeps: u32,
    /// Total attempts: the first initialization plus fresh random
    /// re-initializations after non-convergence.
    pub restarts: u32,
    /// Mixing factor in [0,1): new = (1-d)*update + d*old. 0 disables.
    pub damping: f64,
}

impl Default for SpConfig {
    fn default() -> Self {
        SpConfig {
            msg_tol: 1e-3,
            max_sweeps: 1000,
            restarts: 3,
            damping: 0.0,
        }
    }
}

/// Messages indexed by edge id (position in the graph's flat literal
/// array). Entries for dead edges linger untouched and unread.
#[derive(Clone, Debug, Default)]
pub struct MessageState {
    eta: Vec<f64>,
}

impl MessageState {
    pub fn empty() -> Self {
        MessageState { eta: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    pub fn eta(&self, edge: u32) -> f64 {
        self.eta[edge as usize]
    }

    pub fn set_eta(&mut self, edge: u32, value: f64) {
        self.eta[edge as usize] = value;
    }

    /// Fresh uniform entries for edges beyond the current length; used to
    /// warm-start after streamlining appends clauses.
    pub fn grow_to(&mut self, n_edges: usize, rng: &mut Rng) {
        while self.eta.len() < n_edges {
            self.eta.push(rng.next_f64());
        }
    }

    fn reinit(&mut self, n_edges: usize, rng: &mut Rng) {
        self.eta.clear();
        self.grow_to(n_edges, rng);
    }
}

/// Independent uniform [0,1) message per edge; deterministic given seed.
pub fn init_messages(g: &FactorGraph, seed: u64) -> MessageState {
    let mut rng = Rng::new(seed);
    let mut state = MessageState::empty();
    state.grow_to(g.total_edges(), &mut rng);
    state
}

#[derive(Clone, Copy, Debug)]
pub struct SweepReport {
    pub max_delta: f64,
    /// Some variable received certain warnings in both directions.
    pub contradiction: bool,
}

/// One asynchronous sweep over all live edges in a fresh random order.
/// Messages are read and written in place, so later edges see earlier
/// updates.
pub fn sp_update_sweep(
    g: &FactorGraph,
    msgs: &mut MessageState,
    rng: &mut Rng,
    damping: f64,
) -> SweepReport {
    let mut order = Vec::new();
    collect_live_edges(g, &mut order);
    sweep_over(g, msgs, rng, damping, &mut order)
}

fn collect_live_edges(g: &FactorGraph, order: &mut Vec<(u32, u32)>) {
    order.clear();
    for c in g.live_clauses() {
        let base = g.clause_edge_base(c);
        for (off, lit) in g.clause_lits(c).iter().enumerate() {
            if g.var_is_live(lit.var()) {
                order.push((c as u32, base + off as u32));
            }
        }
    }
}

fn sweep_over(
    g: &FactorGraph,
    msgs: &mut MessageState,
    rng: &mut Rng,
    damping: f64,
    order: &mut [(u32, u32)],
) -> SweepReport {
    rng.shuffle(order);
    let mut max_delta = 0.0f64;
    let mut contradiction = false;
    for &(clause, edge) in order.iter() {
        let clause = clause as usize;
        let target_var = g.edge_literal(edge).var();
        let base = g.clause_edge_base(clause);
        let mut product = 1.0f64;
        for (off, lit) in g.clause_lits(clause).iter().enumerate() {
            let j = lit.var();
            if j == target_var || !g.var_is_live(j) {
                continue;
            }
            let j_edge = base + off as u32;
            let sign_in_a = lit.is_negated();
            // Products over j's other live clauses, split by whether j
            // appears there with the same sign as in this clause.
            let mut p_same = 1.0f64;
            let mut p_diff = 1.0f64;
            for &(b, be) in g.var_occurrences(j) {
                if be == j_edge || !g.clause_is_live(b as usize) {
                    continue;
                }
                let factor = 1.0 - msgs.eta(be);
                if g.edge_literal(be).is_negated() == sign_in_a {
                    p_same *= factor;
                } else {
                    p_diff *= factor;
                }
            }
            // Weight that j is frozen against this clause, over the
            // weight of all three j states.
            let eta_u = (1.0 - p_diff) * p_same;
            let denom = p_same + p_diff - p_same * p_diff;
            if denom == 0.0 {
                contradiction = true;
                product = 0.0;
                break;
            }
            product *= eta_u / denom;
        }
        let old = msgs.eta(edge);
        let new = if damping > 0.0 {
            (1.0 - damping) * product + damping * old
        } else {
            product
        };
        max_delta = max_delta.max((new - old).abs());
        msgs.set_eta(edge, new);
    }
    SweepReport {
        max_delta,
        contradiction,
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SpStatus {
    Converged,
    Unconverged,
    ContradictionFound,
}

#[derive(Clone, Copy, Debug)]
pub struct SpRunReport {
    pub status: SpStatus,
    /// Sweeps performed across all attempts of this call.
    pub sweeps: u64,
    pub attempts: u32,
}

#[derive(Clone, Debug)]
pub enum SpOutcome {
    Converged(MessageState),
    Unconverged,
    ContradictionFound,
}

/// Runs sweeps until the max change drops below msg_tol, re-initializing
/// on non-convergence up to cfg.restarts total attempts.
pub fn run_sp(g: &FactorGraph, cfg: &SpConfig, seed: u64) -> SpOutcome {
    let mut msgs = MessageState::empty();
    let report = run_sp_from(g, &mut msgs, cfg, seed, false);
    match report.status {
        SpStatus::Converged => SpOutcome::Converged(msgs),
        SpStatus::Unconverged => SpOutcome::Unconverged,
        SpStatus::ContradictionFound => SpOutcome::ContradictionFound,
    }
}

/// Like [`run_sp`] but reuses `msgs` as the message buffer, starting
/// every attempt from fresh random values. The all-zero state is an
/// exact fixed point, so carrying messages across rounds would pin a
/// paramagnetic round-0 outcome for the rest of a solve; a fresh start
/// lets later, denser rounds find a nontrivial fixed point.
pub fn run_sp_fresh(
    g: &FactorGraph,
    msgs: &mut MessageState,
    cfg: &SpConfig,
    seed: u64,
) -> SpRunReport {
    run_sp_from(g, msgs, cfg, seed, false)
}

/// Like [`run_sp`] but the first attempt continues from `msgs` (grown
/// with fresh entries for any new edges); later attempts re-initialize.
pub fn run_sp_warm(
    g: &FactorGraph,
    msgs: &mut MessageState,
    cfg: &SpConfig,
    seed: u64,
) -> SpRunReport {
    run_sp_from(g, msgs, cfg, seed, true)
}

fn run_sp_from(
    g: &FactorGraph,
    msgs: &mut MessageState,
    cfg: &SpConfig,
    seed: u64,
    warm_first: bool,
) -> SpRunReport {
    let mut rng = Rng::new(seed);
    let mut order = Vec::new();
    collect_live_edges(g, &mut order);
    let mut sweeps = 0u64;
    for attempt in 1..=cfg.restarts.max(1) {
        if attempt == 1 && warm_first {
            msgs.grow_to(g.total_edges(), &mut rng);
        } else {
            msgs.reinit(g.total_edges(), &mut rng);
        }
        for _ in 0..cfg.max_sweeps {
            let report = sweep_over(g, msgs, &mut rng, cfg.damping, &mut order);
            sweeps += 1;
            if report.contradiction {
                return SpRunReport {
                    status: SpStatus::ContradictionFound,
                    sweeps,
                    attempts: attempt,
                };
            }
            if report.max_delta < cfg.msg_tol {
                return SpRunReport {
                    status: SpStatus::Converged,
                    sweeps,
                    attempts: attempt,
                };
            }
        }
    }
    SpRunReport {
        status: SpStatus::Unconverged,
        sweeps,
        attempts: cfg.restarts.max(1),
    }
}

/// Seed for the SP stream of a solve round, derived so distinct rounds
/// decorrelate.
pub fn round_seed(base: u64, round: u64) -> u64 {
    mix_seed(&[base, 0x5350, round])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarginalRow {
    pub var: u32,
    pub mu0: f64,
    pub mu1: f64,
    pub mu_star: f64,
}

impl MarginalRow {
    pub fn magnetization(&self) -> f64 {
        (self.mu0 - self.mu1).abs()
    }

    /// Value to fix the variable to; ties resolve to 0.
    pub fn preferred(&self) -> bool {
        self.mu1 > self.mu0
    }
}

/// Per-live-variable warning marginals, rows in ascending variable order,
/// each row normalized to sum 1.
#[derive(Clone, Debug, Default)]
pub struct MarginalTable {
    rows: Vec<MarginalRow>,
}

#[derive(Error, Debug, Clone, Copy, PartialEq, Eq)]
#[error("variable {var}: certain warnings in both directions")]
pub struct MarginalContradiction {
    pub var: u32,
}

impl MarginalTable {
    /// Test and interop constructor; rows must be normalized and sorted.
    pub fn from_rows(rows: Vec<MarginalRow>) -> Self {
        for w in rows.windows(2) {
            assert!(w[0].var < w[1].var, "rows must be sorted by variable");
        }
        for r in &rows {
            let sum = r.mu0 + r.mu1 + r.mu_star;
            assert!((sum - 1.0).abs() < 1e-9, "row for {} sums to {sum}", r.var);
        }
        MarginalTable { rows }
    }

    pub fn rows(&self) -> &[MarginalRow] {
        &self.rows
    }

    pub fn get(&self, var: u32) -> Option<&MarginalRow> {
        self.rows
            .binary_search_by_key(&var, |r| r.var)
            .ok()
            .map(|i| &self.rows[i])
    }

    /// Σ |μ0 − μ1| over live variables; the branching loop stops when
    /// this falls below its threshold.
    pub fn total_bias(&self) -> f64 {
        self.rows.iter().map(|r| r.magnetization()).sum()
    }
}

/// Warning marginals per live variable. A variable is pushed toward 1
/// when at least one clause holding it positively warns and no clause
/// holding it negatively does; symmetric for 0; unconstrained weight is
/// the no-warning product.
pub fn marginalize(
    g: &FactorGraph,
    msgs: &MessageState,
) -> Result<MarginalTable, MarginalContradiction> {
    let mut rows = Vec::with_capacity(g.live_var_count());
    for var in g.live_vars() {
        let mut p_plus = 1.0f64;
        let mut p_minus = 1.0f64;
        for &(b, be) in g.var_occurrences(var) {
            if !g.clause_is_live(b as usize) {
                continue;
            }
            let factor = 1.0 - msgs.eta(be);
            if g.edge_literal(be).is_negated() {
                p_minus *= factor;
            } else {
                p_plus *= factor;
            }
        }
        let w1 = (1.0 - p_plus) * p_minus;
        let w0 = (1.0 - p_minus) * p_plus;
        let w_star = p_plus * p_minus;
        let total = w0 + w1 + w_star;
        if total == 0.0 {
            return Err(MarginalContradiction { var });
        }
        let row = MarginalRow {
            var,
            mu0: w0 / total,
            mu1: w1 / total,
            mu_star: w_star / total,
        };
        debug_assert!((row.mu0 + row.mu1 + row.mu_star - 1.0).abs() < 1e-9);
        rows.push(row);
    }
    Ok(MarginalTable { rows })
}
