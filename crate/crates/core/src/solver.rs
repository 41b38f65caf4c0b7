//! The branching loop shared by decimation and streamlining: message
//! passing, termination test, branch, simplify, and the local-search
//! endgame, with exhaustive failure classification.

use crate::branch::{decimate_step, streamline_step, PairingMode, StreamlineCounters};
use crate::cnf::{evaluate, Assignment, Formula};
use crate::graph::{build_factor_graph, FactorGraph};
use crate::rng::mix_seed;
use crate::sp::{
    marginalize, round_seed, run_sp_fresh, run_sp_warm, MarginalTable, MessageState, SpConfig,
    SpStatus,
};
use crate::walksat::{walksat, WalkSatParams, WalkSatStatus};
use std::time::{Duration, Instant};
use thiserror::Error;

/// Mean per-variable bias below which a converged state counts as
/// paramagnetic for message carry-over. Fixed rather than tied to
/// `epsilon_frac` so configs that disable the local-search handoff
/// still restart from the trivial fixed point.
const SIGNAL_FRAC: f64 = 0.01;

/// Which variable count the branch width R = max(1, round(r_frac * n))
/// is taken from each round.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum RBasis {
    #[default]
    OriginalN,
    LiveN,
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Branch width as a fraction of the variable count.
    pub r_frac: f64,
    pub r_basis: RBasis,
    /// Streamlining rounds before decimation takes over; 0 never
    /// streamlines.
    pub t: u32,
    /// Streamlining participation cap per variable.
    pub counter_threshold: u32,
    /// Termination: local search starts once total bias falls below
    /// epsilon_frac * live variables.
    pub epsilon_frac: f64,
    pub sp: SpConfig,
    pub ws: WalkSatParams,
    pub pairing: PairingMode,
    pub seed: u64,
    /// Wall-clock cap checked at round boundaries; None runs unbounded.
    pub time_budget: Option<Duration>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            r_frac: 0.01,
            r_basis: RBasis::OriginalN,
            t: 0,
            counter_threshold: 2,
            epsilon_frac: 0.01,
            sp: SpConfig::default(),
            ws: WalkSatParams::default(),
            pairing: PairingMode::HighLow,
            seed: 0,
            time_budget: None,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FailureKind {
    NonConvergence,
    LocalSearchTimeout,
    Contradiction,
}

#[derive(Clone, Debug)]
pub enum SolveStatus {
    /// Carries an assignment verified against the formula the solver was
    /// given (added streamlining clauses are not part of that check).
    Sat(Assignment),
    /// Message passing or propagation hit a contradiction. A heuristic
    /// claim only: streamlining clauses and decimation guesses are not
    /// implied by the input, so the input may still be satisfiable.
    UnsatClaim,
    Failure(FailureKind),
}

#[derive(Clone, Debug, Default)]
pub struct SolveStats {
    pub rounds: u32,
    pub streamlining_clauses: u32,
    pub variables_fixed: u32,
    pub sweeps: u64,
    pub ls_flips: u64,
    pub wall: Duration,
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub stats: SolveStats,
}

impl SolveOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self.status, SolveStatus::Sat(_))
    }

    /// Exhaustive failure taxonomy for non-SAT runs; an unsatisfiability
    /// claim lands in the Contradiction bucket.
    pub fn failure_kind(&self) -> Option<FailureKind> {
        match &self.status {
            SolveStatus::Sat(_) => None,
            SolveStatus::UnsatClaim => Some(FailureKind::Contradiction),
            SolveStatus::Failure(k) => Some(*k),
        }
    }
}

/// Decimation only: fix the top R variables each round.
pub fn solve_sid(f: &Formula, cfg: &SolverConfig) -> SolveOutcome {
    solve_with_observer(f, cfg, 0, &mut |_, _, _| {})
}

/// T rounds of streamlining, then decimation; identical loop otherwise.
pub fn solve_sis(f: &Formula, cfg: &SolverConfig) -> SolveOutcome {
    solve_with_observer(f, cfg, cfg.t, &mut |_, _, _| {})
}

/// The shared loop with a per-round hook, called after marginalization
/// and before branching; used for calibration traces.
pub fn solve_with_observer(
    f: &Formula,
    cfg: &SolverConfig,
    t_streamline: u32,
    observer: &mut dyn FnMut(u32, &FactorGraph, &MarginalTable),
) -> SolveOutcome {
    let start = Instant::now();
    let mut stats = SolveStats::default();
    let mut g = build_factor_graph(f);
    let mut counters = StreamlineCounters::new(f.n_vars(), cfg.counter_threshold);
    let mut msgs = MessageState::empty();
    let mut round = 0u32;
    // Carry converged messages into the next round only when they hold
    // signal. The all-zero state is an exact fixed point, so warm-
    // starting from a paramagnetic round would pin every later round
    // there; a biased state is worth continuing from as the graph
    // tightens.
    let mut carry = false;

    let finish = |status: SolveStatus, mut stats: SolveStats| {
        stats.wall = start.elapsed();
        SolveOutcome { status, stats }
    };

    loop {
        if let Some(budget) = cfg.time_budget {
            if start.elapsed() > budget {
                return finish(
                    SolveStatus::Failure(FailureKind::NonConvergence),
                    stats,
                );
            }
        }
        if g.live_clause_count() == 0 {
            let assignment = complete_assignment(&g, f);
            return finish(SolveStatus::Sat(assignment), stats);
        }
        stats.rounds += 1;

        let seed = round_seed(cfg.seed, round as u64);
        let report = if carry {
            run_sp_warm(&g, &mut msgs, &cfg.sp, seed)
        } else {
            run_sp_fresh(&g, &mut msgs, &cfg.sp, seed)
        };
        stats.sweeps += report.sweeps;
        match report.status {
            SpStatus::ContradictionFound => return finish(SolveStatus::UnsatClaim, stats),
            SpStatus::Unconverged => {
                return finish(SolveStatus::Failure(FailureKind::NonConvergence), stats)
            }
            SpStatus::Converged => {}
        }
        let table = match marginalize(&g, &msgs) {
            Ok(t) => t,
            Err(_) => return finish(SolveStatus::UnsatClaim, stats),
        };
        observer(round, &g, &table);

        let epsilon = cfg.epsilon_frac * g.live_var_count() as f64;
        let bias = table.total_bias();
        carry = bias >= SIGNAL_FRAC * g.live_var_count() as f64;
        if bias < epsilon {
            return finish(run_endgame(&g, f, cfg, &mut stats), stats.clone());
        }

        let r = branch_width(cfg, &g);
        if round < t_streamline {
            let added = streamline_step(&mut g, &table, r, &mut counters, cfg.pairing);
            if !added.is_empty() {
                stats.streamlining_clauses += added.len() as u32;
                round += 1;
                continue;
            }
            // Candidates exhausted: fall through to decimation this round.
        }
        let fixes = decimate_step(&g, &table, r);
        if fixes.is_empty() {
            return finish(run_endgame(&g, f, cfg, &mut stats), stats.clone());
        }
        match g.unit_propagate(&fixes) {
            Ok(assigned) => stats.variables_fixed += assigned.len() as u32,
            Err(_) => return finish(SolveStatus::UnsatClaim, stats),
        }
        g.compact_occurrences();
        round += 1;
    }
}

fn branch_width(cfg: &SolverConfig, g: &FactorGraph) -> usize {
    let basis = match cfg.r_basis {
        RBasis::OriginalN => g.n_vars() as f64,
        RBasis::LiveN => g.live_var_count() as f64,
    };
    ((cfg.r_frac * basis).round() as usize).max(1)
}

/// Unassigned variables default to false once no live clause constrains
/// them.
fn complete_assignment(g: &FactorGraph, f: &Formula) -> Assignment {
    let fallback = Assignment::empty(f.n_vars());
    let assignment = g.assignment().overlay(&fallback, false);
    let report = evaluate(f, &assignment).expect("assignment is total");
    assert!(
        report.satisfied,
        "propagation left live-clause accounting inconsistent"
    );
    assignment
}

fn run_endgame(
    g: &FactorGraph,
    f: &Formula,
    cfg: &SolverConfig,
    stats: &mut SolveStats,
) -> SolveStatus {
    let residual = g.residual_formula();
    let params = WalkSatParams {
        seed: mix_seed(&[cfg.seed, 0x5753]),
        ..cfg.ws.clone()
    };
    let result = walksat(&residual, &params);
    stats.ls_flips += result.flips;
    match result.status {
        WalkSatStatus::Found(partial) => {
            let assignment = g.assignment().overlay(&partial, false);
            let report = evaluate(f, &assignment).expect("assignment is total");
            assert!(
                report.satisfied,
                "residual solution must extend to the input formula"
            );
            SolveStatus::Sat(assignment)
        }
        WalkSatStatus::Timeout => SolveStatus::Failure(FailureKind::LocalSearchTimeout),
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PreprocessWarning {
    NonConvergence,
    Contradiction,
}

#[derive(Clone, Debug)]
pub struct PreprocessResult {
    /// Input clauses plus accumulated streamlining clauses, same n_vars.
    pub formula: Formula,
    pub completed_rounds: u32,
    /// Set when message passing gave out before all rounds ran; the
    /// formula still carries everything accumulated so far.
    pub warning: Option<PreprocessWarning>,
}

#[derive(Error, Debug, PartialEq, Eq)]
pub enum PreprocessError {
    #[error("rounds must be at least 1")]
    ZeroRounds,
}

/// Runs SP + streamline for `rounds` rounds with no decimation or local
/// search, then emits the augmented formula for a downstream solver.
pub fn streamline_preprocess(
    f: &Formula,
    cfg: &SolverConfig,
    rounds: u32,
) -> Result<PreprocessResult, PreprocessError> {
    if rounds == 0 {
        return Err(PreprocessError::ZeroRounds);
    }
    let mut g = build_factor_graph(f);
    let mut counters = StreamlineCounters::new(f.n_vars(), cfg.counter_threshold);
    let mut msgs = MessageState::empty();
    let mut warning = None;
    let mut completed = 0u32;
    for round in 0..rounds {
        let report = run_sp_fresh(&g, &mut msgs, &cfg.sp, round_seed(cfg.seed, round as u64));
        match report.status {
            SpStatus::ContradictionFound => {
                warning = Some(PreprocessWarning::Contradiction);
                break;
            }
            SpStatus::Unconverged => {
                warning = Some(PreprocessWarning::NonConvergence);
                break;
            }
            SpStatus::Converged => {}
        }
        let table = match marginalize(&g, &msgs) {
            Ok(t) => t,
            Err(_) => {
                warning = Some(PreprocessWarning::Contradiction);
                break;
            }
        };
        let r = branch_width(cfg, &g);
        let added = streamline_step(&mut g, &table, r, &mut counters, cfg.pairing);
        completed += 1;
        if added.is_empty() {
            // Same marginals next round would pair identically; stop.
            break;
        }
    }
    Ok(PreprocessResult {
        formula: g.to_formula(),
        completed_rounds: completed,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::ClauseOrigin;
    use crate::gen::{gen_ksat, GenKind, GenSpec};
    use crate::oracle::{enumerate_with, EnumerateOptions};

    fn cfg_with_seed(seed: u64) -> SolverConfig {
        SolverConfig {
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn sid_solves_underconstrained_instance() {
        let f = Formula::from_codes(3, &[&[1, 2], &[2, 3]]).unwrap();
        let outcome = solve_sid(&f, &cfg_with_seed(1));
        match outcome.status {
            SolveStatus::Sat(a) => assert!(evaluate(&f, &a).unwrap().satisfied),
            other => panic!("expected SAT, got {other:?}"),
        }
    }

    #[test]
    fn sis_solves_underconstrained_instance() {
        let f = Formula::from_codes(3, &[&[1, 2], &[2, 3]]).unwrap();
        let cfg = SolverConfig {
            t: 3,
            ..cfg_with_seed(2)
        };
        assert!(solve_sis(&f, &cfg).is_sat());
    }

    #[test]
    fn complete_sign_pattern_is_never_sat() {
        // All 8 sign patterns over (x1,x2,x3) leave no assignment.
        let codes: Vec<Vec<i32>> = (0..8)
            .map(|bits| {
                (1..=3)
                    .map(|v| if bits >> (v - 1) & 1 == 1 { -v } else { v })
                    .collect()
            })
            .collect();
        let refs: Vec<&[i32]> = codes.iter().map(|c| c.as_slice()).collect();
        let f = Formula::from_codes(3, &refs).unwrap();
        for seed in 0..5 {
            let outcome = solve_sid(&f, &cfg_with_seed(seed));
            assert!(!outcome.is_sat(), "seed {seed} claimed SAT on UNSAT input");
            assert!(outcome.failure_kind().is_some());
        }
    }

    #[test]
    fn direct_contradiction_yields_unsat_claim() {
        let f = Formula::from_codes(1, &[&[1], &[-1]]).unwrap();
        let outcome = solve_sid(&f, &cfg_with_seed(7));
        assert!(matches!(outcome.status, SolveStatus::UnsatClaim));
        assert_eq!(outcome.failure_kind(), Some(FailureKind::Contradiction));
    }

    #[test]
    fn t_zero_streamlining_degenerates_to_decimation() {
        let spec = GenSpec {
            n: 80,
            alpha: 3.6,
            k: 3,
            seed: 44,
            kind: GenKind::KSat,
        };
        let f = gen_ksat(&spec).unwrap();
        let cfg = SolverConfig {
            t: 0,
            ..cfg_with_seed(9)
        };
        let sid = solve_sid(&f, &cfg);
        let sis = solve_sis(&f, &cfg);
        assert_eq!(sid.stats.rounds, sis.stats.rounds);
        assert_eq!(sid.stats.sweeps, sis.stats.sweeps);
        assert_eq!(sid.stats.variables_fixed, sis.stats.variables_fixed);
        match (sid.status, sis.status) {
            (SolveStatus::Sat(a), SolveStatus::Sat(b)) => assert_eq!(a, b),
            (a, b) => panic!("statuses diverged: {a:?} vs {b:?}"),
        }
    }

    #[test]
    fn solves_easy_random_instances_verified() {
        for seed in 0..10 {
            let spec = GenSpec {
                n: 120,
                alpha: 3.4,
                k: 3,
                seed: 100 + seed,
                kind: GenKind::KSat,
            };
            let f = gen_ksat(&spec).unwrap();
            let outcome = solve_sid(&f, &cfg_with_seed(seed));
            match outcome.status {
                SolveStatus::Sat(a) => assert!(evaluate(&f, &a).unwrap().satisfied),
                other => panic!("seed {seed}: expected SAT, got {other:?}"),
            }
        }
    }

    #[test]
    fn sis_streamlines_before_decimating() {
        let spec = GenSpec {
            n: 100,
            alpha: 4.0,
            k: 3,
            seed: 5,
            kind: GenKind::KSat,
        };
        let f = gen_ksat(&spec).unwrap();
        let cfg = SolverConfig {
            t: 4,
            ..cfg_with_seed(3)
        };
        let outcome = solve_sis(&f, &cfg);
        assert!(
            outcome.stats.streamlining_clauses > 0,
            "T=4 must add streamlining clauses, stats: {:?}",
            outcome.stats
        );
    }

    #[test]
    fn preprocess_rejects_zero_rounds() {
        let f = Formula::from_codes(2, &[&[1, 2]]).unwrap();
        assert_eq!(
            streamline_preprocess(&f, &cfg_with_seed(0), 0).unwrap_err(),
            PreprocessError::ZeroRounds
        );
    }

    #[test]
    fn preprocess_adds_short_clauses_and_keeps_width() {
        let spec = GenSpec {
            n: 60,
            alpha: 3.8,
            k: 3,
            seed: 21,
            kind: GenKind::KSat,
        };
        let f = gen_ksat(&spec).unwrap();
        let result = streamline_preprocess(&f, &cfg_with_seed(4), 1).unwrap();
        assert!(result.warning.is_none());
        assert_eq!(result.completed_rounds, 1);
        assert_eq!(result.formula.n_vars(), 60);
        let added: Vec<_> = result
            .formula
            .clauses()
            .iter()
            .filter(|c| c.origin() == ClauseOrigin::Streamlining)
            .collect();
        assert!(!added.is_empty() && added.len() <= 1.max((0.01f64 * 60.0).round() as usize));
        assert!(added.iter().all(|c| c.len() <= 2));
    }

    #[test]
    fn preprocess_output_solutions_subset_of_input() {
        let spec = GenSpec {
            n: 14,
            alpha: 3.0,
            k: 3,
            seed: 33,
            kind: GenKind::KSat,
        };
        let f = gen_ksat(&spec).unwrap();
        let result = streamline_preprocess(&f, &cfg_with_seed(6), 3).unwrap();
        let opts = EnumerateOptions {
            max_solutions: 1 << 14,
            ..Default::default()
        };
        let mut orig = enumerate_with(&f, &opts).unwrap().solutions;
        orig.sort_unstable();
        let narrowed = enumerate_with(&result.formula, &opts).unwrap();
        assert!(narrowed.count as usize <= orig.len());
        for s in &narrowed.solutions {
            assert!(orig.binary_search(s).is_ok(), "streamlining invented a solution");
        }
    }

    #[test]
    fn time_budget_reports_nonconvergence() {
        let spec = GenSpec {
            n: 400,
            alpha: 4.2,
            k: 3,
            seed: 77,
            kind: GenKind::KSat,
        };
        let f = gen_ksat(&spec).unwrap();
        let cfg = SolverConfig {
            time_budget: Some(Duration::ZERO),
            ..cfg_with_seed(0)
        };
        let outcome = solve_sid(&f, &cfg);
        assert!(matches!(
            outcome.status,
            SolveStatus::Failure(FailureKind::NonConvergence)
        ));
    }
}
