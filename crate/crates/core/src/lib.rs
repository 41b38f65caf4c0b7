//! Survey propagation SAT toolkit.
//!
//! Message passing computes per-variable warning marginals on a factor
//! graph; branching consumes those marginals either by fixing the most
//! biased variables (decimation) or by adding soft disjunctive constraints
//! over the most biased pairs (streamlining). A local-search endgame
//! finishes the residual formula once bias fades. Exact enumeration
//! oracles and an experiment harness round out the toolkit.

pub mod branch;
pub mod cnf;
pub mod gen;
pub mod graph;
pub mod harness;
pub mod oracle;
pub mod rng;
pub mod solver;
pub mod sp;
pub mod walksat;

pub use branch::{
    decimate_step, rank_candidates, streamline_step, Candidate, CandidateList, PairingMode,
    StreamlineCounters,
};
pub use cnf::{
    emit_dimacs, emit_dimacs_marked, evaluate, parse_dimacs, Assignment, Clause, ClauseOrigin,
    EvalReport, Formula, Literal,
};
pub use gen::{gen_2xorsat, gen_ksat, GenKind, GenSpec};
pub use graph::{build_factor_graph, Contradiction, FactorGraph};
pub use oracle::{
    calibration, enumerate, enumerate_with, is_satisfiable, mean_pairwise_hamming,
    xor2_satisfiable, EnumerateOptions, EnumerationResult, XorSystem,
};
pub use harness::{
    algorithmic_threshold, calibration_trace, one_sided_sign_test, parse_calibrate_config,
    parse_sweep_config, run_sweep, spearman, sweep_instance, tune_t, wilson, write_sweep_csv,
    write_trace_csv, Alg, CalibrateSpec, CalibrationTrace, InstanceOutcome, SweepReport, SweepRow,
    SweepSpec, TraceRow, TunedT,
};
pub use rng::Rng;
pub use solver::{
    solve_sid, solve_sis, solve_with_observer, streamline_preprocess, FailureKind,
    PreprocessResult, PreprocessWarning, RBasis, SolveOutcome, SolveStats, SolveStatus,
    SolverConfig,
};
pub use walksat::{walksat, WalkSatParams, WalkSatResult, WalkSatStatus};
pub use sp::{
    init_messages, marginalize, run_sp, run_sp_fresh, run_sp_warm, sp_update_sweep, MarginalRow, MarginalTable,
    MessageState, SpConfig, SpOutcome, SpStatus,
};
