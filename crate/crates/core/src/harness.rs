//! Experiment runner: density sweeps with paired instances, T tuning,
//! failure tallies, calibration traces, and CSV emission.

use crate::cnf::{Clause, ClauseOrigin, Formula, Literal};
use crate::gen::{gen_ksat, GenKind, GenSpec};
use crate::oracle::{calibration, enumerate_with, mean_pairwise_hamming, EnumerateOptions};
use crate::rng::mix_seed;
use crate::solver::{solve_sid, solve_sis, solve_with_observer, FailureKind, SolveOutcome, SolverConfig};
use crate::sp::MarginalTable;
use rayon::prelude::*;
use std::collections::HashMap;
use std::time::Duration;
use thiserror::Error;

/// 95% two-sided normal quantile for Wilson intervals.
const WILSON_Z: f64 = 1.96;

/// Seed-stream tags keep generation, training, and solving decorrelated.
const TAG_GEN: u64 = 0x47454e;
const TAG_TRAIN: u64 = 0x5452;
const TAG_SOLVE: u64 = 0x534f4c;

pub const MAGNETIZATION_BINS: usize = 20;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum Alg {
    Sid,
    Sis,
}

impl Alg {
    pub fn name(&self) -> &'static str {
        match self {
            Alg::Sid => "sid",
            Alg::Sis => "sis",
        }
    }

    fn tag(&self) -> u64 {
        match self {
            Alg::Sid => 1,
            Alg::Sis => 2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub k: u32,
    pub n: u32,
    pub alphas: Vec<f64>,
    pub instances_per_alpha: u32,
    pub algs: Vec<Alg>,
    /// Candidate streamlining horizons tried during tuning.
    pub t_grid: Vec<u32>,
    /// Skips tuning entirely when set.
    pub t_fixed: Option<u32>,
    pub train_instances: u32,
    pub seed: u64,
    /// Worker threads; 0 uses the global default.
    pub parallelism: usize,
    /// Per-instance wall-clock cap.
    pub budget: Option<Duration>,
    pub r_frac: f64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            k: 3,
            n: 100,
            alphas: vec![4.0],
            instances_per_alpha: 10,
            algs: vec![Alg::Sid, Alg::Sis],
            t_grid: (1..=10).map(|i| i * 10).collect(),
            t_fixed: None,
            train_instances: 20,
            seed: 0,
            parallelism: 0,
            budget: None,
            r_frac: 0.01,
        }
    }
}

#[derive(Error, Debug, PartialEq, Eq)]
pub enum SweepError {
    #[error("alphas must be nonempty")]
    EmptyAlphas,
    #[error("instances_per_alpha must be at least 1")]
    ZeroInstances,
    #[error("algs must be nonempty")]
    EmptyAlgs,
    #[error("t_grid must be nonempty when tuning for sis")]
    EmptyTGrid,
    #[error("train_instances must be at least 1 when tuning")]
    ZeroTrainInstances,
    #[error("bad generator shape: {0}")]
    Gen(String),
    #[error("thread pool: {0}")]
    Pool(String),
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), SweepError> {
        if self.alphas.is_empty() {
            return Err(SweepError::EmptyAlphas);
        }
        if self.instances_per_alpha == 0 {
            return Err(SweepError::ZeroInstances);
        }
        if self.algs.is_empty() {
            return Err(SweepError::EmptyAlgs);
        }
        if self.algs.contains(&Alg::Sis) && self.t_fixed.is_none() {
            if self.t_grid.is_empty() {
                return Err(SweepError::EmptyTGrid);
            }
            if self.train_instances == 0 {
                return Err(SweepError::ZeroTrainInstances);
            }
        }
        Ok(())
    }

    fn solver_config(&self, t: u32, solve_seed: u64) -> SolverConfig {
        SolverConfig {
            r_frac: self.r_frac,
            t,
            seed: solve_seed,
            time_budget: self.budget,
            ..Default::default()
        }
    }
}

/// The exact instance a sweep row's (alpha, index) slot solves. Both
/// algorithms receive this same formula; only solver seeds differ.
pub fn sweep_instance(spec: &SweepSpec, alpha: f64, index: u32) -> Result<Formula, SweepError> {
    paired_instance(spec, alpha, index, TAG_GEN)
}

fn paired_instance(
    spec: &SweepSpec,
    alpha: f64,
    index: u32,
    stream: u64,
) -> Result<Formula, SweepError> {
    let gen = GenSpec {
        n: spec.n,
        alpha,
        k: spec.k,
        seed: mix_seed(&[spec.seed, stream, alpha.to_bits(), index as u64]),
        kind: GenKind::KSat,
    };
    gen_ksat(&gen).map_err(|e| SweepError::Gen(e.to_string()))
}

#[derive(Clone, Debug)]
pub struct InstanceOutcome {
    pub alg: Alg,
    pub alpha: f64,
    pub index: u32,
    pub success: bool,
    pub failure: Option<FailureKind>,
    pub wall: Duration,
}

fn solve_job(
    spec: &SweepSpec,
    alg: Alg,
    t: u32,
    alpha: f64,
    index: u32,
    stream: u64,
) -> Result<InstanceOutcome, SweepError> {
    let f = paired_instance(spec, alpha, index, stream)?;
    let solve_seed = mix_seed(&[
        spec.seed,
        TAG_SOLVE,
        stream,
        alg.tag(),
        t as u64,
        alpha.to_bits(),
        index as u64,
    ]);
    let cfg = spec.solver_config(t, solve_seed);
    let outcome = match alg {
        Alg::Sid => solve_sid(&f, &cfg),
        Alg::Sis => solve_sis(&f, &cfg),
    };
    Ok(InstanceOutcome {
        alg,
        alpha,
        index,
        success: outcome.is_sat(),
        failure: outcome.failure_kind(),
        wall: outcome.stats.wall,
    })
}

fn with_pool<T: Send>(
    parallelism: usize,
    job: impl FnOnce() -> T + Send,
) -> Result<T, SweepError> {
    if parallelism == 0 {
        return Ok(job());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))?;
    Ok(pool.install(job))
}

#[derive(Clone, Debug)]
pub struct TunedT {
    pub alpha: f64,
    pub t: u32,
    /// (T, successes over the training set), ascending in T.
    pub grid_successes: Vec<(u32, u32)>,
}

/// Picks the best streamlining horizon per alpha on training instances
/// drawn from a seed stream disjoint from the sweep's test instances.
/// Ties break toward the smaller T.
pub fn tune_t(spec: &SweepSpec) -> Result<Vec<TunedT>, SweepError> {
    spec.validate()?;
    let mut grid: Vec<u32> = spec.t_grid.clone();
    grid.sort_unstable();
    grid.dedup();
    if grid.is_empty() {
        return Err(SweepError::EmptyTGrid);
    }
    let mut tuned = Vec::with_capacity(spec.alphas.len());
    for &alpha in &spec.alphas {
        // A singleton grid forces the argmax; skip the training runs.
        if grid.len() == 1 {
            tuned.push(TunedT {
                alpha,
                t: grid[0],
                grid_successes: Vec::new(),
            });
            continue;
        }
        let mut grid_successes = Vec::with_capacity(grid.len());
        let mut best = (grid[0], 0u32);
        let mut have_best = false;
        for &t in &grid {
            let jobs: Vec<u32> = (0..spec.train_instances).collect();
            let outcomes = with_pool(spec.parallelism, || {
                jobs.into_par_iter()
                    .map(|i| solve_job(spec, Alg::Sis, t, alpha, i, TAG_TRAIN))
                    .collect::<Result<Vec<_>, _>>()
            })??;
            let successes = outcomes.iter().filter(|o| o.success).count() as u32;
            grid_successes.push((t, successes));
            if !have_best || successes > best.1 {
                best = (t, successes);
                have_best = true;
            }
        }
        tuned.push(TunedT {
            alpha,
            t: best.0,
            grid_successes,
        });
    }
    Ok(tuned)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub alg: Alg,
    pub k: u32,
    pub n: u32,
    pub alpha: f64,
    pub t_used: u32,
    pub successes: u32,
    pub trials: u32,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub fail_nonconvergence: u32,
    pub fail_timeout: u32,
    pub fail_contradiction: u32,
    pub mean_wall_s: f64,
    pub budget_s: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// Per-instance results backing the rows, for paired comparisons.
    pub outcomes: Vec<InstanceOutcome>,
    pub tuned: Vec<TunedT>,
}

/// Solves every (alg, alpha, index) cell. Instances are generated from
/// seeds independent of the algorithm, so both algorithms face
/// bit-identical formulas; solver randomness still differs per alg.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepReport, SweepError> {
    spec.validate()?;
    let needs_tuning = spec.algs.contains(&Alg::Sis) && spec.t_fixed.is_none();
    let tuned = if needs_tuning {
        tune_t(spec)?
    } else {
        Vec::new()
    };
    let t_for = |alpha_idx: usize, alg: Alg| -> u32 {
        match alg {
            Alg::Sid => 0,
            Alg::Sis => spec
                .t_fixed
                .unwrap_or_else(|| tuned[alpha_idx].t),
        }
    };

    let mut jobs = Vec::new();
    for &alg in &spec.algs {
        for (ai, &alpha) in spec.alphas.iter().enumerate() {
            for i in 0..spec.instances_per_alpha {
                jobs.push((alg, ai, alpha, i));
            }
        }
    }
    let outcomes = with_pool(spec.parallelism, || {
        jobs.into_par_iter()
            .map(|(alg, ai, alpha, i)| solve_job(spec, alg, t_for(ai, alg), alpha, i, TAG_GEN))
            .collect::<Result<Vec<_>, _>>()
    })??;

    let mut rows = Vec::new();
    for &alg in &spec.algs {
        for (ai, &alpha) in spec.alphas.iter().enumerate() {
            let cell: Vec<&InstanceOutcome> = outcomes
                .iter()
                .filter(|o| o.alg == alg && o.index < spec.instances_per_alpha && o.alpha == alpha)
                .collect();
            let trials = cell.len() as u32;
            let successes = cell.iter().filter(|o| o.success).count() as u32;
            let count_kind = |k: FailureKind| cell.iter().filter(|o| o.failure == Some(k)).count() as u32;
            let rate = successes as f64 / trials as f64;
            let (ci_low, ci_high) = wilson(successes, trials);
            let mean_wall_s =
                cell.iter().map(|o| o.wall.as_secs_f64()).sum::<f64>() / trials as f64;
            rows.push(SweepRow {
                alg,
                k: spec.k,
                n: spec.n,
                alpha,
                t_used: t_for(ai, alg),
                successes,
                trials,
                rate,
                ci_low,
                ci_high,
                fail_nonconvergence: count_kind(FailureKind::NonConvergence),
                fail_timeout: count_kind(FailureKind::LocalSearchTimeout),
                fail_contradiction: count_kind(FailureKind::Contradiction),
                mean_wall_s,
                budget_s: spec.budget.map(|b| b.as_secs_f64()),
            });
        }
    }
    Ok(SweepReport {
        rows,
        outcomes,
        tuned,
    })
}

/// Largest alpha with success rate above 0.05, per algorithm; None when
/// no grid point qualifies.
pub fn algorithmic_threshold(rows: &[SweepRow]) -> Vec<(Alg, Option<f64>)> {
    let mut order = Vec::new();
    for row in rows {
        if !order.contains(&row.alg) {
            order.push(row.alg);
        }
    }
    order
        .into_iter()
        .map(|alg| {
            let best = rows
                .iter()
                .filter(|r| r.alg == alg && r.rate > 0.05)
                .map(|r| r.alpha)
                .fold(None, |acc: Option<f64>, a| {
                    Some(acc.map_or(a, |b: f64| b.max(a)))
                });
            (alg, best)
        })
        .collect()
}

/// Wilson score interval at 95%, clamped to [0, 1].
pub fn wilson(successes: u32, trials: u32) -> (f64, f64) {
    assert!(trials > 0 && successes <= trials);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = WILSON_Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // The score interval contains the point estimate; the min/max with p
    // only absorbs rounding noise at the 0 and 1 boundaries.
    (
        (center - half).max(0.0).min(p),
        (center + half).min(1.0).max(p),
    )
}

/// Exact one-sided binomial sign test: probability of at least `wins`
/// heads in wins+losses fair flips. No discordant pairs gives 1.0.
pub fn one_sided_sign_test(wins: u32, losses: u32) -> f64 {
    let n = wins + losses;
    if n == 0 {
        return 1.0;
    }
    assert!(n < 1000, "use a normal approximation at this scale");
    let mut coeff = 1.0f64;
    let mut tail = 0.0f64;
    for i in 0..=n {
        if i >= wins {
            tail += coeff;
        }
        coeff *= (n - i) as f64 / (i + 1) as f64;
    }
    (tail / 2.0f64.powi(n as i32)).min(1.0)
}

/// Spearman rank correlation with average ranks on ties; None when
/// either side has no variation or fewer than two points.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    assert_eq!(xs.len(), ys.len());
    if xs.len() < 2 {
        return None;
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    pearson(&rx, &ry)
}

fn average_ranks(vals: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..vals.len()).collect();
    idx.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).expect("rankable values"));
    let mut ranks = vec![0.0; vals.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && vals[idx[j + 1]] == vals[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &slot in &idx[i..=j] {
            ranks[slot] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

#[derive(Clone, Debug)]
pub struct TraceRow {
    pub round: u32,
    pub live_vars: u32,
    pub live_clauses: u32,
    /// Fraction of confident predictions (magnetization >= bar) the
    /// exact marginals confirm; 1.0 when none qualify.
    pub calibration: f64,
    /// Exact model count of the current formula (clauses so far plus
    /// fixed variables pinned).
    pub solutions: u64,
    /// Mean pairwise Hamming distance over the enumerated sample,
    /// normalized per variable; None below two solutions.
    pub mean_hamming: Option<f64>,
    /// Magnetization mass in 20 uniform bins over [0, 1], taken over
    /// all original variables: fixed variables count at 1.0 and
    /// variables with no live clauses at 0.0, so masses compare
    /// across rounds.
    pub hist: [f64; MAGNETIZATION_BINS],
}

#[derive(Clone, Debug)]
pub struct CalibrationTrace {
    /// One row per solver round within the streamlining window
    /// (rounds 0 through t); decimation rounds past the horizon are
    /// not recorded.
    pub rows: Vec<TraceRow>,
    /// Set when the formula ran out of solutions inside the recorded
    /// window or the solver claimed unsatisfiability; rows after that
    /// point are not recorded.
    pub truncated: bool,
    pub outcome: SolveOutcome,
}

#[derive(Error, Debug, PartialEq, Eq)]
pub enum TraceError {
    #[error("instance exceeds the enumeration cap")]
    TooManyVariables,
}

/// Calibration bar used by traces: predictions with magnetization at or
/// above this count as confident.
pub const TRACE_BAR: f64 = 0.9;

// Histogram over all original variables so masses stay comparable
// across rounds. A fixed variable is an assignment held with
// certainty and counts at 1.0; a variable with no live clauses left
// is unconstrained and counts at 0.0.
fn magnetization_hist(
    g: &crate::graph::FactorGraph,
    table: &MarginalTable,
) -> [f64; MAGNETIZATION_BINS] {
    let mut hist = [0.0; MAGNETIZATION_BINS];
    let n = g.n_vars() as usize;
    if n == 0 {
        return hist;
    }
    let mut m = vec![0.0f64; n];
    for row in table.rows() {
        m[(row.var - 1) as usize] = row.magnetization().clamp(0.0, 1.0);
    }
    for var in 1..=g.n_vars() {
        if g.value(var).is_some() {
            m[(var - 1) as usize] = 1.0;
        }
    }
    for &v in &m {
        let bin = ((v * MAGNETIZATION_BINS as f64) as usize).min(MAGNETIZATION_BINS - 1);
        hist[bin] += 1.0;
    }
    for h in &mut hist {
        *h /= n as f64;
    }
    hist
}

/// Runs streamlining with the configured horizon and records, after each
/// round's message pass, how the predicted marginals compare with exact
/// enumeration of the current formula.
pub fn calibration_trace(
    f: &Formula,
    cfg: &SolverConfig,
    opts: &EnumerateOptions,
) -> Result<CalibrationTrace, TraceError> {
    if f.n_vars() > opts.cap_n {
        return Err(TraceError::TooManyVariables);
    }
    let mut rows: Vec<TraceRow> = Vec::new();
    let mut dead_end = false;
    // Rows cover the streamlining window only: round r reflects the
    // formula after r streamlining steps, so round t is the state the
    // full horizon produced. Later decimation rounds are not the
    // object of study and are left unrecorded.
    let horizon = cfg.t;
    let outcome = {
        let mut observer = |round: u32, g: &crate::graph::FactorGraph, table: &MarginalTable| {
            if dead_end || round > horizon {
                return;
            }
            let mut clauses = g.residual_formula().clauses().to_vec();
            for var in 1..=g.n_vars() {
                if let Some(value) = g.value(var) {
                    let lit = Literal::new(var, !value);
                    clauses.push(Clause::new(vec![lit], ClauseOrigin::Original).expect("unit"));
                }
            }
            let current = Formula::new(g.n_vars(), clauses).expect("residual stays in range");
            let e = enumerate_with(&current, opts).expect("cap checked at entry");
            if e.count == 0 {
                dead_end = true;
                return;
            }
            let mean_hamming = if e.solutions.len() >= 2 {
                Some(mean_pairwise_hamming(&e.solutions, g.n_vars()).expect("two or more"))
            } else {
                None
            };
            rows.push(TraceRow {
                round,
                live_vars: g.live_var_count() as u32,
                live_clauses: g.live_clause_count() as u32,
                calibration: calibration(table, &e, TRACE_BAR),
                solutions: e.count,
                mean_hamming,
                hist: magnetization_hist(g, table),
            });
        };
        solve_with_observer(f, cfg, cfg.t, &mut observer)
    };
    // A formula satisfied before the first message pass never reaches
    // the observer; record its unconstrained state directly.
    if rows.is_empty() && !dead_end {
        let e = enumerate_with(f, opts).expect("cap checked at entry");
        if e.count == 0 {
            dead_end = true;
        } else {
            let mean_hamming = if e.solutions.len() >= 2 {
                Some(mean_pairwise_hamming(&e.solutions, f.n_vars()).expect("two or more"))
            } else {
                None
            };
            let mut hist = [0.0; MAGNETIZATION_BINS];
            if f.n_vars() > 0 {
                hist[0] = 1.0;
            }
            rows.push(TraceRow {
                round: 0,
                live_vars: f.n_vars(),
                live_clauses: 0,
                calibration: 1.0,
                solutions: e.count,
                mean_hamming,
                hist,
            });
        }
    }
    let truncated = dead_end || matches!(outcome.status, crate::solver::SolveStatus::UnsatClaim);
    Ok(CalibrationTrace {
        rows,
        truncated,
        outcome,
    })
}

fn fmt_alpha(alpha: f64) -> String {
    format!("{alpha}")
}

/// Fixed sweep CSV schema; column order is part of the output contract.
pub const SWEEP_CSV_HEADER: &str = "alg,k,n,alpha,t_used,successes,trials,rate,ci_low,ci_high,fail_nonconvergence,fail_timeout,fail_contradiction,mean_wall_s,budget_s";

pub fn write_sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let budget = r.budget_s.map(|b| format!("{b:.1}")).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{:.4},{:.4},{:.4},{},{},{},{:.4},{}\n",
            r.alg.name(),
            r.k,
            r.n,
            fmt_alpha(r.alpha),
            r.t_used,
            r.successes,
            r.trials,
            r.rate,
            r.ci_low,
            r.ci_high,
            r.fail_nonconvergence,
            r.fail_timeout,
            r.fail_contradiction,
            r.mean_wall_s,
            budget,
        ));
    }
    out
}

pub fn write_trace_csv(trace: &CalibrationTrace) -> String {
    let mut out = String::from("round,live_vars,live_clauses,calibration,solutions,mean_hamming");
    for b in 0..MAGNETIZATION_BINS {
        out.push_str(&format!(",h{b:02}"));
    }
    out.push('\n');
    for r in &trace.rows {
        let hamming = r
            .mean_hamming
            .map(|h| format!("{h:.4}"))
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{:.4},{},{}",
            r.round, r.live_vars, r.live_clauses, r.calibration, r.solutions, hamming
        ));
        for b in &r.hist {
            out.push_str(&format!(",{b:.4}"));
        }
        out.push('\n');
    }
    out
}

#[derive(Error, Debug, PartialEq, Eq)]
pub enum ConfigError {
    #[error("line {0}: expected key=value")]
    BadLine(usize),
    #[error("duplicate key {0}")]
    DuplicateKey(String),
    #[error("missing key {0}")]
    MissingKey(&'static str),
    #[error("key {0}: bad value {1}")]
    BadValue(&'static str, String),
    #[error("unknown key {0}")]
    UnknownKey(String),
}

/// Plain-text key=value lines; blank lines and # comments skipped.
pub fn parse_kv(text: &str) -> Result<HashMap<String, String>, ConfigError> {
    let mut map = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(ConfigError::BadLine(i + 1))?;
        let key = key.trim().to_string();
        if map
            .insert(key.clone(), value.trim().to_string())
            .is_some()
        {
            return Err(ConfigError::DuplicateKey(key));
        }
    }
    Ok(map)
}

struct KvReader {
    map: HashMap<String, String>,
}

impl KvReader {
    fn take(&mut self, key: &'static str) -> Option<String> {
        self.map.remove(key)
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &'static str) -> Result<Option<T>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| ConfigError::BadValue(key, v)),
        }
    }

    fn parse_list<T: std::str::FromStr>(
        &mut self,
        key: &'static str,
    ) -> Result<Option<Vec<T>>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(|s| s.trim().parse())
                .collect::<Result<Vec<_>, _>>()
                .map(Some)
                .map_err(|_| ConfigError::BadValue(key, v)),
        }
    }

    fn finish(self) -> Result<(), ConfigError> {
        match self.map.into_keys().next() {
            Some(k) => Err(ConfigError::UnknownKey(k)),
            None => Ok(()),
        }
    }
}

/// Sweep config keys: k, n, alphas, instances, algs, t_grid, t, train,
/// seed, parallelism, budget_s, r_frac. Unknown keys are rejected.
pub fn parse_sweep_config(text: &str) -> Result<SweepSpec, ConfigError> {
    let mut kv = KvReader {
        map: parse_kv(text)?,
    };
    let mut spec = SweepSpec::default();
    if let Some(v) = kv.parse("k")? {
        spec.k = v;
    }
    spec.n = kv.parse("n")?.ok_or(ConfigError::MissingKey("n"))?;
    spec.alphas = kv
        .parse_list("alphas")?
        .ok_or(ConfigError::MissingKey("alphas"))?;
    spec.instances_per_alpha = kv
        .parse("instances")?
        .ok_or(ConfigError::MissingKey("instances"))?;
    if let Some(v) = kv.take("algs") {
        let mut algs = Vec::new();
        for name in v.split(',') {
            match name.trim() {
                "sid" => algs.push(Alg::Sid),
                "sis" => algs.push(Alg::Sis),
                _ => return Err(ConfigError::BadValue("algs", v)),
            }
        }
        spec.algs = algs;
    }
    if let Some(v) = kv.parse_list("t_grid")? {
        spec.t_grid = v;
    }
    spec.t_fixed = kv.parse("t")?;
    if let Some(v) = kv.parse("train")? {
        spec.train_instances = v;
    }
    if let Some(v) = kv.parse("seed")? {
        spec.seed = v;
    }
    if let Some(v) = kv.parse("parallelism")? {
        spec.parallelism = v;
    }
    if let Some(v) = kv.parse::<f64>("budget_s")? {
        spec.budget = Some(Duration::from_secs_f64(v));
    }
    if let Some(v) = kv.parse("r_frac")? {
        spec.r_frac = v;
    }
    kv.finish()?;
    Ok(spec)
}

#[derive(Clone, Debug)]
pub struct CalibrateSpec {
    pub k: u32,
    pub n: u32,
    pub alpha: f64,
    pub instances: u32,
    pub t: u32,
    pub seed: u64,
    pub r_frac: f64,
    pub max_solutions: usize,
}

/// Calibrate config keys: k, n, alpha, instances, t, seed, r_frac,
/// max_solutions.
pub fn parse_calibrate_config(text: &str) -> Result<CalibrateSpec, ConfigError> {
    let mut kv = KvReader {
        map: parse_kv(text)?,
    };
    let spec = CalibrateSpec {
        k: kv.parse("k")?.unwrap_or(3),
        n: kv.parse("n")?.ok_or(ConfigError::MissingKey("n"))?,
        alpha: kv.parse("alpha")?.ok_or(ConfigError::MissingKey("alpha"))?,
        instances: kv.parse("instances")?.unwrap_or(1),
        t: kv.parse("t")?.unwrap_or(10),
        seed: kv.parse("seed")?.unwrap_or(0),
        r_frac: kv.parse("r_frac")?.unwrap_or(0.01),
        max_solutions: kv.parse("max_solutions")?.unwrap_or(1024),
    };
    kv.finish()?;
    Ok(spec)
}
