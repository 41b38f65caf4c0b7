//! Python bindings over the toolkit's main types and operations.
//!
//! Builds as an abi3 extension module named `spsat_py`; see
//! `python/smoke_test.py` for how the shared library is loaded.

use std::time::Duration;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use spsat::{
    Assignment, EnumerateOptions, FailureKind, Formula, GenKind, GenSpec, SolveStatus,
    SolverConfig, WalkSatParams, WalkSatStatus,
};

/// An immutable CNF formula over variables 1..=n_vars.
#[pyclass(name = "Formula", frozen)]
struct PyFormula {
    inner: Formula,
}

#[pymethods]
impl PyFormula {
    /// Builds a formula from clause lists of signed DIMACS codes:
    /// code v means variable v true, -v means v false.
    #[staticmethod]
    fn from_clauses(n_vars: u32, clauses: Vec<Vec<i32>>) -> PyResult<Self> {
        for clause in &clauses {
            if clause.contains(&0) {
                return Err(PyValueError::new_err("literal code 0 is not a variable"));
            }
        }
        let refs: Vec<&[i32]> = clauses.iter().map(|c| c.as_slice()).collect();
        let inner = Formula::from_codes(n_vars, &refs).map_err(value_err)?;
        Ok(PyFormula { inner })
    }

    #[staticmethod]
    fn from_dimacs(text: &str) -> PyResult<Self> {
        let inner = spsat::parse_dimacs(text).map_err(value_err)?;
        Ok(PyFormula { inner })
    }

    fn to_dimacs(&self) -> String {
        spsat::emit_dimacs(&self.inner)
    }

    #[getter]
    fn n_vars(&self) -> u32 {
        self.inner.n_vars()
    }

    #[getter]
    fn n_clauses(&self) -> usize {
        self.inner.n_clauses()
    }

    /// Clauses as lists of signed codes, original order.
    fn clauses(&self) -> Vec<Vec<i32>> {
        self.inner
            .clauses()
            .iter()
            .map(|c| c.literals().iter().map(|l| l.code()).collect())
            .collect()
    }

    fn __len__(&self) -> usize {
        self.inner.n_clauses()
    }

    fn __repr__(&self) -> String {
        format!(
            "Formula(n_vars={}, n_clauses={})",
            self.inner.n_vars(),
            self.inner.n_clauses()
        )
    }
}

#[pyclass(name = "SolveResult", frozen)]
struct PySolveResult {
    /// True only for an assignment verified against the input formula.
    #[pyo3(get)]
    sat: bool,
    /// Heuristic claim: a contradiction was hit, but streamlining and
    /// decimation guesses mean the input may still be satisfiable.
    #[pyo3(get)]
    unsat_claim: bool,
    #[pyo3(get)]
    failure: Option<String>,
    #[pyo3(get)]
    assignment: Option<Vec<bool>>,
    #[pyo3(get)]
    rounds: u32,
    #[pyo3(get)]
    streamlining_clauses: u32,
    #[pyo3(get)]
    variables_fixed: u32,
    #[pyo3(get)]
    sweeps: u64,
    #[pyo3(get)]
    ls_flips: u64,
    #[pyo3(get)]
    wall_s: f64,
}

#[pymethods]
impl PySolveResult {
    fn __repr__(&self) -> String {
        let verdict = if self.sat {
            "sat".to_string()
        } else if self.unsat_claim {
            "unsat_claim".to_string()
        } else {
            format!("failure={}", self.failure.as_deref().unwrap_or("?"))
        };
        format!("SolveResult({verdict}, rounds={})", self.rounds)
    }
}

#[pyclass(name = "WalkSatResult", frozen)]
struct PyWalkSatResult {
    #[pyo3(get)]
    found: bool,
    #[pyo3(get)]
    assignment: Option<Vec<bool>>,
    #[pyo3(get)]
    flips: u64,
    #[pyo3(get)]
    tries_used: u32,
}

#[pymethods]
impl PyWalkSatResult {
    fn __repr__(&self) -> String {
        format!(
            "WalkSatResult(found={}, flips={}, tries_used={})",
            self.found, self.flips, self.tries_used
        )
    }
}

#[pyclass(name = "Enumeration", frozen)]
struct PyEnumeration {
    /// Exact count, or a lower bound when stopped_early.
    #[pyo3(get)]
    count: u64,
    /// Stored solutions, capped at max_solutions while count keeps going.
    #[pyo3(get)]
    solutions: Vec<Vec<bool>>,
    /// Per-variable P(x=1) over all solutions; None when count is 0 or
    /// enumeration stopped early.
    #[pyo3(get)]
    marginals: Option<Vec<f64>>,
    #[pyo3(get)]
    stopped_early: bool,
}

#[pymethods]
impl PyEnumeration {
    fn __repr__(&self) -> String {
        format!(
            "Enumeration(count={}, stored={}, stopped_early={})",
            self.count,
            self.solutions.len(),
            self.stopped_early
        )
    }
}

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn assignment_to_vec(a: &Assignment) -> PyResult<Vec<bool>> {
    (1..=a.n_vars())
        .map(|v| {
            a.get(v).ok_or_else(|| {
                PyRuntimeError::new_err(format!("variable {v} unset in returned assignment"))
            })
        })
        .collect()
}

/// Random k-SAT with round(alpha * n) clauses of k distinct variables.
#[pyfunction]
#[pyo3(signature = (n, alpha, k = 3, seed = 0))]
fn gen_ksat(n: u32, alpha: f64, k: u32, seed: u64) -> PyResult<PyFormula> {
    let spec = GenSpec {
        n,
        alpha,
        k,
        seed,
        kind: GenKind::KSat,
    };
    let inner = spsat::gen_ksat(&spec).map_err(value_err)?;
    Ok(PyFormula { inner })
}

/// Random 2-XORSAT as its CNF encoding, paired with the exact
/// satisfiability of the parity system it encodes.
#[pyfunction]
#[pyo3(signature = (n, alpha, seed = 0))]
fn gen_xor2(n: u32, alpha: f64, seed: u64) -> PyResult<(PyFormula, bool)> {
    let spec = GenSpec {
        n,
        alpha,
        k: 2,
        seed,
        kind: GenKind::Xor2Sat,
    };
    let (inner, system) = spsat::gen_2xorsat(&spec).map_err(value_err)?;
    let satisfiable = spsat::xor2_satisfiable(&system);
    Ok((PyFormula { inner }, satisfiable))
}

/// Runs the message-passing solver. alg "sid" fixes the most biased
/// variables each round; alg "sis" adds disjunctions over biased pairs
/// for the first t rounds before decimation takes over.
#[pyfunction]
#[pyo3(signature = (f, alg = "sid", t = 10, r_frac = 0.01, epsilon_frac = 0.01, seed = 0, time_budget_s = None))]
fn solve(
    f: &PyFormula,
    alg: &str,
    t: u32,
    r_frac: f64,
    epsilon_frac: f64,
    seed: u64,
    time_budget_s: Option<f64>,
) -> PyResult<PySolveResult> {
    let cfg = SolverConfig {
        r_frac,
        t,
        epsilon_frac,
        seed,
        time_budget: time_budget_s.map(Duration::from_secs_f64),
        ..SolverConfig::default()
    };
    let outcome = match alg {
        "sid" => spsat::solve_sid(&f.inner, &cfg),
        "sis" => spsat::solve_sis(&f.inner, &cfg),
        other => {
            return Err(PyValueError::new_err(format!(
                "alg must be \"sid\" or \"sis\", got {other:?}"
            )))
        }
    };
    let (sat, unsat_claim, failure, assignment) = match outcome.status {
        SolveStatus::Sat(a) => (true, false, None, Some(assignment_to_vec(&a)?)),
        SolveStatus::UnsatClaim => (false, true, None, None),
        SolveStatus::Failure(kind) => {
            let name = match kind {
                FailureKind::NonConvergence => "non_convergence",
                FailureKind::LocalSearchTimeout => "local_search_timeout",
                FailureKind::Contradiction => "contradiction",
            };
            (false, false, Some(name.to_string()), None)
        }
    };
    Ok(PySolveResult {
        sat,
        unsat_claim,
        failure,
        assignment,
        rounds: outcome.stats.rounds,
        streamlining_clauses: outcome.stats.streamlining_clauses,
        variables_fixed: outcome.stats.variables_fixed,
        sweeps: outcome.stats.sweeps,
        ls_flips: outcome.stats.ls_flips,
        wall_s: outcome.stats.wall.as_secs_f64(),
    })
}

/// Focused random walk; max_flips defaults to 100 * n_vars per try.
#[pyfunction]
#[pyo3(signature = (f, noise = 0.5, tries = 10, max_flips = None, seed = 0))]
fn walksat(
    f: &PyFormula,
    noise: f64,
    tries: u32,
    max_flips: Option<u64>,
    seed: u64,
) -> PyResult<PyWalkSatResult> {
    if !(0.0..=1.0).contains(&noise) {
        return Err(PyValueError::new_err("noise must lie in [0, 1]"));
    }
    let params = WalkSatParams {
        noise,
        tries,
        max_flips,
        seed,
    };
    let result = spsat::walksat(&f.inner, &params);
    let (found, assignment) = match result.status {
        WalkSatStatus::Found(a) => (true, Some(assignment_to_vec(&a)?)),
        WalkSatStatus::Timeout => (false, None),
    };
    Ok(PyWalkSatResult {
        found,
        assignment,
        flips: result.flips,
        tries_used: result.tries_used,
    })
}

/// Exhaustive solution enumeration; refuses formulas beyond 26 variables.
#[pyfunction]
#[pyo3(signature = (f, max_solutions = 1024, stop_after = None))]
fn enumerate(f: &PyFormula, max_solutions: usize, stop_after: Option<u64>) -> PyResult<PyEnumeration> {
    let opts = EnumerateOptions {
        max_solutions,
        stop_after,
        ..EnumerateOptions::default()
    };
    let result = spsat::enumerate_with(&f.inner, &opts).map_err(value_err)?;
    let n = f.inner.n_vars();
    let solutions = (0..result.solutions.len())
        .map(|idx| {
            let a = result.solution_assignment(idx, n);
            assignment_to_vec(&a)
        })
        .collect::<PyResult<Vec<_>>>()?;
    Ok(PyEnumeration {
        count: result.count,
        solutions,
        marginals: result.marginals.clone(),
        stopped_early: result.stopped_early,
    })
}

/// Runs message passing plus streamlining only, returning the input
/// formula augmented with the accumulated disjunctions, the number of
/// rounds that ran, and a warning name when message passing gave out.
#[pyfunction]
#[pyo3(signature = (f, rounds, r_frac = 0.01, seed = 0))]
fn streamline(f: &PyFormula, rounds: u32, r_frac: f64, seed: u64) -> PyResult<(PyFormula, u32, Option<String>)> {
    let cfg = SolverConfig {
        r_frac,
        seed,
        ..SolverConfig::default()
    };
    let result = spsat::streamline_preprocess(&f.inner, &cfg, rounds).map_err(value_err)?;
    let warning = result.warning.map(|w| {
        match w {
            spsat::PreprocessWarning::NonConvergence => "non_convergence",
            spsat::PreprocessWarning::Contradiction => "contradiction",
        }
        .to_string()
    });
    Ok((
        PyFormula {
            inner: result.formula,
        },
        result.completed_rounds,
        warning,
    ))
}

/// True when the total assignment satisfies every clause.
#[pyfunction]
fn evaluate(f: &PyFormula, assignment: Vec<bool>) -> PyResult<bool> {
    let a = Assignment::from_bools(&assignment);
    let report = spsat::evaluate(&f.inner, &a).map_err(value_err)?;
    Ok(report.satisfied)
}

#[pymodule]
fn spsat_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFormula>()?;
    m.add_class::<PySolveResult>()?;
    m.add_class::<PyWalkSatResult>()?;
    m.add_class::<PyEnumeration>()?;
    m.add_function(wrap_pyfunction!(gen_ksat, m)?)?;
    m.add_function(wrap_pyfunction!(gen_xor2, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(walksat, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate, m)?)?;
    m.add_function(wrap_pyfunction!(streamline, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    Ok(())
}
