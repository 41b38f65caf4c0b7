//! Exhaustive ground truth for desk-scale instances: exact solution
//! counts, exact marginals, a parity decision procedure for 2-XOR
//! systems, and solution-cloud geometry measurements.
//!
//! Enumeration is intentionally brute force; it exists to check the
//! heuristic components, so it must not share their machinery.

use crate::cnf::{Assignment, Formula};
use crate::sp::MarginalTable;
use thiserror::Error;

#[derive(Error, Debug, PartialEq, Eq)]
pub enum OracleError {
    #[error("formula has {n} variables, enumeration cap is {cap}")]
    TooManyVariables { n: u32, cap: u32 },
    #[error("need at least two solutions, got {0}")]
    TooFewSolutions(usize),
}

/// Lane patterns for the six low variables: bit b of PATTERN[v] is the
/// value of variable v in lane b.
const PATTERN: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

#[derive(Clone, Debug)]
pub struct EnumerateOptions {
    /// Refuse instances with more variables than this.
    pub cap_n: u32,
    /// Stored-solution cap; counting continues past it.
    pub max_solutions: usize,
    /// Stop enumerating once this many solutions are found; count becomes
    /// a lower bound and marginals are withheld.
    pub stop_after: Option<u64>,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        EnumerateOptions {
            cap_n: 26,
            max_solutions: 1024,
            stop_after: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EnumerationResult {
    /// Exact satisfying-assignment count (lower bound if `stopped_early`).
    pub count: u64,
    /// Packed solutions, bit v-1 = value of variable v; capped at
    /// `max_solutions` while `count` keeps going.
    pub solutions: Vec<u64>,
    /// Per-variable P(x_v = 1) over the uniform solution distribution;
    /// None when count = 0 or enumeration stopped early.
    pub marginals: Option<Vec<f64>>,
    pub stopped_early: bool,
}

impl EnumerationResult {
    pub fn solution_assignment(&self, idx: usize, n_vars: u32) -> Assignment {
        let bits = self.solutions[idx];
        let values: Vec<bool> = (0..n_vars).map(|v| (bits >> v) & 1 == 1).collect();
        Assignment::from_bools(&values)
    }
}

struct CompiledClause {
    /// OR of lane patterns of literals over the low six variables.
    low_mask: u64,
    /// (high-assignment bit position, negated) per literal over variables
    /// beyond the low six.
    highs: Vec<(u32, bool)>,
}

fn lane_mask(n_vars: u32) -> u64 {
    if n_vars >= 6 {
        u64::MAX
    } else {
        (1u64 << (1u32 << n_vars)) - 1
    }
}

/// Iterates all 2^n assignments, 64 per step via the low-variable lanes.
pub fn enumerate(f: &Formula) -> Result<EnumerationResult, OracleError> {
    enumerate_with(f, &EnumerateOptions::default())
}

pub fn enumerate_with(
    f: &Formula,
    opts: &EnumerateOptions,
) -> Result<EnumerationResult, OracleError> {
    let n = f.n_vars();
    if n > opts.cap_n {
        return Err(OracleError::TooManyVariables { n, cap: opts.cap_n });
    }
    let mut fixed_mask = lane_mask(n);
    let mut compiled: Vec<CompiledClause> = Vec::new();
    for clause in f.clauses() {
        let mut low_mask = 0u64;
        let mut highs = Vec::new();
        for lit in clause.literals() {
            let v0 = lit.var() - 1;
            if v0 < 6 {
                let p = PATTERN[v0 as usize];
                low_mask |= if lit.is_negated() { !p } else { p };
            } else {
                highs.push((v0 - 6, lit.is_negated()));
            }
        }
        if highs.is_empty() {
            fixed_mask &= low_mask;
        } else {
            compiled.push(CompiledClause { low_mask, highs });
        }
    }

    let high_bits = n.saturating_sub(6);
    let mut count = 0u64;
    let mut true_counts = vec![0u64; n as usize];
    let mut solutions = Vec::new();
    let mut stopped_early = false;

    'outer: for h in 0..(1u64 << high_bits) {
        let mut sat = fixed_mask;
        if sat == 0 {
            break;
        }
        for c in &compiled {
            if c.highs
                .iter()
                .any(|&(pos, neg)| ((h >> pos) & 1 == 1) != neg)
            {
                continue;
            }
            sat &= c.low_mask;
            if sat == 0 {
                break;
            }
        }
        if sat == 0 {
            continue;
        }
        let lanes = sat.count_ones() as u64;
        count += lanes;
        for v in 0..n.min(6) {
            true_counts[v as usize] += (sat & PATTERN[v as usize]).count_ones() as u64;
        }
        for b in 0..high_bits {
            if (h >> b) & 1 == 1 {
                true_counts[(b + 6) as usize] += lanes;
            }
        }
        let mut lanes_left = sat;
        while lanes_left != 0 && solutions.len() < opts.max_solutions {
            let lane = lanes_left.trailing_zeros() as u64;
            solutions.push((h << 6) | lane);
            lanes_left &= lanes_left - 1;
        }
        if let Some(limit) = opts.stop_after {
            if count >= limit {
                stopped_early = true;
                break 'outer;
            }
        }
    }

    let marginals = if count > 0 && !stopped_early {
        Some(
            true_counts
                .iter()
                .map(|&t| t as f64 / count as f64)
                .collect(),
        )
    } else {
        None
    };
    Ok(EnumerationResult {
        count,
        solutions,
        marginals,
        stopped_early,
    })
}

pub fn is_satisfiable(f: &Formula, cap_n: u32) -> Result<bool, OracleError> {
    let opts = EnumerateOptions {
        cap_n,
        max_solutions: 1,
        stop_after: Some(1),
    };
    Ok(enumerate_with(f, &opts)?.count > 0)
}

/// Conjunction of parity constraints x_i ⊕ x_j = parity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XorSystem {
    n_vars: u32,
    constraints: Vec<(u32, u32, bool)>,
}

#[derive(Error, Debug, PartialEq, Eq)]
pub enum XorError {
    #[error("constraint repeats variable {0}")]
    RepeatedVariable(u32),
    #[error("variable {var} exceeds n_vars = {n_vars}")]
    OutOfRange { var: u32, n_vars: u32 },
}

impl XorSystem {
    pub fn new(n_vars: u32, constraints: Vec<(u32, u32, bool)>) -> Result<Self, XorError> {
        for &(i, j, _) in &constraints {
            if i == j {
                return Err(XorError::RepeatedVariable(i));
            }
            for v in [i, j] {
                if v < 1 || v > n_vars {
                    return Err(XorError::OutOfRange { var: v, n_vars });
                }
            }
        }
        Ok(XorSystem {
            n_vars,
            constraints,
        })
    }

    pub fn n_vars(&self) -> u32 {
        self.n_vars
    }

    pub fn constraints(&self) -> &[(u32, u32, bool)] {
        &self.constraints
    }
}

/// Union-find with parity offsets: satisfiable iff no cycle has odd
/// total parity.
pub fn xor2_satisfiable(s: &XorSystem) -> bool {
    // parent[v], parity[v] = parity of v relative to its parent.
    let n = s.n_vars() as usize;
    let mut parent: Vec<u32> = (0..n as u32).collect();
    let mut parity: Vec<bool> = vec![false; n];
    let mut rank: Vec<u8> = vec![0; n];

    fn find(parent: &mut [u32], parity: &mut [bool], v: u32) -> (u32, bool) {
        if parent[v as usize] == v {
            return (v, false);
        }
        let (root, p_up) = find(parent, parity, parent[v as usize]);
        let total = parity[v as usize] ^ p_up;
        parent[v as usize] = root;
        parity[v as usize] = total;
        (root, total)
    }

    for &(i, j, want) in s.constraints() {
        let (ri, pi) = find(&mut parent, &mut parity, i - 1);
        let (rj, pj) = find(&mut parent, &mut parity, j - 1);
        if ri == rj {
            if pi ^ pj != want {
                return false;
            }
            continue;
        }
        let (child, child_p, root) = if rank[ri as usize] < rank[rj as usize] {
            (ri, pi ^ pj ^ want, rj)
        } else {
            if rank[ri as usize] == rank[rj as usize] {
                rank[ri as usize] += 1;
            }
            (rj, pi ^ pj ^ want, ri)
        };
        parent[child as usize] = root;
        parity[child as usize] = child_p;
    }
    true
}

/// Over variables whose predicted magnetization clears `bar`, the
/// fraction whose exact marginal toward the predicted value is at least
/// the predicted weight for that value. Vacuously 1.0 when no variable
/// clears the bar. Requires an enumeration with marginals (count > 0,
/// not stopped early).
pub fn calibration(m: &MarginalTable, e: &EnumerationResult, bar: f64) -> f64 {
    let exact = e
        .marginals
        .as_ref()
        .expect("calibration needs exact marginals; enumeration found none");
    let mut cleared = 0usize;
    let mut calibrated = 0usize;
    for row in m.rows() {
        if row.magnetization() < bar {
            continue;
        }
        cleared += 1;
        let p_true = exact[(row.var - 1) as usize];
        let (toward, predicted) = if row.preferred() {
            (p_true, row.mu1)
        } else {
            (1.0 - p_true, row.mu0)
        };
        if toward >= predicted {
            calibrated += 1;
        }
    }
    if cleared == 0 {
        1.0
    } else {
        calibrated as f64 / cleared as f64
    }
}

/// Average over all unordered solution pairs of the normalized Hamming
/// distance, on bit-packed solutions.
pub fn mean_pairwise_hamming(solutions: &[u64], n_vars: u32) -> Result<f64, OracleError> {
    if solutions.len() < 2 {
        return Err(OracleError::TooFewSolutions(solutions.len()));
    }
    let mut total = 0u64;
    for (i, &a) in solutions.iter().enumerate() {
        for &b in &solutions[i + 1..] {
            total += (a ^ b).count_ones() as u64;
        }
    }
    let pairs = solutions.len() as u64 * (solutions.len() as u64 - 1) / 2;
    Ok(total as f64 / pairs as f64 / n_vars as f64)
}
