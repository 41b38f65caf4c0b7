//! Seeded random instance generators for k-SAT and 2-XORSAT.
//!
//! All randomness flows through the portable generator in [`crate::rng`],
//! so instances are bit-reproducible across platforms given (spec, seed).

use crate::cnf::{Clause, ClauseOrigin, Formula, Literal};
use crate::oracle::XorSystem;
use crate::rng::Rng;
use thiserror::Error;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GenKind {
    KSat,
    Xor2Sat,
}

/// Parameters of one random instance: m = round(alpha * n) constraints.
#[derive(Clone, Copy, Debug)]
pub struct GenSpec {
    pub n: u32,
    pub alpha: f64,
    pub k: u32,
    pub seed: u64,
    pub kind: GenKind,
}

#[derive(Error, Debug, PartialEq, Eq)]
pub enum GenError {
    #[error("k-SAT needs n >= k >= 2, got n={n}, k={k}")]
    BadKsatShape { n: u32, k: u32 },
    #[error("2-XORSAT needs n >= 2, got n={0}")]
    BadXorShape(u32),
    #[error("alpha must be positive")]
    NonPositiveAlpha,
    #[error("spec kind is {got:?}, generator expects {want:?}")]
    WrongKind { got: GenKind, want: GenKind },
}

impl GenSpec {
    /// Constraint count; ties round half away from zero.
    pub fn m(&self) -> usize {
        (self.alpha * self.n as f64).round() as usize
    }

    fn validate(&self, want: GenKind) -> Result<(), GenError> {
        if self.kind != want {
            return Err(GenError::WrongKind {
                got: self.kind,
                want,
            });
        }
        if self.alpha <= 0.0 || self.alpha.is_nan() {
            return Err(GenError::NonPositiveAlpha);
        }
        match self.kind {
            GenKind::KSat => {
                if self.k < 2 || self.n < self.k {
                    return Err(GenError::BadKsatShape {
                        n: self.n,
                        k: self.k,
                    });
                }
            }
            GenKind::Xor2Sat => {
                if self.n < 2 {
                    return Err(GenError::BadXorShape(self.n));
                }
            }
        }
        Ok(())
    }
}

/// m clauses of k distinct variables each (uniform without replacement,
/// kept in draw order), polarities independent fair coins.
pub fn gen_ksat(spec: &GenSpec) -> Result<Formula, GenError> {
    spec.validate(GenKind::KSat)?;
    let mut rng = Rng::new(spec.seed);
    let mut vars = Vec::with_capacity(spec.k as usize);
    let mut clauses = Vec::with_capacity(spec.m());
    for _ in 0..spec.m() {
        rng.distinct(spec.n as u64, spec.k as usize, &mut vars);
        let lits = vars
            .iter()
            .map(|&v| Literal::new(v as u32 + 1, rng.next_bool()))
            .collect();
        clauses.push(Clause::new(lits, ClauseOrigin::Original).expect("distinct vars, k >= 2"));
    }
    Ok(Formula::new(spec.n, clauses).expect("vars drawn below n"))
}

/// m parity constraints over distinct variable pairs with fair-coin
/// parities, plus their CNF encoding: x_i ⊕ x_j = 1 becomes
/// (¬x_i ∨ ¬x_j) ∧ (x_i ∨ x_j), and = 0 becomes (x_i ∨ ¬x_j) ∧ (¬x_i ∨ x_j).
pub fn gen_2xorsat(spec: &GenSpec) -> Result<(Formula, XorSystem), GenError> {
    spec.validate(GenKind::Xor2Sat)?;
    let mut rng = Rng::new(spec.seed);
    let mut pair = Vec::with_capacity(2);
    let mut constraints = Vec::with_capacity(spec.m());
    let mut clauses = Vec::with_capacity(2 * spec.m());
    for _ in 0..spec.m() {
        rng.distinct(spec.n as u64, 2, &mut pair);
        let (i, j) = (pair[0] as u32 + 1, pair[1] as u32 + 1);
        let parity = rng.next_bool();
        constraints.push((i, j, parity));
        let (first, second) = if parity {
            (
                vec![Literal::neg(i), Literal::neg(j)],
                vec![Literal::pos(i), Literal::pos(j)],
            )
        } else {
            (
                vec![Literal::pos(i), Literal::neg(j)],
                vec![Literal::neg(i), Literal::pos(j)],
            )
        };
        clauses.push(Clause::new(first, ClauseOrigin::Original).expect("distinct pair"));
        clauses.push(Clause::new(second, ClauseOrigin::Original).expect("distinct pair"));
    }
    let formula = Formula::new(spec.n, clauses).expect("vars drawn below n");
    let system = XorSystem::new(spec.n, constraints).expect("pairs distinct and in range");
    Ok((formula, system))
}

/// DIMACS comment block carrying the parity system, one line per
/// constraint: `c x <i> <j> <parity>`.
pub fn xor_comment_block(s: &XorSystem) -> String {
    let mut out = String::new();
    for &(i, j, p) in s.constraints() {
        out.push_str(&format!("c x {} {} {}\n", i, j, p as u8));
    }
    out
}

/// Recovers a parity system from `c x i j p` comment lines; None when no
/// such lines exist.
pub fn parse_xor_comments(text: &str, n_vars: u32) -> Option<XorSystem> {
    let mut constraints = Vec::new();
    for line in text.lines() {
        let mut parts = line.split_whitespace();
        if parts.next() != Some("c") || parts.next() != Some("x") {
            continue;
        }
        let i: u32 = parts.next()?.parse().ok()?;
        let j: u32 = parts.next()?.parse().ok()?;
        let p: u8 = parts.next()?.parse().ok()?;
        constraints.push((i, j, p != 0));
    }
    if constraints.is_empty() {
        None
    } else {
        XorSystem::new(n_vars, constraints).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{enumerate, xor2_satisfiable, EnumerateOptions};

    fn ksat_spec(n: u32, alpha: f64, k: u32, seed: u64) -> GenSpec {
        GenSpec {
            n,
            alpha,
            k,
            seed,
            kind: GenKind::KSat,
        }
    }

    fn xor_spec(n: u32, alpha: f64, seed: u64) -> GenSpec {
        GenSpec {
            n,
            alpha,
            k: 2,
            seed,
            kind: GenKind::Xor2Sat,
        }
    }

    #[test]
    fn ksat_structural_counts() {
        let f = gen_ksat(&ksat_spec(5, 0.6, 3, 7)).unwrap();
        assert_eq!(f.n_vars(), 5);
        assert_eq!(f.n_clauses(), 3);
        for c in f.clauses() {
            assert_eq!(c.len(), 3);
        }
    }

    #[test]
    fn ksat_deterministic() {
        let a = gen_ksat(&ksat_spec(50, 4.2, 3, 123)).unwrap();
        let b = gen_ksat(&ksat_spec(50, 4.2, 3, 123)).unwrap();
        assert_eq!(a, b);
        let c = gen_ksat(&ksat_spec(50, 4.2, 3, 124)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn ksat_negation_fraction_near_half() {
        // 12000 literals: binomial(1.2·10^4, 1/2) stays within 0.5 ± 0.02
        // except with probability < 10^-4.
        let f = gen_ksat(&ksat_spec(1000, 4.0, 3, 99)).unwrap();
        let total: usize = f.clauses().iter().map(|c| c.len()).sum();
        assert_eq!(total, 12000, "4000 clauses of 3 literals");
        let negated: usize = f
            .clauses()
            .iter()
            .flat_map(|c| c.literals())
            .filter(|l| l.is_negated())
            .count();
        let frac = negated as f64 / total as f64;
        assert!((frac - 0.5).abs() < 0.02, "negated fraction {frac}");
    }

    #[test]
    fn ksat_rejects_bad_shape() {
        assert_eq!(
            gen_ksat(&ksat_spec(2, 1.0, 3, 0)).unwrap_err(),
            GenError::BadKsatShape { n: 2, k: 3 }
        );
        assert_eq!(
            gen_ksat(&xor_spec(5, 1.0, 0)).unwrap_err(),
            GenError::WrongKind {
                got: GenKind::Xor2Sat,
                want: GenKind::KSat
            }
        );
    }

    #[test]
    fn m_rounds_half_away_from_zero() {
        assert_eq!(ksat_spec(5, 0.5, 3, 0).m(), 3);
        assert_eq!(ksat_spec(5, 0.7, 3, 0).m(), 4);
        assert_eq!(ksat_spec(10, 0.25, 3, 0).m(), 3);
    }

    #[test]
    fn xor_encoding_shapes() {
        let (f, s) = gen_2xorsat(&xor_spec(10, 1.5, 42)).unwrap();
        assert_eq!(s.constraints().len(), 15);
        assert_eq!(f.n_clauses(), 30);
        for c in f.clauses() {
            assert_eq!(c.len(), 2);
        }
    }

    #[test]
    fn xor_encoding_truth_tables() {
        // Each parity's CNF must match the XOR truth table on all 4
        // assignments of the pair.
        for parity in [false, true] {
            let clauses: Vec<Vec<i32>> = if parity {
                vec![vec![-1, -2], vec![1, 2]]
            } else {
                vec![vec![1, -2], vec![-1, 2]]
            };
            let refs: Vec<&[i32]> = clauses.iter().map(|c| c.as_slice()).collect();
            let f = Formula::from_codes(2, &refs).unwrap();
            let r = enumerate(&f).unwrap();
            let mut sols = r.solutions.clone();
            sols.sort_unstable();
            let want: Vec<u64> = (0..4u64)
                .filter(|b| (b & 1) ^ ((b >> 1) & 1) == parity as u64)
                .collect();
            assert_eq!(sols, want, "parity {parity}");
        }
    }

    #[test]
    fn xor_cnf_and_system_agree_on_satisfiability() {
        for seed in 0..60 {
            let (f, s) = gen_2xorsat(&xor_spec(12, 1.8, seed)).unwrap();
            let opts = EnumerateOptions {
                stop_after: Some(1),
                ..Default::default()
            };
            let cnf_sat = crate::oracle::enumerate_with(&f, &opts).unwrap().count > 0;
            assert_eq!(cnf_sat, xor2_satisfiable(&s), "seed {seed}");
        }
    }

    #[test]
    fn xor_comment_round_trip() {
        let (_, s) = gen_2xorsat(&xor_spec(8, 1.2, 5)).unwrap();
        let block = xor_comment_block(&s);
        let parsed = parse_xor_comments(&block, 8).unwrap();
        assert_eq!(parsed, s);
        assert!(parse_xor_comments("c plain comment\n", 8).is_none());
    }
}
