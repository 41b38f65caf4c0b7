//! CNF formula model: literals, clauses, formulas, DIMACS serialization,
//! and assignment evaluation.
//!
//! Variable indices are 1-based everywhere in this module, matching the
//! DIMACS convention.

use std::fmt;
use thiserror::Error;

/// A variable or its negation. `var` is 1-based.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    var: u32,
    negated: bool,
}

impl Literal {
    pub fn new(var: u32, negated: bool) -> Self {
        assert!(var >= 1, "variable indices are 1-based");
        Literal { var, negated }
    }

    pub fn pos(var: u32) -> Self {
        Literal::new(var, false)
    }

    pub fn neg(var: u32) -> Self {
        Literal::new(var, true)
    }

    /// From a signed DIMACS code (nonzero).
    pub fn from_code(code: i32) -> Self {
        assert!(code != 0);
        Literal::new(code.unsigned_abs(), code < 0)
    }

    pub fn var(&self) -> u32 {
        self.var
    }

    pub fn is_negated(&self) -> bool {
        self.negated
    }

    /// Signed DIMACS code.
    pub fn code(&self) -> i32 {
        if self.negated {
            -(self.var as i32)
        } else {
            self.var as i32
        }
    }

    pub fn complement(&self) -> Self {
        Literal {
            var: self.var,
            negated: !self.negated,
        }
    }

    /// True under `value` for this literal's variable.
    pub fn satisfied_by(&self, value: bool) -> bool {
        value != self.negated
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

/// Where a clause came from: the input formula or a streamlining round.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ClauseOrigin {
    Original,
    Streamlining,
}

#[derive(Error, Debug, PartialEq, Eq)]
pub enum ClauseError {
    #[error("clause is empty")]
    Empty,
    #[error("variable {0} appears more than once in clause")]
    RepeatedVariable(u32),
    #[error("streamlining clause has {0} literals, limit is 2")]
    StreamliningTooLong(usize),
}

/// A disjunction of literals over distinct variables.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Clause {
    literals: Vec<Literal>,
    origin: ClauseOrigin,
}

impl Clause {
    pub fn new(literals: Vec<Literal>, origin: ClauseOrigin) -> Result<Self, ClauseError> {
        if literals.is_empty() {
            return Err(ClauseError::Empty);
        }
        for (i, a) in literals.iter().enumerate() {
            for b in &literals[i + 1..] {
                if a.var() == b.var() {
                    return Err(ClauseError::RepeatedVariable(a.var()));
                }
            }
        }
        if origin == ClauseOrigin::Streamlining && literals.len() > 2 {
            return Err(ClauseError::StreamliningTooLong(literals.len()));
        }
        Ok(Clause { literals, origin })
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn origin(&self) -> ClauseOrigin {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }
}

#[derive(Error, Debug, PartialEq, Eq)]
pub enum FormulaError {
    #[error("literal {lit} references variable beyond n_vars = {n_vars}")]
    VariableOutOfRange { lit: i32, n_vars: u32 },
    #[error(transparent)]
    Clause(#[from] ClauseError),
}

/// An immutable CNF clause database.
#[derive(Clone, PartialEq, Debug)]
pub struct Formula {
    n_vars: u32,
    clauses: Vec<Clause>,
}

impl Formula {
    pub fn new(n_vars: u32, clauses: Vec<Clause>) -> Result<Self, FormulaError> {
        for c in &clauses {
            for l in c.literals() {
                if l.var() > n_vars {
                    return Err(FormulaError::VariableOutOfRange {
                        lit: l.code(),
                        n_vars,
                    });
                }
            }
        }
        Ok(Formula { n_vars, clauses })
    }

    /// Convenience constructor from signed DIMACS codes, origin Original.
    pub fn from_codes(n_vars: u32, clause_codes: &[&[i32]]) -> Result<Self, FormulaError> {
        let mut clauses = Vec::with_capacity(clause_codes.len());
        for codes in clause_codes {
            let lits = codes.iter().map(|&c| Literal::from_code(c)).collect();
            clauses.push(Clause::new(lits, ClauseOrigin::Original)?);
        }
        Formula::new(n_vars, clauses)
    }

    pub fn n_vars(&self) -> u32 {
        self.n_vars
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn n_clauses(&self) -> usize {
        self.clauses.len()
    }

    /// Constraint density m/n.
    pub fn density(&self) -> f64 {
        self.clauses.len() as f64 / self.n_vars as f64
    }
}

/// A partial or total truth assignment; domain is a subset of {1..n_vars}.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Assignment {
    values: Vec<Option<bool>>,
}

impl Assignment {
    pub fn empty(n_vars: u32) -> Self {
        Assignment {
            values: vec![None; n_vars as usize],
        }
    }

    /// Total assignment from a bit vector (index 0 holds variable 1).
    pub fn from_bools(values: &[bool]) -> Self {
        Assignment {
            values: values.iter().map(|&b| Some(b)).collect(),
        }
    }

    pub fn n_vars(&self) -> u32 {
        self.values.len() as u32
    }

    pub fn get(&self, var: u32) -> Option<bool> {
        self.values[(var - 1) as usize]
    }

    pub fn set(&mut self, var: u32, value: bool) {
        self.values[(var - 1) as usize] = Some(value);
    }

    pub fn is_total(&self) -> bool {
        self.values.iter().all(|v| v.is_some())
    }

    pub fn assigned_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    /// Iterator over (var, value) pairs in the domain.
    pub fn iter(&self) -> impl Iterator<Item = (u32, bool)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|b| (i as u32 + 1, b)))
    }

    /// Fill any unassigned variable from `other` (or `default` when `other`
    /// leaves it open too).
    pub fn overlay(&self, other: &Assignment, default: bool) -> Assignment {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| Some(a.or(*b).unwrap_or(default)))
            .collect();
        Assignment { values }
    }
}

#[derive(Error, Debug, PartialEq, Eq)]
pub enum EvalError {
    #[error("assignment leaves variable {0} unset")]
    Incomplete(u32),
    #[error("assignment covers {got} variables, formula has {want}")]
    WrongWidth { got: u32, want: u32 },
}

/// Result of checking a total assignment against a formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalReport {
    pub satisfied: bool,
    /// Indices (into `Formula::clauses`) of violated clauses.
    pub violated: Vec<usize>,
}

/// Checks a total assignment; reports every violated clause id.
pub fn evaluate(f: &Formula, a: &Assignment) -> Result<EvalReport, EvalError> {
    if a.n_vars() != f.n_vars() {
        return Err(EvalError::WrongWidth {
            got: a.n_vars(),
            want: f.n_vars(),
        });
    }
    for v in 1..=f.n_vars() {
        if a.get(v).is_none() {
            return Err(EvalError::Incomplete(v));
        }
    }
    let mut violated = Vec::new();
    for (id, clause) in f.clauses().iter().enumerate() {
        let sat = clause
            .literals()
            .iter()
            .any(|l| l.satisfied_by(a.get(l.var()).unwrap()));
        if !sat {
            violated.push(id);
        }
    }
    Ok(EvalReport {
        satisfied: violated.is_empty(),
        violated,
    })
}

#[derive(Error, Debug, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: malformed header: {msg}")]
    BadHeader { line: usize, msg: String },
    #[error("line {line}: unexpected token {token:?}")]
    BadToken { line: usize, token: String },
    #[error("line {line}: literal {lit} exceeds variable count {n_vars}")]
    LiteralOutOfRange { line: usize, lit: i32, n_vars: u32 },
    #[error("line {line}: clause contains a variable and its negation (tautology)")]
    Tautology { line: usize },
    #[error("line {line}: empty clause")]
    EmptyClause { line: usize },
    #[error("header promises {expected} clauses, found {found}")]
    ClauseCountMismatch { expected: usize, found: usize },
    #[error("clause started on line {line} is not terminated by 0")]
    Unterminated { line: usize },
    #[error("line {line}: clause marked `c streamlined` has more than two literals")]
    StreamlinedTooLong { line: usize },
    #[error("no `p cnf` header found")]
    MissingHeader,
}

/// Parses DIMACS CNF. Comment lines start with `c`, the header is
/// `p cnf <n> <m>`, clauses are zero-terminated signed integers and may
/// span lines. Duplicate literals in a clause are dropped; a clause
/// containing both a variable and its negation is an error. A
/// `c streamlined` comment marks the following clause as a streamlining
/// clause, round-tripping [`emit_dimacs_marked`] output.
pub fn parse_dimacs(text: &str) -> Result<Formula, ParseError> {
    let mut n_vars: Option<u32> = None;
    let mut expected_clauses = 0usize;
    let mut clauses: Vec<Clause> = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    let mut clause_start_line = 0usize;
    let mut next_is_streamlined = false;

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('c') {
            if line == "c streamlined" {
                next_is_streamlined = true;
            }
            continue;
        }
        if line.starts_with('p') {
            let mut parts = line.split_whitespace();
            let _p = parts.next();
            let fmt = parts.next();
            let n = parts.next();
            let m = parts.next();
            let extra = parts.next();
            if fmt != Some("cnf") || n.is_none() || m.is_none() || extra.is_some() {
                return Err(ParseError::BadHeader {
                    line: line_no,
                    msg: format!("expected `p cnf <vars> <clauses>`, got {raw_line:?}"),
                });
            }
            let n: u32 = n.unwrap().parse().map_err(|_| ParseError::BadHeader {
                line: line_no,
                msg: format!("bad variable count {:?}", n.unwrap()),
            })?;
            let m: usize = m.unwrap().parse().map_err(|_| ParseError::BadHeader {
                line: line_no,
                msg: format!("bad clause count {:?}", m.unwrap()),
            })?;
            if n_vars.is_some() {
                return Err(ParseError::BadHeader {
                    line: line_no,
                    msg: "duplicate header".into(),
                });
            }
            n_vars = Some(n);
            expected_clauses = m;
            continue;
        }
        let n = n_vars.ok_or(ParseError::MissingHeader)?;
        for token in line.split_whitespace() {
            let code: i32 = token.parse().map_err(|_| ParseError::BadToken {
                line: line_no,
                token: token.to_string(),
            })?;
            if code == 0 {
                if current.is_empty() {
                    return Err(ParseError::EmptyClause { line: line_no });
                }
                let lits = std::mem::take(&mut current);
                let origin = if next_is_streamlined {
                    ClauseOrigin::Streamlining
                } else {
                    ClauseOrigin::Original
                };
                next_is_streamlined = false;
                let clause = Clause::new(lits, origin).map_err(|_| {
                    ParseError::StreamlinedTooLong {
                        line: clause_start_line,
                    }
                })?;
                clauses.push(clause);
                continue;
            }
            if code.unsigned_abs() > n {
                return Err(ParseError::LiteralOutOfRange {
                    line: line_no,
                    lit: code,
                    n_vars: n,
                });
            }
            let lit = Literal::from_code(code);
            if current.contains(&lit.complement()) {
                return Err(ParseError::Tautology { line: line_no });
            }
            if current.is_empty() {
                clause_start_line = line_no;
            }
            if !current.contains(&lit) {
                current.push(lit);
            }
        }
    }
    if n_vars.is_none() {
        return Err(ParseError::MissingHeader);
    }
    if !current.is_empty() {
        return Err(ParseError::Unterminated {
            line: clause_start_line,
        });
    }
    if clauses.len() != expected_clauses {
        return Err(ParseError::ClauseCountMismatch {
            expected: expected_clauses,
            found: clauses.len(),
        });
    }
    Ok(Formula {
        n_vars: n_vars.unwrap(),
        clauses,
    })
}

/// Writes DIMACS CNF. Clauses appear in stored order; streamlining clauses
/// are emitted as ordinary clauses.
pub fn emit_dimacs(f: &Formula) -> String {
    let mut out = String::new();
    emit_dimacs_into(f, &mut out, false);
    out
}

/// Like [`emit_dimacs`] but prefixes each streamlining clause with a
/// `c streamlined` comment line, for downstream-solver handoff.
pub fn emit_dimacs_marked(f: &Formula) -> String {
    let mut out = String::new();
    emit_dimacs_into(f, &mut out, true);
    out
}

fn emit_dimacs_into(f: &Formula, out: &mut String, mark_streamlined: bool) {
    use fmt::Write;
    writeln!(out, "p cnf {} {}", f.n_vars(), f.n_clauses()).unwrap();
    for clause in f.clauses() {
        if mark_streamlined && clause.origin() == ClauseOrigin::Streamlining {
            out.push_str("c streamlined\n");
        }
        for lit in clause.literals() {
            write!(out, "{} ", lit.code()).unwrap();
        }
        out.push_str("0\n");
    }
}
