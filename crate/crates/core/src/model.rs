//! Layout specifications: tab-stop variables and hard/soft linear constraints.

use std::fmt;

use crate::error::{Error, Result};

/// A hard constraint counts as satisfied when its residual is at most this.
pub const HARD_FEASIBILITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Eq,
    Le,
    Ge,
}

impl Relation {
    pub fn token(self) -> &'static str {
        match self {
            Relation::Eq => "EQ",
            Relation::Le => "LE",
            Relation::Ge => "GE",
        }
    }

    pub fn from_token(s: &str) -> Option<Self> {
        match s {
            "EQ" => Some(Relation::Eq),
            "LE" => Some(Relation::Le),
            "GE" => Some(Relation::Ge),
            _ => None,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Priority {
    Hard,
    /// May be violated; the violation is priced by the penalty.
    Soft(f64),
}

impl Priority {
    pub fn is_hard(self) -> bool {
        matches!(self, Priority::Hard)
    }

    pub fn penalty(self) -> Option<f64> {
        match self {
            Priority::Hard => None,
            Priority::Soft(p) => Some(p),
        }
    }
}

/// `Σ coeff·x[var]  (=|≤|≥)  rhs`
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub terms: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
    pub priority: Priority,
}

impl Constraint {
    pub fn new(terms: Vec<(usize, f64)>, relation: Relation, rhs: f64, priority: Priority) -> Self {
        Constraint {
            terms,
            relation,
            rhs,
            priority,
        }
    }

    pub fn hard(terms: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> Self {
        Self::new(terms, relation, rhs, Priority::Hard)
    }

    pub fn soft(terms: Vec<(usize, f64)>, relation: Relation, rhs: f64, penalty: f64) -> Self {
        Self::new(terms, relation, rhs, Priority::Soft(penalty))
    }

    pub fn lhs(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Terms and right-hand side in `≤` orientation (GE rows negated).
    pub fn normalized(&self) -> (Vec<(usize, f64)>, f64) {
        match self.relation {
            Relation::Ge => (
                self.terms.iter().map(|&(j, a)| (j, -a)).collect(),
                -self.rhs,
            ),
            _ => (self.terms.clone(), self.rhs),
        }
    }

    fn validate(&self, var_count: usize) -> std::result::Result<(), String> {
        if self.terms.is_empty() {
            return Err("constraint has no terms".into());
        }
        let mut seen = vec![false; var_count];
        for &(j, a) in &self.terms {
            if j >= var_count {
                return Err(format!("variable index {j} out of range (vars {var_count})"));
            }
            if seen[j] {
                return Err(format!("variable x{j} appears twice"));
            }
            seen[j] = true;
            if !a.is_finite() {
                return Err(format!("coefficient of x{j} is not finite"));
            }
        }
        if !self.rhs.is_finite() {
            return Err("right-hand side is not finite".into());
        }
        if let Priority::Soft(p) = self.priority {
            if !(p > 0.0 && p.is_finite()) {
                return Err(format!("soft penalty must be positive, got {p}"));
            }
        }
        Ok(())
    }
}

/// Deviation of `x` from the constraint: `|lhs−rhs|` for EQ, the excess for
/// LE and the shortfall for GE.
pub fn residual(c: &Constraint, x: &[f64]) -> f64 {
    let diff = c.lhs(x) - c.rhs;
    match c.relation {
        Relation::Eq => diff.abs(),
        Relation::Le => diff.max(0.0),
        Relation::Ge => (-diff).max(0.0),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutSpec {
    pub var_count: usize,
    pub var_names: Vec<String>,
    pub constraints: Vec<Constraint>,
}

impl LayoutSpec {
    /// Creates a spec with default variable names `x0, x1, ...`.
    pub fn new(var_count: usize, constraints: Vec<Constraint>) -> Result<Self> {
        let spec = LayoutSpec {
            var_count,
            var_names: (0..var_count).map(default_name).collect(),
            constraints,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        self.var_names = names;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |m: String| Error::InvalidParameter(m);
        if self.var_names.len() != self.var_count {
            return Err(invalid(format!(
                "{} names for {} variables",
                self.var_names.len(),
                self.var_count
            )));
        }
        if self.constraints.is_empty() {
            return Err(invalid("layout has no constraints".into()));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            c.validate(self.var_count)
                .map_err(|m| invalid(format!("constraint {i}: {m}")))?;
        }
        Ok(())
    }

    pub fn errors(&self, x: &[f64]) -> Vec<f64> {
        self.constraints.iter().map(|c| residual(c, x)).collect()
    }

    /// Largest residual over the hard constraints.
    pub fn max_hard_error(&self, x: &[f64]) -> f64 {
        self.constraints
            .iter()
            .filter(|c| c.priority.is_hard())
            .map(|c| residual(c, x))
            .fold(0.0, f64::max)
    }

    pub fn soft_count(&self) -> usize {
        self.constraints.iter().filter(|c| !c.priority.is_hard()).count()
    }
}

pub(crate) fn default_name(i: usize) -> String {
    format!("x{i}")
}

/// Number of constraints whose residual is not smaller than `tol`.
/// Soft and hard constraints are counted alike.
pub fn count_suboptimal(spec: &LayoutSpec, x: &[f64], tol: f64) -> usize {
    spec.constraints
        .iter()
        .filter(|c| residual(c, x) >= tol)
        .count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::Unbounded => "unbounded",
            Status::IterationLimit => "iteration_limit",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Raw result of a solver on a lowered (QP or LP) problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverOutput {
    /// Values of every column of the lowered problem, slacks included.
    pub x: Vec<f64>,
    pub objective: f64,
    pub status: Status,
    pub iterations: usize,
}

impl SolverOutput {
    pub(crate) fn failed(n: usize, status: Status, iterations: usize) -> Self {
        SolverOutput {
            x: vec![0.0; n],
            objective: f64::NAN,
            status,
            iterations,
        }
    }
}

/// A solved layout: one value per tab stop plus per-constraint errors.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x: Vec<f64>,
    pub status: Status,
    pub iterations: usize,
    pub errors: Vec<f64>,
    /// Objective of the lowered problem (penalized slack cost).
    pub objective: f64,
}

impl Solution {
    pub fn from_output(spec: &LayoutSpec, out: SolverOutput) -> Self {
        let x = out.x[..spec.var_count].to_vec();
        let errors = spec.errors(&x);
        Solution {
            x,
            status: out.status,
            iterations: out.iterations,
            errors,
            objective: out.objective,
        }
    }

    pub fn suboptimal(&self, tol: f64) -> usize {
        self.errors.iter().filter(|&&e| e >= tol).count()
    }
}
