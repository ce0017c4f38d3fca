//! Lowering of layout specifications into quadratic and linear programs.
//!
//! Hard constraints are copied as rows. Every soft constraint receives slack
//! columns that absorb its violation:
//!
//! * QP: the slack is squared and weighted by the penalty, `penalty · s²`.
//!   Soft equalities get one free slack, soft inequalities one slack `s ≥ 0`.
//! * LP: the slack enters linearly, `penalty · (s⁺ + s⁻)`. Free equality
//!   slacks are split into a nonnegative pair.
//!
//! `GE` rows are negated so that both programs only contain `=` and `≤` rows.

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::model::{LayoutSpec, Priority, Relation};

/// `min ½xᵀQx − gᵀx  s.t.  A_eq x = b_eq,  C x ≤ d`, all variables free.
#[derive(Debug, Clone, PartialEq)]
pub struct QpProblem {
    pub n: usize,
    pub q: Matrix,
    pub g: Vec<f64>,
    pub a_eq: Matrix,
    pub b_eq: Vec<f64>,
    pub c_ineq: Matrix,
    pub d_ineq: Vec<f64>,
    /// Number of leading columns that are layout variables.
    pub var_count: usize,
    /// Constraint index → slack column, for soft constraints.
    pub slack_map: Vec<Option<usize>>,
}

impl QpProblem {
    /// A general QP that did not come from a layout.
    pub fn new(
        q: Matrix,
        g: Vec<f64>,
        a_eq: Matrix,
        b_eq: Vec<f64>,
        c_ineq: Matrix,
        d_ineq: Vec<f64>,
    ) -> Result<Self> {
        let n = g.len();
        let bad = |m: &str| Err(Error::Dimension(m.to_string()));
        if q.rows() != n || q.cols() != n {
            return bad("Q must be n x n with n = len(g)");
        }
        if !q.is_symmetric() {
            return Err(Error::InvalidParameter("Q must be symmetric".into()));
        }
        if a_eq.cols() != n || a_eq.rows() != b_eq.len() {
            return bad("equality block shape mismatch");
        }
        if c_ineq.cols() != n || c_ineq.rows() != d_ineq.len() {
            return bad("inequality block shape mismatch");
        }
        Ok(QpProblem {
            n,
            q,
            g,
            a_eq,
            b_eq,
            c_ineq,
            d_ineq,
            var_count: n,
            slack_map: Vec::new(),
        })
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        0.5 * dot(x, &self.q.mul_vec(x)) - dot(&self.g, x)
    }

    /// `∇q(x) = Qx − g`
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.q
            .mul_vec(x)
            .iter()
            .zip(&self.g)
            .map(|(a, b)| a - b)
            .collect()
    }

    /// Largest violation of any row, equality rows measured in absolute value.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let eq = (0..self.a_eq.rows())
            .map(|i| (dot(self.a_eq.row(i), x) - self.b_eq[i]).abs())
            .fold(0.0, f64::max);
        let ineq = (0..self.c_ineq.rows())
            .map(|i| dot(self.c_ineq.row(i), x) - self.d_ineq[i])
            .fold(0.0, f64::max);
        eq.max(ineq)
    }

    /// Extends layout variables with the slack values that make every soft
    /// row tight at the smallest possible violation.
    pub fn extend_with_slacks(&self, spec: &LayoutSpec, x: &[f64]) -> Vec<f64> {
        let mut full = x[..self.var_count].to_vec();
        full.resize(self.n, 0.0);
        for (k, c) in spec.constraints.iter().enumerate() {
            if let Some(col) = self.slack_map[k] {
                let (terms, rhs) = c.normalized();
                let lhs: f64 = terms.iter().map(|&(j, a)| a * x[j]).sum();
                full[col] = match c.relation {
                    Relation::Eq => rhs - lhs,
                    _ => (lhs - rhs).max(0.0),
                };
            }
        }
        full
    }
}

/// Slack columns of one soft constraint in the LP.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlackSplit {
    pub plus: usize,
    pub minus: Option<usize>,
}

/// `min cᵀx  s.t.  A_eq x = b_eq,  C x ≤ d`, with `x_j ≥ 0` where
/// `nonneg[j]` and `x_j` free otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub n: usize,
    pub c: Vec<f64>,
    pub a_eq: Matrix,
    pub b_eq: Vec<f64>,
    pub c_ineq: Matrix,
    pub d_ineq: Vec<f64>,
    pub nonneg: Vec<bool>,
    pub var_count: usize,
    pub split_map: Vec<Option<SlackSplit>>,
}

impl LpProblem {
    pub fn new(
        c: Vec<f64>,
        a_eq: Matrix,
        b_eq: Vec<f64>,
        c_ineq: Matrix,
        d_ineq: Vec<f64>,
        nonneg: Vec<bool>,
    ) -> Result<Self> {
        let n = c.len();
        if a_eq.cols() != n || a_eq.rows() != b_eq.len() {
            return Err(Error::Dimension("equality block shape mismatch".into()));
        }
        if c_ineq.cols() != n || c_ineq.rows() != d_ineq.len() {
            return Err(Error::Dimension("inequality block shape mismatch".into()));
        }
        if nonneg.len() != n {
            return Err(Error::Dimension("nonneg mask length mismatch".into()));
        }
        Ok(LpProblem {
            n,
            c,
            a_eq,
            b_eq,
            c_ineq,
            d_ineq,
            nonneg,
            var_count: n,
            split_map: Vec::new(),
        })
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        dot(&self.c, x)
    }

    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let eq = (0..self.a_eq.rows())
            .map(|i| (dot(self.a_eq.row(i), x) - self.b_eq[i]).abs())
            .fold(0.0, f64::max);
        let ineq = (0..self.c_ineq.rows())
            .map(|i| dot(self.c_ineq.row(i), x) - self.d_ineq[i])
            .fold(0.0, f64::max);
        let bounds = x
            .iter()
            .zip(&self.nonneg)
            .filter(|(_, &nn)| nn)
            .map(|(v, _)| -v)
            .fold(0.0, f64::max);
        eq.max(ineq).max(bounds)
    }

    pub fn extend_with_slacks(&self, spec: &LayoutSpec, x: &[f64]) -> Vec<f64> {
        let mut full = x[..self.var_count].to_vec();
        full.resize(self.n, 0.0);
        for (k, c) in spec.constraints.iter().enumerate() {
            if let Some(split) = self.split_map[k] {
                let (terms, rhs) = c.normalized();
                let lhs: f64 = terms.iter().map(|&(j, a)| a * x[j]).sum();
                match split.minus {
                    Some(minus) => {
                        full[split.plus] = (rhs - lhs).max(0.0);
                        full[minus] = (lhs - rhs).max(0.0);
                    }
                    None => full[split.plus] = (lhs - rhs).max(0.0),
                }
            }
        }
        full
    }
}

struct Rows {
    n: usize,
    eq: Vec<Vec<f64>>,
    b_eq: Vec<f64>,
    ineq: Vec<Vec<f64>>,
    d: Vec<f64>,
}

impl Rows {
    fn new(n: usize) -> Self {
        Rows {
            n,
            eq: Vec::new(),
            b_eq: Vec::new(),
            ineq: Vec::new(),
            d: Vec::new(),
        }
    }

    fn row(&self, terms: &[(usize, f64)], extra: &[(usize, f64)]) -> Vec<f64> {
        let mut r = vec![0.0; self.n];
        for &(j, a) in terms.iter().chain(extra) {
            r[j] += a;
        }
        r
    }

    fn push_eq(&mut self, terms: &[(usize, f64)], extra: &[(usize, f64)], rhs: f64) {
        let r = self.row(terms, extra);
        self.eq.push(r);
        self.b_eq.push(rhs);
    }

    fn push_le(&mut self, terms: &[(usize, f64)], extra: &[(usize, f64)], rhs: f64) {
        let r = self.row(terms, extra);
        self.ineq.push(r);
        self.d.push(rhs);
    }

    fn into_matrices(self) -> (Matrix, Vec<f64>, Matrix, Vec<f64>) {
        let n = self.n;
        let a = Matrix::from_rows(n, &self.eq).expect("rows built with n columns");
        let c = Matrix::from_rows(n, &self.ineq).expect("rows built with n columns");
        (a, self.b_eq, c, self.d)
    }
}

/// Lowers a layout into the penalized-slack QP.
pub fn to_qp(spec: &LayoutSpec) -> QpProblem {
    let nv = spec.var_count;
    let n = nv + spec.soft_count();
    let mut rows = Rows::new(n);
    let mut diag = vec![0.0; n];
    let mut slack_map = Vec::with_capacity(spec.constraints.len());
    let mut next = nv;

    for c in &spec.constraints {
        let (terms, rhs) = c.normalized();
        match c.priority {
            Priority::Hard => {
                slack_map.push(None);
                match c.relation {
                    Relation::Eq => rows.push_eq(&terms, &[], rhs),
                    _ => rows.push_le(&terms, &[], rhs),
                }
            }
            Priority::Soft(pen) => {
                let s = next;
                next += 1;
                slack_map.push(Some(s));
                diag[s] = 2.0 * pen;
                match c.relation {
                    Relation::Eq => rows.push_eq(&terms, &[(s, 1.0)], rhs),
                    _ => {
                        rows.push_le(&terms, &[(s, -1.0)], rhs);
                        rows.push_le(&[], &[(s, -1.0)], 0.0);
                    }
                }
            }
        }
    }
    let (a_eq, b_eq, c_ineq, d_ineq) = rows.into_matrices();
    QpProblem {
        n,
        q: Matrix::from_diagonal(&diag),
        g: vec![0.0; n],
        a_eq,
        b_eq,
        c_ineq,
        d_ineq,
        var_count: nv,
        slack_map,
    }
}

/// Lowers a layout into the linearly penalized LP.
pub fn to_lp(spec: &LayoutSpec) -> LpProblem {
    let nv = spec.var_count;
    let extra: usize = spec
        .constraints
        .iter()
        .map(|c| match (c.priority, c.relation) {
            (Priority::Hard, _) => 0,
            (Priority::Soft(_), Relation::Eq) => 2,
            (Priority::Soft(_), _) => 1,
        })
        .sum();
    let n = nv + extra;
    let mut rows = Rows::new(n);
    let mut cost = vec![0.0; n];
    let mut nonneg = vec![false; n];
    let mut split_map = Vec::with_capacity(spec.constraints.len());
    let mut next = nv;

    for c in &spec.constraints {
        let (terms, rhs) = c.normalized();
        match c.priority {
            Priority::Hard => {
                split_map.push(None);
                match c.relation {
                    Relation::Eq => rows.push_eq(&terms, &[], rhs),
                    _ => rows.push_le(&terms, &[], rhs),
                }
            }
            Priority::Soft(pen) => match c.relation {
                Relation::Eq => {
                    let (p, m) = (next, next + 1);
                    next += 2;
                    cost[p] = pen;
                    cost[m] = pen;
                    nonneg[p] = true;
                    nonneg[m] = true;
                    split_map.push(Some(SlackSplit {
                        plus: p,
                        minus: Some(m),
                    }));
                    rows.push_eq(&terms, &[(p, 1.0), (m, -1.0)], rhs);
                }
                _ => {
                    let s = next;
                    next += 1;
                    cost[s] = pen;
                    nonneg[s] = true;
                    split_map.push(Some(SlackSplit {
                        plus: s,
                        minus: None,
                    }));
                    rows.push_le(&terms, &[(s, -1.0)], rhs);
                }
            },
        }
    }
    let (a_eq, b_eq, c_ineq, d_ineq) = rows.into_matrices();
    LpProblem {
        n,
        c: cost,
        a_eq,
        b_eq,
        c_ineq,
        d_ineq,
        nonneg,
        var_count: nv,
        split_map,
    }
}
