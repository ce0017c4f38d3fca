//! Logarithmic barrier method for convex QPs.
//!
//! The outer loop follows the central path: for a barrier weight `t` it
//! computes the minimizer of `t·q(x) + φ(x)` over `{A_eq x = b_eq}`, where
//! `φ(x) = −Σ log(d_i − c_iᵀx)`, then multiplies `t` by `μ`. It stops once
//! `m/t < ε`, `m` being the number of inequality rows, which bounds the
//! suboptimality of the returned point by `ε`.
//!
//! Centering uses Newton's method with the equality constraints kept in the
//! KKT system, an Armijo backtracking line search and a fraction-to-boundary
//! cap that keeps every iterate strictly inside the inequality region.
//!
//! A strictly feasible start is found by a phase-I barrier solve of
//! `min s  s.t.  A_eq x = b_eq,  C x − d ≤ s·1`.

use crate::error::{Error, Result};
use crate::linalg::{dot, independent_rows, lu_solve, norm_inf, solve_kkt_entries, Matrix, SparseRow};
use crate::model::{SolverOutput, Status};
use crate::transform::QpProblem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierParams {
    /// Factor by which `t` grows between centering steps.
    pub mu: f64,
    /// Duality-gap target.
    pub eps: f64,
    /// Initial barrier weight.
    pub t0: f64,
    /// Newton stops once half the squared Newton decrement is below this.
    pub newton_tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
}

impl Default for BarrierParams {
    fn default() -> Self {
        BarrierParams {
            mu: 10.0,
            eps: 1e-6,
            t0: 1.0,
            newton_tol: 1e-10,
            max_outer: 64,
            max_inner: 100,
        }
    }
}

impl BarrierParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if !(self.mu > 1.0) {
            return bad("mu must exceed 1");
        }
        if !(self.eps > 0.0) {
            return bad("eps must be positive");
        }
        if !(self.t0 > 0.0) {
            return bad("t0 must be positive");
        }
        if !(self.newton_tol > 0.0) {
            return bad("newton_tol must be positive");
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return bad("iteration limits must be positive");
        }
        Ok(())
    }
}

/// Per-outer-iteration record of a barrier solve.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IpTrace {
    /// Barrier weight used for each centering step.
    pub t_values: Vec<f64>,
    /// `max_i (c_iᵀx − d_i)` after each centering step; negative means
    /// strictly feasible.
    pub max_ineq: Vec<f64>,
    /// QP objective after each centering step.
    pub objectives: Vec<f64>,
    /// Newton steps spent in phase I.
    pub phase1_newton: usize,
}

const LINE_SEARCH_ALPHA: f64 = 1e-4;
const LINE_SEARCH_BETA: f64 = 0.5;
const FRACTION_TO_BOUNDARY: f64 = 0.99;
/// Relative rounding level of the centering objective.
const DECREMENT_FLOOR: f64 = 1e-12;
/// Phase I stops early once every inequality has at least this margin.
const PHASE1_MARGIN: f64 = 1e-6;

/// The lowered problem in the layout the Newton iterations need.
struct Barrier {
    n: usize,
    q: Vec<(usize, usize, f64)>,
    g: Vec<f64>,
    a_eq: Matrix,
    eq_rows: Vec<SparseRow>,
    b_eq: Vec<f64>,
    ineq: Vec<SparseRow>,
    d: Vec<f64>,
}

enum OuterEnd {
    Converged,
    Stopped,
    IterationLimit,
}

impl Barrier {
    fn from_qp(qp: &QpProblem) -> Result<Self> {
        let keep = independent_rows(&qp.a_eq, &qp.b_eq)?;
        let mut q = Vec::new();
        for i in 0..qp.n {
            for (j, &v) in qp.q.row(i).iter().enumerate() {
                if v != 0.0 {
                    q.push((i, j, v));
                }
            }
        }
        let a_eq = qp.a_eq.select_rows(&keep);
        Ok(Barrier {
            n: qp.n,
            q,
            g: qp.g.clone(),
            eq_rows: a_eq.sparse_rows(),
            a_eq,
            b_eq: keep.iter().map(|&i| qp.b_eq[i]).collect(),
            ineq: qp.c_ineq.sparse_rows(),
            d: qp.d_ineq.clone(),
        })
    }

    fn m(&self) -> usize {
        self.ineq.len()
    }

    fn q_mul(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for &(i, j, v) in &self.q {
            out[i] += v * x[j];
        }
        out
    }

    fn f0(&self, x: &[f64]) -> f64 {
        0.5 * dot(x, &self.q_mul(x)) - dot(&self.g, x)
    }

    fn margins(&self, x: &[f64]) -> Vec<f64> {
        self.ineq
            .iter()
            .zip(&self.d)
            .map(|(c, &d)| d - c.dot(x))
            .collect()
    }

    fn max_ineq(&self, x: &[f64]) -> f64 {
        self.margins(x).iter().fold(f64::NEG_INFINITY, |m, &r| m.max(-r))
    }

    /// `t·q(x) + φ(x)`, or `None` outside the open inequality region.
    fn composite(&self, x: &[f64], t: f64) -> Option<f64> {
        let mut phi = 0.0;
        for r in self.margins(x) {
            if !(r > 0.0) {
                return None;
            }
            phi -= r.ln();
        }
        Some(t * self.f0(x) + phi)
    }

    /// Minimum-norm solution of the equality rows.
    fn least_squares_start(&self) -> Result<Vec<f64>> {
        let m = self.a_eq.rows();
        if m == 0 {
            return Ok(vec![0.0; self.n]);
        }
        let rows = self.a_eq.sparse_rows();
        let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.n];
        for (i, r) in rows.iter().enumerate() {
            for (j, v) in r.iter() {
                by_col[j].push((i, v));
            }
        }
        let mut gram = Matrix::zeros(m, m);
        for col in &by_col {
            for &(i, vi) in col {
                for &(k, vk) in col {
                    gram[(i, k)] += vi * vk;
                }
            }
        }
        let y = lu_solve(&gram, &self.b_eq)?;
        Ok(self.a_eq.tr_mul_vec(&y))
    }

    /// Newton iterations on `t·q + φ` restricted to the equality rows.
    /// Returns early once `stop` holds at an iterate.
    fn center(
        &self,
        x0: &[f64],
        t: f64,
        params: &BarrierParams,
        stop: &dyn Fn(&[f64]) -> bool,
        mut trace: Option<&mut Vec<f64>>,
    ) -> Result<(Vec<f64>, usize)> {
        let n = self.n;
        let mut x = x0.to_vec();
        for it in 0..params.max_inner {
            let r = self.margins(&x);
            let qx = self.q_mul(&x);
            let mut grad: Vec<f64> = qx.iter().zip(&self.g).map(|(a, b)| t * (a - b)).collect();
            let mut h: Vec<(usize, usize, f64)> = self.q.iter().map(|&(i, j, v)| (i, j, t * v)).collect();
            for (row, &ri) in self.ineq.iter().zip(&r) {
                let inv = 1.0 / ri;
                let w = inv * inv;
                for (a, ca) in row.iter() {
                    grad[a] += ca * inv;
                    for (b, cb) in row.iter() {
                        h.push((a, b, w * ca * cb));
                    }
                }
            }
            let eq_res: Vec<f64> = self.eq_rows.iter().zip(&self.b_eq).map(|(row, b)| b - row.dot(&x)).collect();
            let neg_grad: Vec<f64> = grad.iter().map(|v| -v).collect();
            let (dx, _) = regularized_kkt(n, &h, &self.eq_rows, &neg_grad, &eq_res)?;

            // Half the squared decrement estimates the gap to the central
            // point; once it reaches the rounding level of t·q + φ (large t)
            // further steps only shuffle rounding errors.
            let f_cur = self.composite(&x, t).expect("iterate is strictly feasible");
            // dxᵀ H dx from the sparse pieces of H.
            let decrement = t * dot(&dx, &self.q_mul(&dx))
                + self
                    .ineq
                    .iter()
                    .zip(&r)
                    .map(|(row, ri)| (row.dot(&dx) / ri).powi(2))
                    .sum::<f64>();
            let half = decrement / 2.0;
            if half <= params.newton_tol || half <= DECREMENT_FLOOR * f_cur.abs() {
                return Ok((x, it));
            }

            let mut alpha: f64 = 1.0;
            for (row, &ri) in self.ineq.iter().zip(&r) {
                let cd = row.dot(&dx);
                if cd > 0.0 {
                    alpha = alpha.min(FRACTION_TO_BOUNDARY * ri / cd);
                }
            }
            let slope = dot(&grad, &dx);
            let candidate = |alpha: f64| -> Vec<f64> {
                x.iter().zip(&dx).map(|(xi, di)| xi + alpha * di).collect()
            };
            let accepted = loop {
                let xn = candidate(alpha);
                if let Some(f) = self.composite(&xn, t) {
                    if f <= f_cur + LINE_SEARCH_ALPHA * alpha * slope {
                        break Some((xn, f));
                    }
                }
                alpha *= LINE_SEARCH_BETA;
                if alpha < 1e-16 {
                    break None;
                }
            };
            match accepted {
                Some((xn, f)) => {
                    x = xn;
                    if let Some(tr) = trace.as_deref_mut() {
                        tr.push(f);
                    }
                    if stop(&x) {
                        return Ok((x, it + 1));
                    }
                }
                // No decrease possible at working precision: we are centered.
                None => return Ok((x, it)),
            }
        }
        Err(Error::IterationLimit)
    }

    /// Runs the outer barrier loop from a strictly feasible `x`.
    fn outer(
        &self,
        mut x: Vec<f64>,
        params: &BarrierParams,
        stop: &dyn Fn(&[f64]) -> bool,
        trace: &mut IpTrace,
        newton: &mut usize,
    ) -> Result<(Vec<f64>, OuterEnd)> {
        let m = self.m() as f64;
        let mut t = params.t0;
        let mut updates = 0;
        loop {
            let (xc, steps) = match self.center(&x, t, params, stop, None) {
                Ok(v) => v,
                Err(Error::IterationLimit) => {
                    *newton += params.max_inner;
                    return Ok((x, OuterEnd::IterationLimit));
                }
                Err(e) => return Err(e),
            };
            x = xc;
            *newton += steps;
            trace.t_values.push(t);
            trace.max_ineq.push(self.max_ineq(&x));
            trace.objectives.push(self.f0(&x));
            if stop(&x) {
                return Ok((x, OuterEnd::Stopped));
            }
            if m / t < params.eps {
                return Ok((x, OuterEnd::Converged));
            }
            updates += 1;
            if updates >= params.max_outer {
                return Ok((x, OuterEnd::IterationLimit));
            }
            t *= params.mu;
        }
    }

    fn strictly_feasible(&self, params: &BarrierParams, newton: &mut usize) -> Result<Vec<f64>> {
        let x0 = self.least_squares_start()?;
        if self.m() == 0 {
            return Ok(x0);
        }
        let v = self.max_ineq(&x0);
        if v < -PHASE1_MARGIN {
            return Ok(x0);
        }

        // Phase I over z = (x, s).
        let n = self.n;
        let mut a_eq = Matrix::zeros(self.a_eq.rows(), n + 1);
        for i in 0..self.a_eq.rows() {
            a_eq.row_mut(i)[..n].copy_from_slice(self.a_eq.row(i));
        }
        let ineq = self
            .ineq
            .iter()
            .map(|r| {
                let mut r = r.clone();
                r.indices.push(n);
                r.values.push(-1.0);
                r
            })
            .collect();
        let mut g = vec![0.0; n + 1];
        g[n] = -1.0;
        let phase1 = Barrier {
            n: n + 1,
            q: Vec::new(),
            g,
            eq_rows: a_eq.sparse_rows(),
            a_eq,
            b_eq: self.b_eq.clone(),
            ineq,
            d: self.d.clone(),
        };
        let mut z = x0;
        z.push(v + 1.0);
        let mut scratch = IpTrace::default();
        let stop = |z: &[f64]| z[n] < -PHASE1_MARGIN;
        let (z, end) = phase1.outer(z, params, &stop, &mut scratch, newton)?;
        let s = z[n];
        match end {
            OuterEnd::Stopped => {}
            _ if s < -1e-9 => {}
            OuterEnd::IterationLimit => return Err(Error::IterationLimit),
            OuterEnd::Converged => return Err(Error::Infeasible),
        }
        let mut x = z;
        x.truncate(n);
        Ok(x)
    }
}

/// Solves the Newton KKT system; if it is singular (flat directions of a
/// merely semidefinite Hessian), retries with a small multiple of the
/// identity added to the Hessian block. The regularization does not move
/// the fixed point: the step vanishes exactly when the projected gradient
/// does.
pub(crate) fn regularized_kkt(
    n: usize,
    h: &[(usize, usize, f64)],
    a: &[SparseRow],
    r1: &[f64],
    r2: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    match solve_kkt_entries(n, h, a, r1, r2) {
        Err(Error::Singular) => {}
        other => return other,
    }
    let mut diag = vec![0.0; n];
    for &(i, j, v) in h {
        if i == j {
            diag[i] += v;
        }
    }
    let scale = diag.iter().fold(1.0_f64, |m, d| m.max(d.abs()));
    let mut last = Err(Error::Singular);
    for rho in [1e-10, 1e-8, 1e-6] {
        let mut hr = h.to_vec();
        hr.extend((0..n).map(|i| (i, i, rho * scale)));
        last = solve_kkt_entries(n, &hr, a, r1, r2);
        if last.is_ok() {
            break;
        }
    }
    last
}

/// Finds `x` with `A_eq x = b_eq` and every inequality strictly slack.
pub fn find_strictly_feasible(qp: &QpProblem, params: &BarrierParams) -> Result<Vec<f64>> {
    params.validate()?;
    let b = Barrier::from_qp(qp)?;
    let mut newton = 0;
    b.strictly_feasible(params, &mut newton)
}

/// One centering step at barrier weight `t`, starting from the strictly
/// feasible `x`.
pub fn centering_step(qp: &QpProblem, x: &[f64], t: f64, params: &BarrierParams) -> Result<Vec<f64>> {
    params.validate()?;
    if !(t > 0.0) {
        return Err(Error::InvalidParameter("t must be positive".into()));
    }
    let b = Barrier::from_qp(qp)?;
    if b.max_ineq(x) >= 0.0 {
        return Err(Error::InvalidParameter("start point is not strictly feasible".into()));
    }
    b.center(x, t, params, &|_| false, None).map(|(x, _)| x)
}

pub fn solve_qp_ip(qp: &QpProblem, params: &BarrierParams) -> Result<SolverOutput> {
    solve_qp_ip_traced(qp, params).map(|(out, _)| out)
}

/// Like [`solve_qp_ip`], also returning the outer-iteration trace.
pub fn solve_qp_ip_traced(qp: &QpProblem, params: &BarrierParams) -> Result<(SolverOutput, IpTrace)> {
    params.validate()?;
    let mut trace = IpTrace::default();
    let mut newton = 0;
    let barrier = match Barrier::from_qp(qp) {
        Ok(b) => b,
        Err(Error::Infeasible) => return Ok((SolverOutput::failed(qp.n, Status::Infeasible, 0), trace)),
        Err(e) => return Err(e),
    };
    let x0 = match barrier.strictly_feasible(params, &mut newton) {
        Ok(x) => x,
        Err(Error::Infeasible) => {
            return Ok((SolverOutput::failed(qp.n, Status::Infeasible, newton), trace));
        }
        Err(Error::IterationLimit) => {
            return Ok((SolverOutput::failed(qp.n, Status::IterationLimit, newton), trace));
        }
        Err(e) => return Err(e),
    };
    trace.phase1_newton = newton;
    let (x, end) = barrier.outer(x0, params, &|_| false, &mut trace, &mut newton)?;
    let status = match end {
        OuterEnd::IterationLimit => Status::IterationLimit,
        _ => Status::Optimal,
    };
    debug_assert!(norm_inf(&x).is_finite());
    Ok((
        SolverOutput {
            objective: qp.objective(&x),
            x,
            status,
            iterations: newton,
        },
        trace,
    ))
}
