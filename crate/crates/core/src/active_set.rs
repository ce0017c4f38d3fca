//! Primal active set method for convex QPs.
//!
//! Starting from a feasible vertex found by simplex phase I, with every
//! inequality tight there in the working set, each iteration
//! solves the equality-constrained subproblem on the working set (equality
//! rows plus the inequality rows currently held tight):
//!
//! ```text
//! min ½δᵀQδ + ∇q(x)ᵀδ   s.t.  W δ = 0
//! ```
//!
//! If the step is zero the multipliers decide: a row with a negative
//! multiplier is released, otherwise `x` is optimal. A nonzero step is cut
//! at the first inactive row it would cross, and that row joins the working
//! set.

use crate::error::{Error, Result};
use crate::interior_point::regularized_kkt;
use crate::linalg::{dot, independent_rows, norm_inf, Matrix, SparseRow};
use crate::model::{SolverOutput, Status};
use crate::simplex::feasible_point;
use crate::transform::QpProblem;

const STEP_TOL: f64 = 1e-9;
const MULTIPLIER_TOL: f64 = 1e-9;
const DIRECTION_TOL: f64 = 1e-12;
/// A row counts as tight at the base point within this relative residual.
const TIGHT_TOL: f64 = 1e-9;

/// Inequality rows currently treated as equalities, kept sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ActiveSet {
    indices: Vec<usize>,
}

impl ActiveSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn insert(&mut self, i: usize) -> bool {
        match self.indices.binary_search(&i) {
            Ok(_) => false,
            Err(pos) => {
                self.indices.insert(pos, i);
                true
            }
        }
    }

    pub fn remove(&mut self, i: usize) -> bool {
        match self.indices.binary_search(&i) {
            Ok(pos) => {
                self.indices.remove(pos);
                true
            }
            Err(_) => false,
        }
    }
}

/// Solves `Qδ + Wᵀλ = −grad, Wδ = 0` and returns `(δ, λ)`.
pub fn eq_subproblem(q: &Matrix, grad: &[f64], w: &Matrix) -> Result<(Vec<f64>, Vec<f64>)> {
    if q.rows() != grad.len() || !q.is_square() || w.cols() != grad.len() {
        return Err(Error::Dimension("subproblem blocks do not match".into()));
    }
    eq_subproblem_sparse(&triplets(q), grad, &w.sparse_rows())
}

fn triplets(q: &Matrix) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for i in 0..q.rows() {
        out.extend(q.row(i).iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, &v)| (i, j, v)));
    }
    out
}

fn eq_subproblem_sparse(q: &[(usize, usize, f64)], grad: &[f64], w: &[SparseRow]) -> Result<(Vec<f64>, Vec<f64>)> {
    let rhs: Vec<f64> = grad.iter().map(|g| -g).collect();
    regularized_kkt(grad.len(), q, w, &rhs, &vec![0.0; w.len()])
}

/// Largest `α ≤ 1` keeping `x + αδ` inside every row that is not active, and
/// the row that limits it when `α < 1` (lowest index on ties).
pub fn step_length_alpha(
    rows: &[SparseRow],
    d: &[f64],
    x: &[f64],
    delta: &[f64],
    active: &ActiveSet,
) -> (f64, Option<usize>) {
    let mut alpha = 1.0;
    let mut blocking = None;
    for (i, (row, &di)) in rows.iter().zip(d).enumerate() {
        if active.contains(i) {
            continue;
        }
        let cd = row.dot(delta);
        if cd <= DIRECTION_TOL {
            continue;
        }
        let ratio = (di - row.dot(x)).max(0.0) / cd;
        if ratio < alpha {
            alpha = ratio;
            blocking = Some(i);
        }
    }
    (alpha, blocking)
}

/// Inequality rows tight at `x`, reduced to a subset that is linearly
/// independent together with the equality rows (earlier rows win).
pub fn initial_working_set(a_eq: &Matrix, c_ineq: &Matrix, d_ineq: &[f64], x: &[f64]) -> Result<ActiveSet> {
    let tight: Vec<usize> = (0..c_ineq.rows())
        .filter(|&i| (d_ineq[i] - dot(c_ineq.row(i), x)).abs() <= TIGHT_TOL * (1.0 + d_ineq[i].abs()))
        .collect();
    let mut stacked = a_eq.clone();
    for &i in &tight {
        stacked.push_row(c_ineq.row(i))?;
    }
    let m_eq = a_eq.rows();
    let mut active = ActiveSet::new();
    for k in independent_rows(&stacked, &vec![0.0; stacked.rows()])? {
        if k >= m_eq {
            active.insert(tight[k - m_eq]);
        }
    }
    Ok(active)
}

pub fn default_max_iter(qp: &QpProblem) -> usize {
    (20 * (qp.n + qp.c_ineq.rows())).max(1000)
}

/// Solves `qp` with the active set method. The starting point is a basic
/// feasible solution of the constraint rows, and the working set starts as
/// the rows tight there (see [`initial_working_set`]).
pub fn solve_qp_as(qp: &QpProblem, max_iter: usize) -> Result<SolverOutput> {
    solve_qp_as_observed(qp, max_iter, &mut |_, _| {})
}

/// [`solve_qp_as`] with a callback invoked on every iterate and its working
/// set, the feasible starting point included.
pub fn solve_qp_as_observed(
    qp: &QpProblem,
    max_iter: usize,
    observer: &mut dyn FnMut(&[f64], &ActiveSet),
) -> Result<SolverOutput> {
    let keep = match independent_rows(&qp.a_eq, &qp.b_eq) {
        Ok(k) => k,
        Err(Error::Infeasible) => return Ok(SolverOutput::failed(qp.n, Status::Infeasible, 0)),
        Err(e) => return Err(e),
    };
    let a_eq = qp.a_eq.select_rows(&keep);
    let b_eq: Vec<f64> = keep.iter().map(|&i| qp.b_eq[i]).collect();
    let mut x = match feasible_point(&a_eq, &b_eq, &qp.c_ineq, &qp.d_ineq) {
        Ok(x) => x,
        Err(Error::Infeasible) => return Ok(SolverOutput::failed(qp.n, Status::Infeasible, 0)),
        Err(Error::IterationLimit) => return Ok(SolverOutput::failed(qp.n, Status::IterationLimit, 0)),
        Err(e) => return Err(e),
    };
    let rows = qp.c_ineq.sparse_rows();
    let eq_rows = a_eq.sparse_rows();
    let q = triplets(&qp.q);
    let m_eq = a_eq.rows();
    let mut active = initial_working_set(&a_eq, &qp.c_ineq, &qp.d_ineq, &x)?;

    for iter in 0..max_iter {
        observer(&x, &active);
        let grad = qp.gradient(&x);
        let mut w = eq_rows.clone();
        w.extend(active.indices().iter().map(|&i| rows[i].clone()));
        let (delta, lambda) = eq_subproblem_sparse(&q, &grad, &w)?;

        if norm_inf(&delta) <= STEP_TOL {
            let mut most_negative: Option<(usize, f64)> = None;
            for (k, &i) in active.indices().iter().enumerate() {
                let l = lambda[m_eq + k];
                if l < -MULTIPLIER_TOL && most_negative.is_none_or(|(_, b)| l < b) {
                    most_negative = Some((i, l));
                }
            }
            match most_negative {
                Some((i, _)) => {
                    active.remove(i);
                }
                None => {
                    return Ok(SolverOutput {
                        objective: qp.objective(&x),
                        x,
                        status: Status::Optimal,
                        iterations: iter + 1,
                    });
                }
            }
            continue;
        }

        let (alpha, blocking) = step_length_alpha(&rows, &qp.d_ineq, &x, &delta, &active);
        for (xi, di) in x.iter_mut().zip(&delta) {
            *xi += alpha * di;
        }
        if let Some(i) = blocking {
            active.insert(i);
        }
    }
    Ok(SolverOutput {
        objective: qp.objective(&x),
        x,
        status: Status::IterationLimit,
        iterations: max_iter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::tests::three_buttons;
    use crate::transform::to_qp;

    fn qp(q: &[Vec<f64>], g: Vec<f64>, eq: &[Vec<f64>], b: Vec<f64>, le: &[Vec<f64>], d: Vec<f64>) -> QpProblem {
        let n = g.len();
        QpProblem::new(
            Matrix::from_rows(n, q).unwrap(),
            g,
            Matrix::from_rows(n, eq).unwrap(),
            b,
            Matrix::from_rows(n, le).unwrap(),
            d,
        )
        .unwrap()
    }

    /// min (x1−1)² + (x2−2.5)² over a pentagon; rows given in ≥ form and
    /// negated here.
    pub(crate) fn pentagon() -> QpProblem {
        let ge = [
            ([1.0, -2.0], -2.0),
            ([-1.0, -2.0], -6.0),
            ([-1.0, 2.0], -2.0),
            ([1.0, 0.0], 0.0),
            ([0.0, 1.0], 0.0),
        ];
        let le: Vec<Vec<f64>> = ge.iter().map(|(a, _)| vec![-a[0], -a[1]]).collect();
        let d = ge.iter().map(|(_, b)| -b).collect();
        // ½xᵀQx − gᵀx with Q = 2I, g = (2, 5) is (x1−1)² + (x2−2.5)² − 7.25
        qp(&[vec![2.0, 0.0], vec![0.0, 2.0]], vec![2.0, 5.0], &[], vec![], &le, d)
    }

    #[test]
    fn unconstrained_direction() {
        let (d, l) = eq_subproblem(&Matrix::identity(2), &[2.0, 0.0], &Matrix::zeros(0, 2)).unwrap();
        assert_eq!(d, vec![-2.0, 0.0]);
        assert!(l.is_empty());
    }

    #[test]
    fn constrained_direction() {
        let w = Matrix::from_rows(2, &[vec![1.0, 1.0]]).unwrap();
        let (d, l) = eq_subproblem(&Matrix::identity(2), &[2.0, 0.0], &w).unwrap();
        assert!((d[0] + 1.0).abs() < 1e-12 && (d[1] - 1.0).abs() < 1e-12);
        assert!((l[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn stationary_point_gives_zero_step() {
        let w = Matrix::from_rows(2, &[vec![1.0, -1.0]]).unwrap();
        let (d, l) = eq_subproblem(&Matrix::identity(2), &[0.0, 0.0], &w).unwrap();
        assert_eq!(norm_inf(&d), 0.0);
        assert_eq!(norm_inf(&l), 0.0);
    }

    #[test]
    fn alpha_examples() {
        let rows = vec![SparseRow::from_dense(&[1.0])];
        let (a, b) = step_length_alpha(&rows, &[4.0], &[2.0], &[4.0], &ActiveSet::new());
        assert_eq!((a, b), (0.5, Some(0)));

        let (a, b) = step_length_alpha(&rows, &[4.0], &[2.0], &[-4.0], &ActiveSet::new());
        assert_eq!((a, b), (1.0, None));

        // x = 4 already on x ≤ 4, moving outward
        let (a, b) = step_length_alpha(&rows, &[4.0], &[4.0], &[1.0], &ActiveSet::new());
        assert_eq!((a, b), (0.0, Some(0)));

        let mut act = ActiveSet::new();
        act.insert(0);
        assert_eq!(step_length_alpha(&rows, &[4.0], &[4.0], &[1.0], &act), (1.0, None));
    }

    #[test]
    fn alpha_ties_pick_lowest_row() {
        let rows = vec![SparseRow::from_dense(&[1.0, 0.0]), SparseRow::from_dense(&[0.0, 1.0])];
        let (a, b) = step_length_alpha(&rows, &[1.0, 1.0], &[0.0, 0.0], &[2.0, 2.0], &ActiveSet::new());
        assert_eq!((a, b), (0.5, Some(0)));
    }

    #[test]
    fn pentagon_optimum() {
        let out = solve_qp_as(&pentagon(), 100).unwrap();
        assert_eq!(out.status, Status::Optimal);
        assert!((out.x[0] - 1.4).abs() < 1e-9 && (out.x[1] - 1.7).abs() < 1e-9, "{:?}", out.x);
    }

    #[test]
    fn three_buttons_share_the_violation() {
        let out = solve_qp_as(&to_qp(&three_buttons()), 100).unwrap();
        assert_eq!(out.status, Status::Optimal);
        for w in &out.x[..3] {
            assert!((w - 100.0).abs() < 1e-6);
        }
    }

    #[test]
    fn single_variable_trace() {
        // min x² s.t. x ≥ 1, from x = 3: the step −3 is cut at x = 1 where
        // the row becomes active, then the multiplier is positive.
        let p = qp(&[vec![2.0]], vec![0.0], &[], vec![], &[vec![-1.0]], vec![-1.0]);
        let rows = p.c_ineq.sparse_rows();
        let mut x = vec![3.0];
        let mut act = ActiveSet::new();
        let (d, _) = eq_subproblem(&p.q, &p.gradient(&x), &Matrix::zeros(0, 1)).unwrap();
        assert_eq!(d, vec![-3.0]);
        let (alpha, block) = step_length_alpha(&rows, &p.d_ineq, &x, &d, &act);
        assert_eq!(block, Some(0));
        x[0] += alpha * d[0];
        assert!((x[0] - 1.0).abs() < 1e-12);
        act.insert(0);
        let w = p.c_ineq.select_rows(act.indices());
        let (d, l) = eq_subproblem(&p.q, &p.gradient(&x), &w).unwrap();
        assert!(norm_inf(&d) < 1e-12);
        assert!((l[0] - 2.0).abs() < 1e-12);

        let out = solve_qp_as(&p, 10).unwrap();
        assert_eq!(out.status, Status::Optimal);
        assert!((out.x[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_rows() {
        let p = qp(&[vec![1.0]], vec![0.0], &[vec![1.0], vec![1.0]], vec![1.0, 2.0], &[], vec![]);
        assert_eq!(solve_qp_as(&p, 10).unwrap().status, Status::Infeasible);
        let p = qp(&[vec![1.0]], vec![0.0], &[], vec![], &[vec![1.0], vec![-1.0]], vec![0.0, -1.0]);
        assert_eq!(solve_qp_as(&p, 10).unwrap().status, Status::Infeasible);
    }

    #[test]
    fn feasibility_only_problem() {
        let p = qp(&[vec![0.0, 0.0], vec![0.0, 0.0]], vec![0.0, 0.0], &[vec![1.0, 1.0]], vec![2.0], &[vec![-1.0, 0.0]], vec![0.0]);
        let out = solve_qp_as(&p, 10).unwrap();
        assert_eq!(out.status, Status::Optimal);
        assert!(p.max_violation(&out.x) < 1e-9);
    }
}
