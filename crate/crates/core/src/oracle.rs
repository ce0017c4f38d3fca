//! Brute-force reference solvers for small problems.
//!
//! Both oracles enumerate combinatorial candidates (active sets for the QP,
//! bases for the LP) and use their own Gaussian elimination with complete
//! pivoting, so they share no numerical code with the solvers they check.

use crate::error::{Error, Result};
use crate::transform::{LpProblem, QpProblem};

/// Largest inequality count `qp_oracle` accepts.
pub const QP_ORACLE_MAX_ROWS: usize = 12;
pub const QP_ORACLE_MAX_VARS: usize = 10;
/// Largest standard-form column count `lp_oracle` accepts.
pub const LP_ORACLE_MAX_COLS: usize = 12;

const FEAS_TOL: f64 = 1e-9;

type Dense = Vec<Vec<f64>>;

/// Solves a square system by elimination with complete pivoting; `None` when
/// it is singular relative to the largest entry.
fn gauss_solve(mut a: Dense, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (mut pr, mut pc, mut best) = (k, k, 0.0);
        for (i, row) in a.iter().enumerate().skip(k) {
            for (j, v) in row.iter().enumerate().skip(k) {
                if v.abs() > best {
                    (pr, pc, best) = (i, j, v.abs());
                }
            }
        }
        if best <= 1e-11 * scale {
            return None;
        }
        a.swap(k, pr);
        b.swap(k, pr);
        for row in a.iter_mut() {
            row.swap(k, pc);
        }
        perm.swap(k, pc);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut y = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * y[j]).sum();
        y[k] = (b[k] - s) / a[k][k];
    }
    let mut x = vec![0.0; n];
    for (k, &p) in perm.iter().enumerate() {
        x[p] = y[k];
    }
    Some(x)
}

/// Drops rows of `[a | b]` that are combinations of earlier rows. An
/// inconsistent combination is infeasible.
fn reduce_rows(a: &Dense, b: &[f64]) -> Result<(Dense, Vec<f64>)> {
    let mut echelon: Vec<(usize, Vec<f64>, f64)> = Vec::new();
    let mut keep = Vec::new();
    for (i, row) in a.iter().enumerate() {
        let mut v = row.clone();
        let mut beta = b[i];
        let scale = v.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
        for (p, r, rb) in &echelon {
            let f = v[*p] / r[*p];
            if f != 0.0 {
                for (vj, rj) in v.iter_mut().zip(r) {
                    *vj -= f * rj;
                }
                beta -= f * rb;
            }
        }
        let (p, mag) = v
            .iter()
            .enumerate()
            .fold((0, 0.0_f64), |acc, (j, x)| if x.abs() > acc.1 { (j, x.abs()) } else { acc });
        if mag <= 1e-9 * scale {
            if beta.abs() > 1e-7 * scale.max(b[i].abs()) {
                return Err(Error::Infeasible);
            }
            continue;
        }
        echelon.push((p, v, beta));
        keep.push(i);
    }
    Ok((
        keep.iter().map(|&i| a[i].clone()).collect(),
        keep.iter().map(|&i| b[i]).collect(),
    ))
}

/// Calls `f` with every `k`-subset of `0..n` in lexicographic order.
fn for_each_subset(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn rows_of(m: &crate::linalg::Matrix) -> Dense {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Exact minimizer of a small convex QP by active-set enumeration.
pub fn qp_oracle(qp: &QpProblem) -> Result<Vec<f64>> {
    let n = qp.n;
    let m = qp.c_ineq.rows();
    if n > QP_ORACLE_MAX_VARS || m > QP_ORACLE_MAX_ROWS {
        return Err(Error::InvalidParameter(format!(
            "oracle limited to {QP_ORACLE_MAX_VARS} variables and {QP_ORACLE_MAX_ROWS} inequalities"
        )));
    }
    let (a_eq, b_eq) = reduce_rows(&rows_of(&qp.a_eq), &qp.b_eq)?;
    let c = rows_of(&qp.c_ineq);
    let q = rows_of(&qp.q);
    let mut best: Option<(f64, Vec<f64>)> = None;

    for k in 0..=m.min(n.saturating_sub(a_eq.len())) {
        for_each_subset(m, k, &mut |w| {
            // [Q Aᵀ; A 0] [x; λ] = [g; b] with A = the equalities plus W.
            let mut a = a_eq.clone();
            let mut b = b_eq.clone();
            for &i in w {
                a.push(c[i].clone());
                b.push(qp.d_ineq[i]);
            }
            let dim = n + a.len();
            let mut k_mat = vec![vec![0.0; dim]; dim];
            for i in 0..n {
                k_mat[i][..n].copy_from_slice(&q[i]);
            }
            for (r, row) in a.iter().enumerate() {
                for j in 0..n {
                    k_mat[n + r][j] = row[j];
                    k_mat[j][n + r] = row[j];
                }
            }
            let mut rhs = qp.g.clone();
            rhs.extend_from_slice(&b);
            let Some(sol) = gauss_solve(k_mat, rhs) else {
                return;
            };
            let x = &sol[..n];
            let feasible = c
                .iter()
                .zip(&qp.d_ineq)
                .all(|(row, &d)| dot(row, x) <= d + FEAS_TOL * (1.0 + d.abs()));
            let dual_ok = sol[n + a_eq.len()..].iter().all(|&l| l >= -1e-9);
            if !(feasible && dual_ok) {
                return;
            }
            let obj = qp.objective(x);
            if best.as_ref().is_none_or(|(o, _)| obj < *o - 1e-12) {
                best = Some((obj, x.to_vec()));
            }
        });
    }
    best.map(|(_, x)| x).ok_or(Error::Infeasible)
}

/// `min cᵀy  s.t.  A y = b,  y ≥ 0`, built independently of the simplex
/// module's standard form.
struct OracleForm {
    a: Dense,
    b: Vec<f64>,
    c: Vec<f64>,
}

fn oracle_form(lp: &LpProblem) -> OracleForm {
    // Column layout: each variable as y⁺ (and y⁻ if free), then one slack per
    // inequality.
    let mut cols: Vec<(usize, f64)> = Vec::new();
    for j in 0..lp.n {
        cols.push((j, 1.0));
        if !lp.nonneg[j] {
            cols.push((j, -1.0));
        }
    }
    let n_struct = cols.len();
    let m_eq = lp.a_eq.rows();
    let m_in = lp.c_ineq.rows();
    let width = n_struct + m_in;
    let mut a = Vec::with_capacity(m_eq + m_in);
    let mut b = Vec::with_capacity(m_eq + m_in);
    for (src, rhs, slack) in (0..m_eq)
        .map(|i| (lp.a_eq.row(i), lp.b_eq[i], None))
        .chain((0..m_in).map(|i| (lp.c_ineq.row(i), lp.d_ineq[i], Some(i))))
    {
        let mut row = vec![0.0; width];
        for (k, &(j, s)) in cols.iter().enumerate() {
            row[k] = s * src[j];
        }
        if let Some(i) = slack {
            row[n_struct + i] = 1.0;
        }
        a.push(row);
        b.push(rhs);
    }
    let mut c: Vec<f64> = cols.iter().map(|&(j, s)| s * lp.c[j]).collect();
    c.resize(width, 0.0);
    OracleForm { a, b, c }
}

/// Smallest `cᵀy` over the basic feasible solutions of `{A y = b, y ≥ 0}`,
/// or `None` when there are none.
fn best_vertex(a: &Dense, b: &[f64], c: &[f64]) -> Result<Option<f64>> {
    let (a, b) = reduce_rows(a, b)?;
    let rows = a.len();
    let width = c.len();
    let mut best: Option<f64> = None;
    for_each_subset(width, rows, &mut |basis| {
        let bm: Dense = a.iter().map(|row| basis.iter().map(|&j| row[j]).collect()).collect();
        let yb = if rows == 0 {
            Vec::new()
        } else {
            match gauss_solve(bm, b.clone()) {
                Some(y) => y,
                None => return,
            }
        };
        let scale = 1.0 + b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if yb.iter().any(|&v| v < -FEAS_TOL * scale) {
            return;
        }
        let obj: f64 = basis.iter().zip(&yb).map(|(&j, &v)| c[j] * v).sum();
        if best.is_none_or(|o| obj < o) {
            best = Some(obj);
        }
    });
    Ok(best)
}

/// Optimal objective of a small LP by basis enumeration.
pub fn lp_oracle(lp: &LpProblem) -> Result<f64> {
    let f = oracle_form(lp);
    let width = f.c.len();
    if width > LP_ORACLE_MAX_COLS {
        return Err(Error::InvalidParameter(format!(
            "oracle limited to {LP_ORACLE_MAX_COLS} standard-form columns, got {width}"
        )));
    }
    let best = best_vertex(&f.a, &f.b, &f.c)?.ok_or(Error::Infeasible)?;
    // A feasible LP is unbounded exactly when some ray d ≥ 0, A d = 0 has
    // cᵀd < 0; normalizing Σd = 1 turns the rays into a polytope whose
    // vertices are enumerated the same way.
    let mut ray_a = f.a.clone();
    ray_a.push(vec![1.0; width]);
    let mut ray_b = vec![0.0; f.a.len()];
    ray_b.push(1.0);
    let ray = match best_vertex(&ray_a, &ray_b, &f.c) {
        Ok(r) => r,
        Err(Error::Infeasible) => None,
        Err(e) => return Err(e),
    };
    if ray.is_some_and(|r| r < -1e-9) {
        return Err(Error::Unbounded);
    }
    Ok(best)
}
