//! Dense matrices and the direct linear solves used by every solver.
//!
//! Storage is dense and row-major. The factorization skips structurally zero
//! multipliers and only touches the nonzero entries of each pivot row, so the
//! sparse systems produced by layout problems factor in far less than the
//! worst-case cubic time without a dedicated sparse data structure.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Pivots whose magnitude falls below this value are treated as zero.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Matrix::zeros(diag.len(), diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds a matrix from row-major data, checking that the shape matches.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from a list of rows. An empty list yields a `0 x cols`
    /// matrix, so the column count has to be given explicitly.
    pub fn from_rows(cols: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::Dimension(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn push_row(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.cols {
            return Err(Error::Dimension(format!(
                "pushed row has {} entries, expected {}",
                row.len(),
                self.cols
            )));
        }
        self.data.extend_from_slice(row);
        self.rows += 1;
        Ok(())
    }

    /// Selects a subset of rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `selfᵀ · y`.
    pub fn tr_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &yi) in y.iter().enumerate() {
            if yi != 0.0 {
                axpy(yi, self.row(i), &mut out);
            }
        }
        out
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a != 0.0 {
                    axpy(a, other.row(k), out.row_mut(i));
                }
            }
        }
        Ok(out)
    }

    /// Symmetry test with tolerance `1e-12 · max(1, |m_ij|)`.
    pub fn is_symmetric(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let a = self[(i, j)];
                let b = self[(j, i)];
                if (a - b).abs() > 1e-12 * a.abs().max(1.0) {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Nonzero pattern of every row, for kernels that loop over rows many times.
    pub fn sparse_rows(&self) -> Vec<SparseRow> {
        (0..self.rows).map(|i| SparseRow::from_dense(self.row(i))).collect()
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// The nonzero entries of one matrix row.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseRow {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseRow {
    pub fn from_dense(row: &[f64]) -> Self {
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for (j, &v) in row.iter().enumerate() {
            if v != 0.0 {
                indices.push(j);
                values.push(v);
            }
        }
        SparseRow { indices, values }
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        self.indices
            .iter()
            .zip(&self.values)
            .map(|(&j, &v)| v * x[j])
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `y += alpha · x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// LU factorization with partial pivoting, `P·A = L·U`.
///
/// The elimination runs on a dense row-major buffer whose rows stay in
/// place; step `k` takes its pivot from the remaining row with the largest
/// magnitude in column `k`. Each column keeps the list of rows holding a
/// nonzero in it, so the pivot search and the elimination only visit those
/// rows, and the factors are kept as index lists so the triangular solves
/// cost one pass over their nonzeros. On the sparse systems the solvers
/// build this avoids touching the whole buffer.
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    /// Row that supplied the pivot of column `k`.
    pivot_rows: Vec<usize>,
    /// Multipliers of step `k`: (row, factor).
    lower: Vec<Vec<(usize, f64)>>,
    /// Pivot value and the entries right of it, per step.
    upper: Vec<(f64, Vec<(usize, f64)>)>,
}

impl LuFactors {
    pub fn new(a: &Matrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension(format!(
                "LU needs a square matrix, got {}x{}",
                a.rows, a.cols
            )));
        }
        Self::factor_owned(a.rows, a.data.clone())
    }

    /// Factors a row-major `n x n` buffer in place.
    pub fn factor_owned(n: usize, lu: Vec<f64>) -> Result<Self> {
        debug_assert_eq!(lu.len(), n * n);
        let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, row) in lu.chunks_exact(n).enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    col_rows[j].push(i);
                }
            }
        }
        Self::factor_pattern(n, lu, col_rows)
    }

    /// [`factor_owned`](Self::factor_owned) with the rows of each column's
    /// nonzeros already known (duplicates and extra rows are harmless).
    fn factor_pattern(n: usize, mut lu: Vec<f64>, mut col_rows: Vec<Vec<usize>>) -> Result<Self> {
        let mut done = vec![false; n];
        let mut pivot_rows = Vec::with_capacity(n);
        let mut lower = Vec::with_capacity(n);
        let mut upper = Vec::with_capacity(n);

        for k in 0..n {
            let mut rows = std::mem::take(&mut col_rows[k]);
            rows.retain(|&i| !done[i]);
            // Cancellation can list a row twice.
            rows.sort_unstable();
            rows.dedup();
            let mut p = usize::MAX;
            let mut best = 0.0;
            for &i in &rows {
                let v = lu[i * n + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best >= PIVOT_TOLERANCE) {
                return Err(Error::Singular);
            }
            done[p] = true;
            pivot_rows.push(p);
            let pivot = lu[p * n + k];
            // Entries of the pivot row left of k are zero or multipliers of
            // earlier steps; only the part right of k belongs to U.
            let mut u_row: Vec<(usize, f64)> = Vec::new();
            let row_p = &lu[p * n..(p + 1) * n];
            for (j, &v) in row_p.iter().enumerate().skip(k + 1) {
                if v != 0.0 {
                    u_row.push((j, v));
                }
            }
            let mut l_col = Vec::new();
            for &i in &rows {
                if i == p {
                    continue;
                }
                let row = &mut lu[i * n..(i + 1) * n];
                if row[k] == 0.0 {
                    continue;
                }
                let f = row[k] / pivot;
                row[k] = 0.0;
                l_col.push((i, f));
                for &(j, u) in &u_row {
                    if row[j] == 0.0 {
                        col_rows[j].push(i);
                    }
                    row[j] -= f * u;
                }
            }
            lower.push(l_col);
            upper.push((pivot, u_row));
        }
        Ok(LuFactors {
            n,
            pivot_rows,
            lower,
            upper,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::Dimension(format!(
                "right-hand side has length {}, expected {n}",
                b.len()
            )));
        }
        // Forward: replay the row operations on b, indexed by physical row.
        let mut w = b.to_vec();
        let mut y = vec![0.0; n];
        for k in 0..n {
            let yk = w[self.pivot_rows[k]];
            y[k] = yk;
            if yk != 0.0 {
                for &(i, f) in &self.lower[k] {
                    w[i] -= f * yk;
                }
            }
        }
        // Backward over U, whose rows are indexed by step = column.
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let (d, ref row) = self.upper[k];
            let mut s = y[k];
            for &(j, u) in row {
                s -= u * x[j];
            }
            x[k] = s / d;
        }
        if x.iter().all(|v| v.is_finite()) {
            Ok(x)
        } else {
            Err(Error::Singular)
        }
    }
}

/// Solves `A x = b` for square `A` by LU with partial pivoting.
pub fn lu_solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.rows {
        return Err(Error::Dimension(format!(
            "right-hand side has length {}, expected {}",
            b.len(),
            a.rows
        )));
    }
    LuFactors::new(a)?.solve(b)
}

/// Solves the bordered system
///
/// ```text
/// [ Q  Aᵀ ] [x]   [r1]
/// [ A  0  ] [λ] = [r2]
/// ```
///
/// and returns `(x, λ)`.
pub fn solve_kkt(q: &Matrix, a: &Matrix, r1: &[f64], r2: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = q.rows;
    let m = a.rows;
    if !q.is_square() || a.cols != n || r1.len() != n || r2.len() != m {
        return Err(Error::Dimension(format!(
            "KKT blocks Q {}x{}, A {}x{}, r1 {}, r2 {}",
            q.rows,
            q.cols,
            a.rows,
            a.cols,
            r1.len(),
            r2.len()
        )));
    }
    let mut entries = Vec::new();
    for i in 0..n {
        entries.extend(q.row(i).iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, &v)| (i, j, v)));
    }
    solve_kkt_entries(n, &entries, &a.sparse_rows(), r1, r2)
}

/// [`solve_kkt`] with `Q` given as `(row, col, value)` triplets (repeated
/// positions add up) and `A` as sparse rows. The bordered matrix is still
/// assembled densely before factoring.
pub fn solve_kkt_entries(
    n: usize,
    q: &[(usize, usize, f64)],
    a: &[SparseRow],
    r1: &[f64],
    r2: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = a.len();
    if r1.len() != n || r2.len() != m || q.iter().any(|&(i, j, _)| i >= n || j >= n) {
        return Err(Error::Dimension(format!("KKT blocks for n = {n}, m = {m} do not match")));
    }
    if m > n {
        return Err(Error::Singular);
    }
    let dim = n + m;
    let mut entries: Vec<(usize, usize, f64)> = q.to_vec();
    for (r, row) in a.iter().enumerate() {
        for (j, v) in row.iter() {
            if j >= n {
                return Err(Error::Dimension(format!("constraint column {j} out of range")));
            }
            entries.push((n + r, j, v));
            entries.push((j, n + r, v));
        }
    }
    // Eliminate sparse rows first: a variable coupled to many others (such as
    // a window edge bounding every widget) would otherwise fill the trailing
    // matrix as soon as it is eliminated. The permutation is symmetric and the
    // factorization is still plain partial-pivoting LU.
    let mut degree = vec![0usize; dim];
    for &(i, _, _) in &entries {
        degree[i] += 1;
    }
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by_key(|&i| degree[i]);
    let mut pos = vec![0; dim];
    for (pi, &i) in order.iter().enumerate() {
        pos[i] = pi;
    }
    let mut kp = vec![0.0; dim * dim];
    let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); dim];
    for &(i, j, v) in &entries {
        kp[pos[i] * dim + pos[j]] += v;
        col_rows[pos[j]].push(pos[i]);
    }
    drop(entries);
    let rhs_p: Vec<f64> = order.iter().map(|&i| if i < n { r1[i] } else { r2[i - n] }).collect();
    let sol_p = LuFactors::factor_pattern(dim, kp, col_rows)?.solve(&rhs_p)?;
    let mut x = vec![0.0; n];
    let mut lambda = vec![0.0; m];
    for (pi, &i) in order.iter().enumerate() {
        if i < n {
            x[i] = sol_p[pi];
        } else {
            lambda[i - n] = sol_p[pi];
        }
    }
    Ok((x, lambda))
}

/// Picks a maximal linearly independent subset of the rows of `[A | b]`,
/// keeping the earliest rows. A dependent row whose right-hand side is not
/// reproduced by the same combination makes the system inconsistent, which
/// is reported as [`Error::Infeasible`].
pub fn independent_rows(a: &Matrix, b: &[f64]) -> Result<Vec<usize>> {
    debug_assert_eq!(a.rows, b.len());
    let n = a.cols;
    // Reduced copies of the accepted rows, normalized so the pivot entry is 1.
    let mut basis: Vec<(usize, Vec<f64>, f64)> = Vec::new();
    let mut keep = Vec::new();
    for i in 0..a.rows {
        let mut v = a.row(i).to_vec();
        let mut beta = b[i];
        let scale = norm_inf(&v).max(1.0);
        for (p, row, rb) in &basis {
            let f = v[*p];
            if f != 0.0 {
                axpy(-f, row, &mut v);
                v[*p] = 0.0;
                beta -= f * rb;
            }
        }
        let (piv, mag) = v
            .iter()
            .enumerate()
            .fold((0, 0.0_f64), |(bj, bm), (j, x)| if x.abs() > bm { (j, x.abs()) } else { (bj, bm) });
        if mag <= 1e-9 * scale {
            if beta.abs() > 1e-9 * scale.max(b[i].abs()) {
                return Err(Error::Infeasible);
            }
            continue;
        }
        let inv = 1.0 / v[piv];
        for x in v.iter_mut() {
            *x *= inv;
        }
        v[piv] = 1.0;
        basis.push((piv, v, beta * inv));
        keep.push(i);
        debug_assert!(basis.len() <= n);
    }
    Ok(keep)
}
