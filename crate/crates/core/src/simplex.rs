//! Two-phase primal simplex on a dense tableau.
//!
//! Every pivot is a full Gauss-Jordan elimination of the entering column from
//! all rows of the tableau, cost row included. Pricing is Dantzig's most
//! negative reduced cost; after `2·(rows+cols)` degenerate pivots the solver
//! switches to Bland's rule for the rest of the solve, which rules out cycling.

use crate::error::{Error, Result};
use crate::linalg::{norm_inf, Matrix};
use crate::model::{SolverOutput, Status};
use crate::transform::LpProblem;

const COST_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const PHASE1_TOL: f64 = 1e-9;

/// Where a standard-form column comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnOrigin {
    /// `x_j` itself (nonnegative variable) or its positive part.
    Positive(usize),
    /// Negative part of a free variable, `x_j = x_j⁺ − x_j⁻`.
    Negative(usize),
    /// Slack of inequality row `i`.
    Slack(usize),
}

/// `min costᵀy  s.t.  a·y = b,  y ≥ 0,  b ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardForm {
    pub a: Matrix,
    pub b: Vec<f64>,
    pub cost: Vec<f64>,
    pub columns: Vec<ColumnOrigin>,
    pub n_original: usize,
}

impl StandardForm {
    /// Maps a standard-form point back to the original variables.
    pub fn recover(&self, y: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n_original];
        for (v, origin) in y.iter().zip(&self.columns) {
            match *origin {
                ColumnOrigin::Positive(j) => x[j] += v,
                ColumnOrigin::Negative(j) => x[j] -= v,
                ColumnOrigin::Slack(_) => {}
            }
        }
        x
    }
}

/// Equality rows first, then inequality rows with one slack column each.
/// Free variables are split and rows with a negative right-hand side negated.
pub fn to_standard_form(lp: &LpProblem) -> StandardForm {
    let mut columns = Vec::new();
    let mut var_cols: Vec<(usize, Option<usize>)> = Vec::with_capacity(lp.n);
    for j in 0..lp.n {
        let p = columns.len();
        columns.push(ColumnOrigin::Positive(j));
        if lp.nonneg[j] {
            var_cols.push((p, None));
        } else {
            columns.push(ColumnOrigin::Negative(j));
            var_cols.push((p, Some(p + 1)));
        }
    }
    let n_ineq = lp.c_ineq.rows();
    let first_slack = columns.len();
    columns.extend((0..n_ineq).map(ColumnOrigin::Slack));
    let rows = lp.a_eq.rows() + n_ineq;
    let cols = columns.len();

    let mut a = Matrix::zeros(rows, cols);
    let mut b = Vec::with_capacity(rows);
    let fill = |a: &mut Matrix, r: usize, src: &[f64]| {
        for (j, &v) in src.iter().enumerate() {
            if v != 0.0 {
                let (p, m) = var_cols[j];
                a[(r, p)] = v;
                if let Some(m) = m {
                    a[(r, m)] = -v;
                }
            }
        }
    };
    for i in 0..lp.a_eq.rows() {
        fill(&mut a, i, lp.a_eq.row(i));
        b.push(lp.b_eq[i]);
    }
    for i in 0..n_ineq {
        let r = lp.a_eq.rows() + i;
        fill(&mut a, r, lp.c_ineq.row(i));
        a[(r, first_slack + i)] = 1.0;
        b.push(lp.d_ineq[i]);
    }
    for (r, rhs) in b.iter_mut().enumerate() {
        if *rhs < 0.0 {
            *rhs = -*rhs;
            for v in a.row_mut(r) {
                *v = -*v;
            }
        }
    }
    let cost = columns
        .iter()
        .map(|o| match *o {
            ColumnOrigin::Positive(j) => lp.c[j],
            ColumnOrigin::Negative(j) => -lp.c[j],
            ColumnOrigin::Slack(_) => 0.0,
        })
        .collect();
    StandardForm {
        a,
        b,
        cost,
        columns,
        n_original: lp.n,
    }
}

/// Dense simplex tableau. The last column of `body` holds the right-hand
/// side; the last entry of `cost_row` holds `−z`.
#[derive(Debug, Clone)]
pub struct Tableau {
    body: Matrix,
    basis: Vec<usize>,
    cost_row: Vec<f64>,
    /// Columns at or beyond this index are artificial.
    n_structural: usize,
    degenerate_pivots: usize,
    bland: bool,
    pivots: usize,
    objective_trace: Vec<f64>,
}

enum Step {
    Optimal,
    Unbounded,
    Pivoted,
}

impl Tableau {
    /// Builds the phase-I tableau: rows that already own a unit column keep it
    /// as their basic column, every other row gets an artificial column.
    pub fn new(sf: &StandardForm) -> Tableau {
        let rows = sf.a.rows();
        let cols = sf.a.cols();
        let mut basis: Vec<Option<usize>> = vec![None; rows];
        for j in 0..cols {
            let mut hit = None;
            let mut unit = true;
            for i in 0..rows {
                let v = sf.a[(i, j)];
                if v != 0.0 {
                    if v == 1.0 && hit.is_none() {
                        hit = Some(i);
                    } else {
                        unit = false;
                        break;
                    }
                }
            }
            if let (true, Some(i)) = (unit, hit) {
                if basis[i].is_none() {
                    basis[i] = Some(j);
                }
            }
        }
        let n_art = basis.iter().filter(|b| b.is_none()).count();
        let width = cols + n_art + 1;
        let mut body = Matrix::zeros(rows, width);
        let mut next_art = cols;
        let mut final_basis = Vec::with_capacity(rows);
        for i in 0..rows {
            body.row_mut(i)[..cols].copy_from_slice(sf.a.row(i));
            body[(i, width - 1)] = sf.b[i];
            match basis[i] {
                Some(j) => final_basis.push(j),
                None => {
                    body[(i, next_art)] = 1.0;
                    final_basis.push(next_art);
                    next_art += 1;
                }
            }
        }
        let mut t = Tableau {
            body,
            basis: final_basis,
            cost_row: vec![0.0; width],
            n_structural: cols,
            degenerate_pivots: 0,
            bland: false,
            pivots: 0,
            objective_trace: Vec::new(),
        };
        let phase1_cost: Vec<f64> = (0..width - 1)
            .map(|j| if j >= cols { 1.0 } else { 0.0 })
            .collect();
        t.set_costs(&phase1_cost);
        t
    }

    pub fn rows(&self) -> usize {
        self.body.rows()
    }

    /// Columns excluding the right-hand side.
    pub fn cols(&self) -> usize {
        self.body.cols() - 1
    }

    pub fn basis(&self) -> &[usize] {
        &self.basis
    }

    pub fn artificial_count(&self) -> usize {
        self.cols() - self.n_structural
    }

    pub fn objective(&self) -> f64 {
        -self.cost_row[self.cols()]
    }

    pub fn pivots(&self) -> usize {
        self.pivots
    }

    pub fn objective_trace(&self) -> &[f64] {
        &self.objective_trace
    }

    pub fn rhs(&self, i: usize) -> f64 {
        self.body[(i, self.cols())]
    }

    /// Replaces the cost row by the reduced costs of `cost` for the current
    /// basis.
    pub fn set_costs(&mut self, cost: &[f64]) {
        let width = self.body.cols();
        debug_assert_eq!(cost.len(), width - 1);
        let mut row = vec![0.0; width];
        row[..width - 1].copy_from_slice(cost);
        for i in 0..self.rows() {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for (r, v) in row.iter_mut().zip(self.body.row(i)) {
                    *r -= cb * v;
                }
            }
        }
        self.cost_row = row;
        self.objective_trace.clear();
        self.objective_trace.push(self.objective());
    }

    /// Gauss-Jordan pivot on `(r, e)`.
    pub fn pivot(&mut self, r: usize, e: usize) {
        let width = self.body.cols();
        let p = self.body[(r, e)];
        for v in self.body.row_mut(r) {
            *v /= p;
        }
        self.body[(r, e)] = 1.0;
        let pivot_row = self.body.row(r).to_vec();
        for i in 0..self.rows() {
            if i == r {
                continue;
            }
            let row = self.body.row_mut(i);
            let f = row[e];
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            row[e] = 0.0;
            if row[width - 1] < 0.0 && row[width - 1] > -PIVOT_TOL {
                row[width - 1] = 0.0;
            }
        }
        let f = self.cost_row[e];
        for (v, pv) in self.cost_row.iter_mut().zip(&pivot_row) {
            *v -= f * pv;
        }
        self.cost_row[e] = 0.0;
        self.basis[r] = e;
        self.pivots += 1;
    }

    fn entering(&self, allowed: usize) -> Option<usize> {
        if self.bland {
            (0..allowed).find(|&j| self.cost_row[j] < -COST_TOL)
        } else {
            let mut best = None;
            let mut best_v = -COST_TOL;
            for j in 0..allowed {
                if self.cost_row[j] < best_v {
                    best_v = self.cost_row[j];
                    best = Some(j);
                }
            }
            best
        }
    }

    /// Minimum-ratio test. Ties go to the lowest row, or to the lowest basic
    /// column index while Bland's rule is active.
    fn leaving(&self, e: usize) -> Option<(usize, f64)> {
        let rhs_col = self.cols();
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.rows() {
            let a = self.body[(i, e)];
            if a <= PIVOT_TOL {
                continue;
            }
            let ratio = self.body[(i, rhs_col)].max(0.0) / a;
            match best {
                None => best = Some((i, ratio)),
                Some((bi, br)) => {
                    let tie = (ratio - br).abs() <= 1e-12 * (1.0 + br);
                    if tie {
                        if self.bland && self.basis[i] < self.basis[bi] {
                            best = Some((i, br.min(ratio)));
                        }
                    } else if ratio < br {
                        best = Some((i, ratio));
                    }
                }
            }
        }
        best
    }

    fn step(&mut self, allowed: usize) -> Step {
        let Some(e) = self.entering(allowed) else {
            return Step::Optimal;
        };
        let Some((r, ratio)) = self.leaving(e) else {
            return Step::Unbounded;
        };
        if ratio <= 1e-12 {
            self.degenerate_pivots += 1;
            if self.degenerate_pivots > 2 * (self.rows() + self.cols()) {
                self.bland = true;
            }
        }
        self.pivot(r, e);
        self.objective_trace.push(self.objective());
        Step::Pivoted
    }

    fn iterate(&mut self, allowed: usize, max_pivots: usize) -> Result<()> {
        loop {
            if self.pivots >= max_pivots {
                return Err(Error::IterationLimit);
            }
            match self.step(allowed) {
                Step::Optimal => return Ok(()),
                Step::Unbounded => return Err(Error::Unbounded),
                Step::Pivoted => {}
            }
        }
    }

    /// Drives the artificial cost to zero, then pivots basic artificials out
    /// (dropping rows that turn out redundant) and deletes artificial columns.
    pub fn phase1(&mut self, max_pivots: usize) -> Result<()> {
        if self.artificial_count() > 0 {
            match self.iterate(self.cols(), max_pivots) {
                Ok(()) => {}
                // The phase-I objective is bounded below by zero, so this is
                // numerical breakdown.
                Err(Error::Unbounded) => {
                    return Err(Error::Degenerate("phase I reported an unbounded ray".into()))
                }
                Err(e) => return Err(e),
            }
            let scale = 1.0 + norm_inf(&self.body_rhs());
            if self.objective() > PHASE1_TOL * scale {
                return Err(Error::Infeasible);
            }
        }
        let mut redundant = Vec::new();
        for r in 0..self.rows() {
            if self.basis[r] < self.n_structural {
                continue;
            }
            let row = self.body.row(r);
            let (j, mag) = (0..self.n_structural)
                .map(|j| (j, row[j].abs()))
                .fold((0, 0.0), |acc, c| if c.1 > acc.1 { c } else { acc });
            if mag > PIVOT_TOL {
                self.pivot(r, j);
            } else {
                redundant.push(r);
            }
        }
        self.drop_artificials(&redundant);
        self.degenerate_pivots = 0;
        self.bland = false;
        Ok(())
    }

    fn body_rhs(&self) -> Vec<f64> {
        (0..self.rows()).map(|i| self.rhs(i)).collect()
    }

    fn drop_artificials(&mut self, redundant: &[usize]) {
        let keep_cols = self.n_structural;
        let old_width = self.body.cols();
        if keep_cols + 1 == old_width && redundant.is_empty() {
            return;
        }
        let mut body = Matrix::zeros(0, keep_cols + 1);
        let mut basis = Vec::new();
        let mut row = vec![0.0; keep_cols + 1];
        for i in 0..self.rows() {
            if redundant.contains(&i) {
                continue;
            }
            let src = self.body.row(i);
            row[..keep_cols].copy_from_slice(&src[..keep_cols]);
            row[keep_cols] = src[old_width - 1];
            body.push_row(&row).expect("row width matches");
            basis.push(self.basis[i]);
        }
        let mut cost_row = self.cost_row[..keep_cols].to_vec();
        cost_row.push(self.cost_row[old_width - 1]);
        self.body = body;
        self.basis = basis;
        self.cost_row = cost_row;
    }

    /// Phase II for the given standard-form costs. Call after [`phase1`].
    pub fn phase2(&mut self, cost: &[f64], max_pivots: usize) -> Result<()> {
        debug_assert_eq!(self.artificial_count(), 0);
        self.set_costs(cost);
        self.iterate(self.cols(), max_pivots)
    }

    /// Current basic solution over the structural columns.
    pub fn basic_solution(&self) -> Vec<f64> {
        let mut y = vec![0.0; self.n_structural];
        for (i, &j) in self.basis.iter().enumerate() {
            if j < self.n_structural {
                y[j] = self.rhs(i).max(0.0);
            }
        }
        y
    }

    /// Basic columns are unit columns and the right-hand side is nonnegative.
    pub fn check_invariants(&self) -> bool {
        let rhs_ok = (0..self.rows()).all(|i| self.rhs(i) >= -1e-9);
        let unit_ok = self.basis.iter().enumerate().all(|(r, &j)| {
            (0..self.rows()).all(|i| {
                let want = if i == r { 1.0 } else { 0.0 };
                (self.body[(i, j)] - want).abs() <= 1e-9
            }) && self.cost_row[j].abs() <= 1e-9
        });
        rhs_ok && unit_ok
    }
}

pub fn default_max_pivots(lp: &LpProblem) -> usize {
    let rows = lp.a_eq.rows() + lp.c_ineq.rows();
    let cols = 2 * lp.n + lp.c_ineq.rows();
    (50 * (rows + cols)).max(1000)
}

/// Solves `lp` with the two-phase simplex method. Infeasible, unbounded and
/// iteration-limited solves are reported through [`SolverOutput::status`].
pub fn solve_lp(lp: &LpProblem, max_pivots: usize) -> SolverOutput {
    let sf = to_standard_form(lp);
    let mut t = Tableau::new(&sf);
    let status = match t.phase1(max_pivots).and_then(|_| t.phase2(&sf.cost, max_pivots)) {
        Ok(()) => Status::Optimal,
        Err(Error::Infeasible) => Status::Infeasible,
        Err(Error::Unbounded) => Status::Unbounded,
        Err(_) => Status::IterationLimit,
    };
    if status == Status::Infeasible {
        return SolverOutput::failed(lp.n, status, t.pivots());
    }
    let x = sf.recover(&t.basic_solution());
    SolverOutput {
        objective: if status == Status::Optimal {
            lp.objective(&x)
        } else {
            f64::NAN
        },
        x,
        status,
        iterations: t.pivots(),
    }
}

/// A basic feasible point of `{A_eq x = b_eq, C x ≤ d}` over free variables,
/// found by phase I alone.
pub fn feasible_point(a_eq: &Matrix, b_eq: &[f64], c_ineq: &Matrix, d_ineq: &[f64]) -> Result<Vec<f64>> {
    let n = a_eq.cols();
    let lp = LpProblem::new(
        vec![0.0; n],
        a_eq.clone(),
        b_eq.to_vec(),
        c_ineq.clone(),
        d_ineq.to_vec(),
        vec![false; n],
    )?;
    let sf = to_standard_form(&lp);
    let mut t = Tableau::new(&sf);
    t.phase1(default_max_pivots(&lp))?;
    Ok(sf.recover(&t.basic_solution()))
}
