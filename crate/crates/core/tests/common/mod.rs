//! Random problem instances shared by the integration tests.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use uilayout_core::linalg::Matrix;
use uilayout_core::{LpProblem, QpProblem};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_rows(rng: &mut ChaCha8Rng, rows: usize, n: usize) -> Vec<Vec<f64>> {
    (0..rows).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect()
}

/// A strictly convex QP with `n` variables, up to `max_eq` equality rows and
/// `m` inequality rows. The rows are built around a random point so the
/// feasible region has an interior.
pub fn random_qp(rng: &mut ChaCha8Rng, n: usize, max_eq: usize, m: usize) -> QpProblem {
    let factor = random_rows(rng, n, n);
    let mut q = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let v: f64 = (0..n).map(|k| factor[k][i] * factor[k][j]).sum();
            q.row_mut(i)[j] = 2.0 * v + if i == j { 0.5 } else { 0.0 };
        }
    }
    let g: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
    let center: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let eq_count = rng.gen_range(0..=max_eq.min(n.saturating_sub(1)));
    let eq = random_rows(rng, eq_count, n);
    let b: Vec<f64> = eq.iter().map(|r| dot(r, &center)).collect();
    let le = random_rows(rng, m, n);
    let d: Vec<f64> = le.iter().map(|r| dot(r, &center) + rng.gen_range(0.05..1.0)).collect();
    QpProblem::new(
        q,
        g,
        Matrix::from_rows(n, &eq).unwrap(),
        b,
        Matrix::from_rows(n, &le).unwrap(),
        d,
    )
    .unwrap()
}

/// A small LP with integer data at most 9 standard-form columns wide.
/// Roughly a third are feasible by construction; the rest may turn out
/// infeasible or unbounded.
pub fn random_lp(rng: &mut ChaCha8Rng) -> LpProblem {
    let n = rng.gen_range(1..=3);
    let eq_count = rng.gen_range(0..=1);
    let le_count = rng.gen_range(1..=3);
    let nonneg: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.75)).collect();
    let mut int_rows = |rows: usize| -> Vec<Vec<f64>> {
        (0..rows).map(|_| (0..n).map(|_| rng.gen_range(-3..=3) as f64).collect()).collect()
    };
    let eq = int_rows(eq_count);
    let le = int_rows(le_count);
    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-3..=3) as f64).collect();
    let (b, d) = if rng.gen_bool(1.0 / 3.0) {
        let p: Vec<f64> = (0..n).map(|_| rng.gen_range(0..=3) as f64).collect();
        let b: Vec<f64> = eq.iter().map(|r| dot(r, &p)).collect();
        let d: Vec<f64> = le.iter().map(|r| dot(r, &p) + rng.gen_range(0..=2) as f64).collect();
        (b, d)
    } else {
        let b: Vec<f64> = (0..eq_count).map(|_| rng.gen_range(-4..=6) as f64).collect();
        let d: Vec<f64> = (0..le_count).map(|_| rng.gen_range(-4..=6) as f64).collect();
        (b, d)
    };
    LpProblem::new(
        c,
        Matrix::from_rows(n, &eq).unwrap(),
        b,
        Matrix::from_rows(n, &le).unwrap(),
        d,
        nonneg,
    )
    .unwrap()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
