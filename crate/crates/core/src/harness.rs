//! Timing runs, CSV records and the cubic time model.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::parse_spec;
use crate::generator::GeneratedLayout;
use crate::linalg::{lu_solve, Matrix};
use crate::model::{count_suboptimal, LayoutSpec, SolverOutput, Status};
use crate::solve::{lower, solve_lowered, SolveOptions, Strategy};

pub const DEFAULT_REPEATS: usize = 3;
pub const DEFAULT_TOLERANCE: f64 = 1e-3;
const WARMUP_SOLVES: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    /// The solver returned an error instead of a status.
    Error,
}

impl From<Status> for RecordStatus {
    fn from(s: Status) -> Self {
        match s {
            Status::Optimal => RecordStatus::Optimal,
            Status::Infeasible => RecordStatus::Infeasible,
            Status::Unbounded => RecordStatus::Unbounded,
            Status::IterationLimit => RecordStatus::IterationLimit,
        }
    }
}

/// One CSV row: a strategy on one layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub strategy: Strategy,
    pub constraints: usize,
    pub run: usize,
    pub time_ms: f64,
    pub suboptimal: usize,
    pub iterations: usize,
    pub status: RecordStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchCase {
    pub constraints: usize,
    pub run: usize,
    pub spec: LayoutSpec,
}

impl From<GeneratedLayout> for BenchCase {
    fn from(g: GeneratedLayout) -> Self {
        BenchCase {
            constraints: g.spec.constraints.len(),
            run: g.index,
            spec: g.spec,
        }
    }
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Solves every case with every strategy, one solve at a time, and records
/// the median wall time of `repeats` solves. Lowering happens outside the
/// timed region. Each strategy gets two untimed warm-up solves first.
pub fn run_bench(
    cases: &[BenchCase],
    strategies: &[Strategy],
    tol: f64,
    repeats: usize,
    opts: &SolveOptions,
) -> Result<Vec<BenchRecord>> {
    run_bench_with(cases, strategies, tol, repeats, opts, &mut |_| {})
}

/// [`run_bench`] that reports each record as soon as it is measured.
pub fn run_bench_with(
    cases: &[BenchCase],
    strategies: &[Strategy],
    tol: f64,
    repeats: usize,
    opts: &SolveOptions,
    progress: &mut dyn FnMut(&BenchRecord),
) -> Result<Vec<BenchRecord>> {
    if cases.is_empty() || strategies.is_empty() {
        return Err(Error::InvalidParameter("need at least one layout and one strategy".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    if repeats == 0 {
        return Err(Error::InvalidParameter("repeats must be at least 1".into()));
    }
    for &s in strategies {
        let lowered = lower(&cases[0].spec, s);
        for _ in 0..WARMUP_SOLVES {
            let _ = solve_lowered(&lowered, s, opts);
        }
    }
    let mut records = Vec::with_capacity(cases.len() * strategies.len());
    for case in cases {
        for &s in strategies {
            let lowered = lower(&case.spec, s);
            let mut times = Vec::with_capacity(repeats);
            let mut last: Option<Result<SolverOutput>> = None;
            for _ in 0..repeats {
                let start = Instant::now();
                let out = solve_lowered(&lowered, s, opts);
                times.push(start.elapsed().as_secs_f64() * 1e3);
                last = Some(out);
            }
            let (status, iterations, suboptimal) = match last.expect("repeats ≥ 1") {
                Ok(out) => (
                    out.status.into(),
                    out.iterations,
                    count_suboptimal(&case.spec, &out.x[..case.spec.var_count], tol),
                ),
                Err(_) => (RecordStatus::Error, 0, count_suboptimal(&case.spec, &vec![0.0; case.spec.var_count], tol)),
            };
            let record = BenchRecord {
                strategy: s,
                constraints: case.constraints,
                run: case.run,
                time_ms: median(&mut times),
                suboptimal,
                iterations,
                status,
            };
            progress(&record);
            records.push(record);
        }
    }
    Ok(records)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::from(io),
        kind => Error::Parse {
            line,
            message: format!("{kind:?}"),
        },
    }
}

pub fn write_csv<W: Write>(out: W, records: &[BenchRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        w.write_record(["strategy", "constraints", "run", "time_ms", "suboptimal", "iterations", "status"])
            .map_err(csv_error)?;
    }
    for r in records {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<BenchRecord>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(csv_error))
        .collect()
}

/// Parses every `*.spec` file of `dir`, sorted by file name. The run index
/// comes from an `_i{index}` file-name suffix when present.
pub fn read_spec_dir(dir: &Path) -> Result<Vec<(PathBuf, BenchCase)>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "spec"))
        .collect();
    paths.sort();
    let mut out = Vec::with_capacity(paths.len());
    for (ordinal, path) in paths.into_iter().enumerate() {
        let text = fs::read_to_string(&path)?;
        let spec = parse_spec(&text).map_err(|e| match e {
            Error::Parse { line, message } => Error::Parse {
                line,
                message: format!("{}: {message}", path.display()),
            },
            other => other,
        })?;
        let run = path
            .file_stem()
            .and_then(|s| s.to_str())
            .and_then(|s| s.rsplit_once("_i"))
            .and_then(|(_, i)| i.parse().ok())
            .unwrap_or(ordinal);
        let case = BenchCase {
            constraints: spec.constraints.len(),
            run,
            spec,
        };
        out.push((path, case));
    }
    Ok(out)
}

/// `T = β₀ + β₁c + β₂c² + β₃c³` fitted by least squares.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionFit {
    pub beta: [f64; 4],
    pub r_squared: f64,
}

impl RegressionFit {
    pub fn predict(&self, c: f64) -> f64 {
        self.beta.iter().rev().fold(0.0, |acc, b| acc * c + b)
    }
}

/// Least-squares cubic through `(c, T)` points via the normal equations of
/// the Vandermonde matrix with each power column divided by its largest
/// magnitude, followed by two rounds of iterative refinement.
pub fn fit_cubic(points: &[(f64, f64)]) -> Result<RegressionFit> {
    if points.len() < 5 {
        return Err(Error::Degenerate(format!("need at least 5 points, got {}", points.len())));
    }
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_by(|a, b| a.total_cmp(b));
    xs.dedup();
    if xs.len() < 4 {
        return Err(Error::Degenerate(format!("need at least 4 distinct sizes, got {}", xs.len())));
    }
    if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return Err(Error::InvalidParameter("points must be finite".into()));
    }
    let mut scale = [1.0; 4];
    for (k, s) in scale.iter_mut().enumerate().skip(1) {
        *s = points.iter().map(|p| p.0.powi(k as i32).abs()).fold(0.0, f64::max);
        if *s == 0.0 {
            *s = 1.0;
        }
    }
    let row = |c: f64| -> [f64; 4] { std::array::from_fn(|k| c.powi(k as i32) / scale[k]) };

    let mut normal = Matrix::zeros(4, 4);
    for p in points {
        let r = row(p.0);
        for i in 0..4 {
            for j in 0..4 {
                normal[(i, j)] += r[i] * r[j];
            }
        }
    }
    let residuals = |b: &[f64]| -> Vec<f64> {
        points
            .iter()
            .map(|p| {
                let r = row(p.0);
                p.1 - (0..4).map(|k| r[k] * b[k]).sum::<f64>()
            })
            .collect()
    };
    let project = |res: &[f64]| -> Vec<f64> {
        let mut v = vec![0.0; 4];
        for (p, e) in points.iter().zip(res) {
            let r = row(p.0);
            for k in 0..4 {
                v[k] += r[k] * e;
            }
        }
        v
    };
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let mut scaled = lu_solve(&normal, &project(&ys)).map_err(|_| Error::Degenerate("normal equations are singular".into()))?;
    for _ in 0..2 {
        let corr = lu_solve(&normal, &project(&residuals(&scaled)))?;
        for (b, d) in scaled.iter_mut().zip(&corr) {
            *b += d;
        }
    }

    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let ss_tot: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
    let ss_res: f64 = residuals(&scaled).iter().map(|e| e * e).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) };
    Ok(RegressionFit {
        beta: std::array::from_fn(|k| scaled[k] / scale[k]),
        r_squared,
    })
}

/// Fits the time model separately for each strategy present in `records`
/// (or only `only`), in the order ip, as, simplex.
pub fn fit_records(records: &[BenchRecord], only: Option<Strategy>) -> Vec<(Strategy, Result<RegressionFit>)> {
    Strategy::ALL
        .iter()
        .copied()
        .filter(|s| only.is_none_or(|o| o == *s))
        .filter(|s| records.iter().any(|r| r.strategy == *s))
        .map(|s| {
            let pts: Vec<(f64, f64)> = records
                .iter()
                .filter(|r| r.strategy == s)
                .map(|r| (r.constraints as f64, r.time_ms))
                .collect();
            (s, fit_cubic(&pts))
        })
        .collect()
}

/// Aligned text table with one row per fit.
pub fn format_fit_table(fits: &[(Strategy, Result<RegressionFit>)]) -> String {
    let mut out = format!(
        "{:<8} {:>14} {:>14} {:>14} {:>14} {:>8}\n",
        "strategy", "beta0", "beta1", "beta2", "beta3", "r2"
    );
    for (s, fit) in fits {
        match fit {
            Ok(f) => out.push_str(&format!(
                "{:<8} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e} {:>8.4}\n",
                s.name(),
                f.beta[0],
                f.beta[1],
                f.beta[2],
                f.beta[3],
                f.r_squared
            )),
            Err(e) => out.push_str(&format!("{:<8} {e}\n", s.name())),
        }
    }
    out
}

/// Median time per constraint count for one strategy, ascending in size.
pub fn median_times(records: &[BenchRecord], strategy: Strategy) -> Vec<(usize, f64)> {
    let mut sizes: Vec<usize> = records.iter().filter(|r| r.strategy == strategy).map(|r| r.constraints).collect();
    sizes.sort_unstable();
    sizes.dedup();
    sizes
        .into_iter()
        .map(|c| {
            let mut t: Vec<f64> = records
                .iter()
                .filter(|r| r.strategy == strategy && r.constraints == c)
                .map(|r| r.time_ms)
                .collect();
            (c, median(&mut t))
        })
        .collect()
}
