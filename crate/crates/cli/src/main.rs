//! `uilayout`: generate, solve, benchmark and fit constraint layouts.
//!
//! Exit status is 0 on success, 1 when a solve ends without an optimum
//! (infeasible, unbounded or out of iterations) and 2 on usage or input
//! errors.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use uilayout_core::generator::{write_suite, DEFAULT_WINDOW};
use uilayout_core::harness::{
    fit_records, format_fit_table, read_csv, read_spec_dir, run_bench, write_csv, DEFAULT_REPEATS, DEFAULT_TOLERANCE,
};
use uilayout_core::{
    generate_suite, parse_spec, solve_layout, BarrierParams, BenchCase, GenConfig, Priority, SolveOptions, Status,
    Strategy,
};

#[derive(Debug, Parser)]
#[command(name = "uilayout", version, about = "Constraint-based UI layout solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a suite of random layouts as spec files.
    Generate {
        #[command(flatten)]
        suite: SuiteArgs,
        /// Output directory, created if missing.
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve one spec file and print the solution.
    Solve {
        #[arg(long, default_value = "ip")]
        strategy: Strategy,
        /// Error threshold for counting sub-optimal constraints.
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
        /// Barrier weight multiplier (interior point only).
        #[arg(long)]
        mu: Option<f64>,
        /// Duality-gap target (interior point only).
        #[arg(long)]
        eps: Option<f64>,
        file: PathBuf,
    },
    /// Time strategies on generated or stored layouts and write a CSV.
    Bench {
        /// Comma-separated strategy names.
        #[arg(long, value_delimiter = ',', default_value = "ip,as,simplex")]
        strategies: Vec<Strategy>,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_REPEATS)]
        repeats: usize,
        #[arg(long)]
        out: PathBuf,
        /// Read layouts from this directory instead of generating them.
        #[arg(long, conflicts_with_all = ["min", "max", "step", "per_size", "seed", "width", "height"])]
        specs: Option<PathBuf>,
        #[command(flatten)]
        suite: SuiteArgs,
    },
    /// Fit cubic time models to a benchmark CSV.
    Fit {
        csv: PathBuf,
        /// Only fit this strategy.
        #[arg(long)]
        strategy: Option<Strategy>,
    },
}

#[derive(Debug, Args)]
struct SuiteArgs {
    /// Smallest constraint count (multiple of 4).
    #[arg(long, default_value_t = GenConfig::default().min_size)]
    min: usize,
    /// Largest constraint count.
    #[arg(long, default_value_t = GenConfig::default().max_size)]
    max: usize,
    #[arg(long, default_value_t = GenConfig::default().step)]
    step: usize,
    /// Layouts per constraint count.
    #[arg(long, default_value_t = GenConfig::default().per_size)]
    per_size: usize,
    #[arg(long, default_value_t = GenConfig::default().seed)]
    seed: u64,
    /// Window width in pixels.
    #[arg(long, default_value_t = DEFAULT_WINDOW.0)]
    width: u32,
    /// Window height in pixels.
    #[arg(long, default_value_t = DEFAULT_WINDOW.1)]
    height: u32,
}

impl SuiteArgs {
    fn config(&self) -> GenConfig {
        GenConfig {
            min_size: self.min,
            max_size: self.max,
            step: self.step,
            per_size: self.per_size,
            seed: self.seed,
            window: (self.width, self.height),
        }
    }
}

/// How a command ended when it did not fail outright.
enum Outcome {
    Done,
    NotOptimal,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::NotOptimal) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<Outcome> {
    match command {
        Command::Generate { suite, out } => {
            let cfg = suite.config();
            let paths = write_suite(&cfg, &out)?;
            eprintln!("wrote {} layouts to {}", paths.len(), out.display());
            Ok(Outcome::Done)
        }
        Command::Solve { strategy, tol, mu, eps, file } => solve(&file, strategy, tol, mu, eps),
        Command::Bench { strategies, tol, repeats, out, specs, suite } => {
            let cases: Vec<BenchCase> = match specs {
                Some(dir) => {
                    if !dir.is_dir() {
                        bail!("{} is not a directory", dir.display());
                    }
                    read_spec_dir(&dir)?.into_iter().map(|(_, c)| c).collect()
                }
                None => generate_suite(&suite.config())?.into_iter().map(Into::into).collect(),
            };
            let records = run_bench(&cases, &strategies, tol, repeats, &SolveOptions::default())?;
            let file = fs::File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            write_csv(io::BufWriter::new(file), &records)?;
            eprintln!("wrote {} records to {}", records.len(), out.display());
            Ok(Outcome::Done)
        }
        Command::Fit { csv, strategy } => {
            let file = fs::File::open(&csv).with_context(|| format!("opening {}", csv.display()))?;
            let records = read_csv(file)?;
            let fits = fit_records(&records, strategy);
            if fits.is_empty() {
                bail!("{} has no records to fit", csv.display());
            }
            print!("{}", format_fit_table(&fits));
            Ok(Outcome::Done)
        }
    }
}

fn solve(path: &Path, strategy: Strategy, tol: f64, mu: Option<f64>, eps: Option<f64>) -> Result<Outcome> {
    if !(tol > 0.0) {
        bail!("tolerance {tol} must be positive");
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let spec = parse_spec(&text).with_context(|| format!("parsing {}", path.display()))?;
    let mut opts = SolveOptions::default();
    let defaults = BarrierParams::default();
    opts.barrier.mu = mu.unwrap_or(defaults.mu);
    opts.barrier.eps = eps.unwrap_or(defaults.eps);
    let sol = solve_layout(&spec, strategy, &opts)?;

    let stdout = io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "strategy: {strategy}")?;
    writeln!(out, "status: {}", sol.status)?;
    writeln!(out, "iterations: {}", sol.iterations)?;
    if sol.status != Status::Optimal {
        return Ok(Outcome::NotOptimal);
    }
    writeln!(out, "objective: {:.6}", sol.objective)?;
    writeln!(out, "solution:")?;
    for (name, v) in spec.var_names.iter().zip(&sol.x) {
        writeln!(out, "  {name} = {v:.6}")?;
    }
    writeln!(out, "errors:")?;
    for (i, (c, e)) in spec.constraints.iter().zip(&sol.errors).enumerate() {
        let kind = match c.priority {
            Priority::Hard => "hard".to_string(),
            Priority::Soft(p) => format!("soft:{p}"),
        };
        writeln!(out, "  c{i} {kind} {e:.6}")?;
    }
    writeln!(out, "suboptimal: {} (tol {tol})", sol.suboptimal(tol))?;
    Ok(Outcome::Done)
}
