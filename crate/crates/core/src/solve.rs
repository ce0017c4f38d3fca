//! One entry point over the three strategies.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::active_set::{default_max_iter, solve_qp_as};
use crate::error::{Error, Result};
use crate::interior_point::{solve_qp_ip, BarrierParams};
use crate::model::{LayoutSpec, Solution, SolverOutput};
use crate::simplex::{default_max_pivots, solve_lp};
use crate::transform::{to_lp, to_qp, LpProblem, QpProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "ip")]
    InteriorPoint,
    #[serde(rename = "as")]
    ActiveSet,
    #[serde(rename = "simplex")]
    Simplex,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::InteriorPoint, Strategy::ActiveSet, Strategy::Simplex];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::InteriorPoint => "ip",
            Strategy::ActiveSet => "as",
            Strategy::Simplex => "simplex",
        }
    }

    /// Whether the strategy solves the quadratic lowering.
    pub fn is_quadratic(self) -> bool {
        !matches!(self, Strategy::Simplex)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ip" => Ok(Strategy::InteriorPoint),
            "as" => Ok(Strategy::ActiveSet),
            "simplex" => Ok(Strategy::Simplex),
            other => Err(Error::InvalidParameter(format!(
                "unknown strategy `{other}` (expected ip, as or simplex)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveOptions {
    pub barrier: BarrierParams,
    /// Iteration cap for the active set method and pivot cap for simplex;
    /// `None` picks a size-dependent default.
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Lowered {
    Qp(QpProblem),
    Lp(LpProblem),
}

pub fn lower(spec: &LayoutSpec, strategy: Strategy) -> Lowered {
    if strategy.is_quadratic() {
        Lowered::Qp(to_qp(spec))
    } else {
        Lowered::Lp(to_lp(spec))
    }
}

pub fn solve_lowered(problem: &Lowered, strategy: Strategy, opts: &SolveOptions) -> Result<SolverOutput> {
    match (problem, strategy) {
        (Lowered::Qp(qp), Strategy::InteriorPoint) => solve_qp_ip(qp, &opts.barrier),
        (Lowered::Qp(qp), Strategy::ActiveSet) => solve_qp_as(qp, opts.max_iter.unwrap_or_else(|| default_max_iter(qp))),
        (Lowered::Lp(lp), Strategy::Simplex) => Ok(solve_lp(lp, opts.max_iter.unwrap_or_else(|| default_max_pivots(lp)))),
        _ => Err(Error::InvalidParameter(format!("strategy {strategy} does not match the lowered problem"))),
    }
}

pub fn solve_layout(spec: &LayoutSpec, strategy: Strategy, opts: &SolveOptions) -> Result<Solution> {
    spec.validate()?;
    let out = solve_lowered(&lower(spec, strategy), strategy, opts)?;
    Ok(Solution::from_output(spec, out))
}
