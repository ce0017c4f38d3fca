//! Constraint-based UI layout solving.
//!
//! A [`LayoutSpec`] holds tab-stop variables and hard or soft linear
//! constraints. It is lowered either to a quadratic program (squared slack
//! penalties) solved by the barrier interior point method or the active set
//! method, or to a linear program (absolute slack penalties) solved by the
//! two-phase simplex method. [`generator`] builds random layouts and
//! [`harness`] times the strategies against each other.
//!
//! ```
//! use uilayout_core::{parse_spec, solve_layout, SolveOptions, Strategy};
//!
//! let spec = parse_spec("vars 1\nc S:1 x0*1 EQ 120\nc H x0*1 LE 100\n").unwrap();
//! let sol = solve_layout(&spec, Strategy::ActiveSet, &SolveOptions::default()).unwrap();
//! assert!((sol.x[0] - 100.0).abs() < 1e-9);
//! ```

pub mod active_set;
pub mod error;
pub mod format;
pub mod generator;
pub mod harness;
pub mod interior_point;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod simplex;
pub mod solve;
pub mod transform;

pub use error::{Error, Result};
pub use format::{parse_spec, serialize_spec};
pub use generator::{generate_layout, generate_suite, GenConfig, GeneratedLayout};
pub use harness::{fit_cubic, run_bench, BenchCase, BenchRecord, RecordStatus, RegressionFit};
pub use interior_point::BarrierParams;
pub use model::{count_suboptimal, Constraint, LayoutSpec, Priority, Relation, Solution, SolverOutput, Status};
pub use solve::{lower, solve_layout, solve_lowered, Lowered, SolveOptions, Strategy};
pub use transform::{to_lp, to_qp, LpProblem, QpProblem};
