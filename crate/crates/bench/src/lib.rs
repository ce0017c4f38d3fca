//! Fixed layouts shared by the criterion benchmarks.

use uilayout_core::generator::{derive_seed, generate_layout};
use uilayout_core::LayoutSpec;

/// Seed of every benchmark layout, so runs compare like with like.
pub const BENCH_SEED: u64 = 7;

/// Constraint counts covered by the benchmarks.
pub const BENCH_SIZES: [usize; 4] = [40, 120, 240, 480];

/// One generated layout with `constraints` constraints (a multiple of 4).
pub fn layout(constraints: usize) -> LayoutSpec {
    assert!(constraints >= 4 && constraints.is_multiple_of(4), "constraint count must be a positive multiple of 4");
    generate_layout(constraints / 4, derive_seed(BENCH_SEED, constraints, 0))
}
