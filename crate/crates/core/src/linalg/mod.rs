//! Small dense linear algebra: a partial-pivot solver, a two-phase simplex
//! with Bland's rule, and exhaustive vertex enumeration for tiny programs.
//!
//! Everything here is sized for the oracle's subproblems (a handful of
//! variables), so tableaus are dense `Vec<f64>` and nothing is cached.

mod dense;
mod program;
mod simplex;
mod vertex;

pub use dense::{solve_linear_system, LinearSystem, MAX_SYSTEM_DIM};
pub use program::{LinearProgram, LpSolution, SolverTolerances};
pub use simplex::{lp_maximize, lp_maximize_with};
pub use vertex::{vertex_enumerate, VERTEX_MAX_CONSTRAINTS, VERTEX_MAX_VARS};

/// Default pivot magnitude below which a column is treated as zero.
pub const PIVOT_TOL: f64 = 1e-10;

/// Default slack allowed on constraint satisfaction.
pub const FEAS_TOL: f64 = 1e-9;
