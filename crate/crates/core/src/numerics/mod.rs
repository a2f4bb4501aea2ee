//! Dense linear algebra and linear programming used by the solvers.

mod lfp;
mod lu;
mod matrix;
mod simplex;

pub use lfp::LinearFractionalProgram;
pub use lu::{lu_solve, LuFactors, SINGULAR_RTOL};
pub use matrix::{kron_vec, Matrix};
pub use simplex::{simplex_lp, LinearProgram, LpSolution, Sense};
