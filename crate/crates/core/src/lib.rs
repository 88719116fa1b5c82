//! Max-plus two-sided linear systems `A ⊗ x = B ⊗ x`: the alternating
//! method, the min-plus linear closure of the solution set, and a
//! sufficient test for that set being min-plus linear.

pub mod cli;
pub mod closure;
pub mod error;
pub mod io;
pub mod linearity;
pub mod matrix;
pub mod oracle;
pub mod semiring;
pub mod solver;

pub use error::{PipelineError, Result, Side, TropError};
pub use matrix::{TropMatrix, TropVector, TwoSidedSystem};
pub use semiring::{Approx, ExtScalar, Int, Number, Rational};
