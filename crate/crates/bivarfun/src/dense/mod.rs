//! Dense complex linear algebra in double precision: Schur decomposition,
//! triangular Sylvester solvers, and the norm estimates the error bounds
//! rely on.

pub mod matrix;
pub mod norms;
pub mod schur;
pub mod sylvester;

pub use matrix::{inverse, matmul, solve_lu, ComplexMatrix};
pub use norms::{cond_estimate, spectral_norm};
pub use schur::{reorder_schur, schur, GivensRotation, SchurForm, UNIT_ROUNDOFF};
pub use sylvester::{sylvester_bartels_stewart, sylvester_tri};
