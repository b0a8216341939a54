//! Bivariate matrix functions f{A, B^T}(C) for dense square complex matrices.
//!
//! The evaluator Schur-reduces both coefficient matrices, splits their spectra
//! into well-separated clusters, block-diagonalizes recursively through
//! triangular Sylvester equations, and evaluates the atomic diagonal blocks
//! either with a truncated bivariate Taylor expansion or by randomized
//! perturbation and diagonalization in adaptive multiprecision arithmetic.

pub mod atom;
pub mod blocking;
pub mod dense;
pub mod engine;
pub mod error;
pub mod funcs;
pub mod mp;

pub use dense::ComplexMatrix;
pub use engine::{
    corollary_2x2, eig_dense, fun2_diag, fun2_diag_a, fun2_diag_b, fun2m, fun2m_rec,
    AtomMethod, EvalOptions, EvalReport,
};
pub use error::{Error, Result};
pub use funcs::{builtin_function, BivariateFunction};
