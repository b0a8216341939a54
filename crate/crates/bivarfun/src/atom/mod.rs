//! Atomic-block evaluators: the truncated bivariate Taylor scheme, the
//! randomized perturb-and-diagonalize scheme in adaptive multiprecision,
//! and the closed form for real 2×2 rotation blocks.

mod diag;
mod real2x2;
mod taylor;

pub(crate) use diag::fun2_atom_diag_with;
pub use diag::{fun2_atom_diag, greedy_kappa_refine, kappa_estimate_heuristic, DiagPlan};
pub use real2x2::real_2x2_block;
pub use taylor::{
    fun2_atom_taylor, taylor_polynomial, taylor_remainder_bound, TaylorPlan, K_MAX,
};
