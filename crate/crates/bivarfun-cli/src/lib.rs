//! Front-end pieces for the bivariate matrix function engine: the benchmark
//! matrix gallery, the reference evaluators it is measured against, the
//! experiment drivers, and cmx matrix-file plumbing. The `bivarfun` binary is
//! a thin clap wrapper over these modules.

pub mod baselines;
pub mod bench;
pub mod gallery;
pub mod io;
