use num_complex::Complex64;

/// Errors surfaced by the evaluation engine and its building blocks.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed call: dimension mismatch, bad option value, mixed
    /// precision contexts without an explicit target, and similar.
    #[error("invalid argument `{arg}`: {reason}")]
    InvalidArgument { arg: &'static str, reason: String },

    /// QR iteration failed to deflate within the sweep budget.
    #[error("Schur QR iteration did not converge after {sweeps} sweeps (m = {dim})")]
    SchurNoConvergence { sweeps: usize, dim: usize },

    /// A triangular solve hit an exactly singular shift.
    #[error("singular Sylvester shift: diagonal entries {lhs} and {rhs} collide exactly")]
    SylvesterSingular { lhs: Complex64, rhs: Complex64 },

    /// Bartels–Stewart encountered eigenvalues with λ + μ ≈ 0.
    #[error("near-singular Sylvester equation: λ = {lambda}, μ = {mu} with λ + μ ≈ 0")]
    SylvesterNearSingular { lambda: Complex64, mu: Complex64 },

    /// Zero or exactly repeated diagonal entries where distinctness is required.
    #[error("singular triangular matrix: {what}")]
    SingularTriangular { what: String },

    /// Triangular eigenvector computation found an exactly repeated eigenvalue;
    /// the caller is expected to re-perturb and retry.
    #[error("repeated diagonal entry {value} at positions {i} and {j}; re-perturb and retry")]
    RepeatedEigenvalue { value: Complex64, i: usize, j: usize },

    /// Re-perturbation budget exhausted in the diagonalization evaluator.
    #[error("diagonalization failed after {attempts} re-perturbations")]
    PerturbationBudgetExhausted { attempts: usize },

    /// Requested precision exceeds the supported cap.
    #[error("required precision of {digits} digits exceeds the {cap}-digit cap")]
    PrecisionCapExceeded { digits: u32, cap: u32 },

    /// f evaluated on its singular set.
    #[error("f is singular at the eigenvalue pair (λ, μ) = ({lambda}, {mu})")]
    SingularFunctionValue { lambda: Complex64, mu: Complex64 },

    /// Taylor degree selection exhausted k_max without meeting the tolerance.
    #[error(
        "Taylor degree selection reached k_max = {k_max} with remainder bound {last_bound:.3e} > ε = {epsilon:.3e}"
    )]
    TaylorNoConvergence {
        k_max: usize,
        last_bound: f64,
        epsilon: f64,
    },

    /// A confluent divided difference needs a derivative the function lacks.
    #[error("confluent eigenvalues at {value} require partial derivatives of order {order}, not available")]
    DerivativeRequired { value: Complex64, order: usize },

    /// The 2×2 real conjugate-block formula requires a conjugate-symmetric f.
    #[error("function `{name}` is not conjugate-symmetric; the real 2×2 formula does not apply")]
    NotConjSymmetric { name: String },

    /// Split produced an exact eigenvalue collision across sides; indicates an
    /// internal inconsistency because blocking keeps cross-block gaps > δ.
    #[error("internal consistency violation: {what}")]
    Internal { what: String },
}

impl Error {
    pub fn arg(arg: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            arg,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
