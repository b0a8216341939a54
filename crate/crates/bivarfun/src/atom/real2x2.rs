//! Closed form for a pair of real 2×2 rotation blocks, the atomic shape a
//! real Schur form leaves for a complex-conjugate eigenvalue pair. Two
//! complex function values produce an exactly real result.

use num_complex::Complex64;

use crate::dense::ComplexMatrix;
use crate::error::{Error, Result};
use crate::funcs::BivariateFunction;

const FORM_TOL: f64 = 1e-14;

fn require_real(m: &ComplexMatrix, what: &'static str) -> Result<()> {
    let tol = FORM_TOL * m.max_abs();
    for i in 0..2 {
        for j in 0..2 {
            if m[(i, j)].im.abs() > tol {
                return Err(Error::arg(what, "block must be real"));
            }
        }
    }
    Ok(())
}

/// (α, β) of a block within 1e-14 (relative) of [[α, β], [−β, α]].
fn rotation_parameters(m: &ComplexMatrix, what: &'static str) -> Result<(f64, f64)> {
    if m.rows() != 2 || m.cols() != 2 {
        return Err(Error::arg(what, "block must be 2 x 2"));
    }
    require_real(m, what)?;
    let tol = FORM_TOL * m.max_abs();
    let (m11, m12, m21, m22) = (m[(0, 0)].re, m[(0, 1)].re, m[(1, 0)].re, m[(1, 1)].re);
    if (m11 - m22).abs() > tol || (m12 + m21).abs() > tol {
        return Err(Error::arg(
            what,
            "block must have the rotation form [[a, b], [-b, a]]",
        ));
    }
    Ok(((m11 + m22) * 0.5, (m12 - m21) * 0.5))
}

/// Evaluates f on the pair of rotation blocks A ~ z = α+iβ, B ~ w = γ+iδ
/// acting on a real 2×2 C. Conjugate symmetry of f pairs the four complex
/// eigenvalue combinations into p = f(z, w) and q = f(z, w̄), and the change
/// of basis back to real coordinates collapses to four real quantities; the
/// result is exactly real by construction.
pub fn real_2x2_block(
    f: &dyn BivariateFunction,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    if !f.conj_symmetric() {
        return Err(Error::NotConjSymmetric {
            name: f.name().to_string(),
        });
    }
    let (alpha, beta) = rotation_parameters(a, "real_2x2_block A")?;
    let (gamma, delta) = rotation_parameters(b, "real_2x2_block B")?;
    if c.rows() != 2 || c.cols() != 2 {
        return Err(Error::arg("real_2x2_block C", "block must be 2 x 2"));
    }
    require_real(c, "real_2x2_block C")?;

    let z = Complex64::new(alpha, beta);
    let w = Complex64::new(gamma, delta);
    for y in [w, w.conj()] {
        if f.is_singular_at(z, y) {
            return Err(Error::SingularFunctionValue { lambda: z, mu: y });
        }
    }
    let p = f.eval(z, w);
    let q = f.eval(z, w.conj());
    let (c11, c12, c21, c22) = (c[(0, 0)].re, c[(0, 1)].re, c[(1, 0)].re, c[(1, 1)].re);
    // Im(q) carries the symmetric combination c12 + c21 in both Q2 and Q3;
    // the affine case f = x + y (result A C + C B) pins the sign down.
    let q1 = (c21 - c12) * p.im + (c11 + c22) * p.re;
    let q2 = (c12 + c21) * q.im + (c11 - c22) * q.re;
    let q3 = (c22 - c11) * q.im + (c12 + c21) * q.re;
    let q4 = (c11 + c22) * p.im + (c12 - c21) * p.re;
    Ok(ComplexMatrix::from_rows(
        2,
        2,
        &[
            Complex64::new(0.5 * (q1 + q2), 0.0),
            Complex64::new(0.5 * (q3 + q4), 0.0),
            Complex64::new(0.5 * (q3 - q4), 0.0),
            Complex64::new(0.5 * (q1 - q2), 0.0),
        ],
    ))
}
