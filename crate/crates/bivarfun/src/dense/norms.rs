use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::dense::matrix::{mul, ComplexMatrix};
use crate::error::{Error, Result};

/// Largest eigenvalue of a Hermitian matrix of dimension <= 3, closed form.
fn hermitian_max_eig(g: &ComplexMatrix) -> f64 {
    match g.rows() {
        0 => 0.0,
        1 => g[(0, 0)].re,
        2 => {
            let a = g[(0, 0)].re;
            let d = g[(1, 1)].re;
            let b2 = g[(0, 1)].norm_sqr();
            0.5 * (a + d) + (0.25 * (a - d) * (a - d) + b2).sqrt()
        }
        3 => {
            let q = (g[(0, 0)].re + g[(1, 1)].re + g[(2, 2)].re) / 3.0;
            let p1 = g[(0, 1)].norm_sqr() + g[(0, 2)].norm_sqr() + g[(1, 2)].norm_sqr();
            let dq = |i: usize| g[(i, i)].re - q;
            let p2 = dq(0) * dq(0) + dq(1) * dq(1) + dq(2) * dq(2) + 2.0 * p1;
            if p2 <= 0.0 {
                return q;
            }
            let p = (p2 / 6.0).sqrt();
            let mut b = g.clone();
            for i in 0..3 {
                b[(i, i)] -= Complex64::new(q, 0.0);
            }
            let b = b.scale(Complex64::new(1.0 / p, 0.0));
            let det = b[(0, 0)] * (b[(1, 1)] * b[(2, 2)] - b[(1, 2)] * b[(2, 1)])
                - b[(0, 1)] * (b[(1, 0)] * b[(2, 2)] - b[(1, 2)] * b[(2, 0)])
                + b[(0, 2)] * (b[(1, 0)] * b[(2, 1)] - b[(1, 1)] * b[(2, 0)]);
            let r = (det.re / 2.0).clamp(-1.0, 1.0);
            let phi = r.acos() / 3.0;
            q + 2.0 * p * phi.cos()
        }
        _ => unreachable!("closed form only for dimension <= 3"),
    }
}

/// Largest singular value. Exact (closed-form eigenvalues of the Gram matrix)
/// for matrices up to 3 in both dimensions; otherwise power iteration on X*X
/// with relative tolerance 1e-6, at most 200 iterations, from a fixed-seed
/// start vector. Callers that feed the value into error bounds inflate it by
/// 1.01 to absorb the estimation error.
pub fn spectral_norm(x: &ComplexMatrix) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    // Entries far from unit magnitude (eigenvector matrices of clustered
    // blocks reach 1e100 and beyond) overflow the squared sums below; the
    // norm is homogeneous, so compute it on a rescaled copy instead.
    let scale = x.max_abs();
    if scale == 0.0 {
        return 0.0;
    }
    if !scale.is_finite() {
        return f64::INFINITY;
    }
    if !(1e-100..=1e100).contains(&scale) {
        let m = if scale >= f64::MIN_POSITIVE {
            1.0 / scale
        } else {
            1e300
        };
        return spectral_norm(&x.scale(Complex64::new(m, 0.0))) / m;
    }
    if x.rows() <= 3 && x.cols() <= 3 {
        let g = if x.cols() <= x.rows() {
            mul(&x.conj_transpose(), x)
        } else {
            mul(x, &x.conj_transpose())
        };
        return hermitian_max_eig(&g).max(0.0).sqrt();
    }
    let n = x.cols();
    let mut rng = ChaCha12Rng::seed_from_u64(0x7370_6563);
    let mut v = ComplexMatrix::from_fn(n, 1, |_, _| {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    let nv = v.frobenius_norm();
    if nv == 0.0 {
        return 0.0;
    }
    v = v.scale(Complex64::new(1.0 / nv, 0.0));
    let xh = x.conj_transpose();
    let mut lam = 0.0f64;
    for _ in 0..200 {
        let w = mul(x, &v);
        let lam_new = w.frobenius_norm().powi(2);
        let s = mul(&xh, &w);
        let ns = s.frobenius_norm();
        if ns == 0.0 {
            return lam_new.max(0.0).sqrt();
        }
        v = s.scale(Complex64::new(1.0 / ns, 0.0));
        if (lam_new - lam).abs() <= 1e-6 * lam_new {
            return lam_new.max(0.0).sqrt();
        }
        lam = lam_new;
    }
    lam.max(0.0).sqrt()
}

/// Inverse of an upper-triangular matrix by back-substitution in double
/// precision. Overflowing entries come back non-finite; callers decide how to
/// report that.
pub(crate) fn upper_triangular_inverse(v: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !v.is_square() {
        return Err(Error::arg("triangular inverse", "matrix must be square"));
    }
    let n = v.rows();
    for i in 0..n {
        if v[(i, i)] == Complex64::new(0.0, 0.0) {
            return Err(Error::SingularTriangular {
                what: format!("zero diagonal entry at index {i}"),
            });
        }
    }
    let mut w = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        w[(j, j)] = Complex64::new(1.0, 0.0) / v[(j, j)];
        for i in (0..j).rev() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in (i + 1)..=j {
                acc += v[(i, k)] * w[(k, j)];
            }
            w[(i, j)] = -acc / v[(i, i)];
        }
    }
    Ok(w)
}

/// Condition number estimate ||V|| ||V^-1|| for upper-triangular V, with the
/// inverse formed by back-substitution in double precision. Overflow during
/// inversion returns +inf rather than an error; a zero diagonal entry is an
/// error.
pub fn cond_estimate(v: &ComplexMatrix) -> Result<f64> {
    let w = upper_triangular_inverse(v)?;
    if !w.is_finite() {
        return Ok(f64::INFINITY);
    }
    Ok(spectral_norm(v) * spectral_norm(&w))
}
