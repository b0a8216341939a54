use rug::ops::CompleteRound;

use crate::error::{Error, Result};
use crate::mp::matrix::MpMatrix;

/// Eigenvector matrix of an upper-triangular T with distinct diagonal: V is
/// upper triangular with unit diagonal, D = diag(T) exactly, and T V = V D.
/// Column j solves the shifted system (T - T(j,j) I) v = 0 by
/// back-substitution, v_i = -(sum_{k=i+1..j} T(i,k) v_k) / (T(i,i) - T(j,j)).
///
/// Exactly repeated diagonal entries cannot be deflated this way; the caller
/// is expected to re-draw its random perturbation and try again.
pub fn mp_triangular_eig(t: &MpMatrix) -> Result<(MpMatrix, MpMatrix)> {
    if !t.is_square() {
        return Err(Error::arg("mp_triangular_eig", "matrix must be square"));
    }
    let n = t.rows();
    for i in 0..n {
        for j in (i + 1)..n {
            if t.at(i, i) == t.at(j, j) {
                return Err(Error::RepeatedEigenvalue {
                    value: crate::mp::MpComplex::from_rug(t.ctx(), t.at(i, i).clone()).to_c64(),
                    i,
                    j,
                });
            }
        }
    }
    let ctx = t.ctx();
    let prec = (ctx.bits(), ctx.bits());
    let mut v = MpMatrix::identity(n, ctx);
    let mut d = MpMatrix::zeros(n, n, ctx);
    for j in 0..n {
        *d.at_mut(j, j) = rug::Complex::with_val(ctx.bits(), t.at(j, j));
        let tjj = t.at(j, j).clone();
        for i in (0..j).rev() {
            let mut acc = rug::Complex::new(ctx.bits());
            for k in (i + 1)..=j {
                acc += (t.at(i, k) * v.at(k, j)).complete(prec);
            }
            let den = (t.at(i, i) - &tjj).complete(prec);
            *v.at_mut(i, j) = -acc / den;
        }
    }
    Ok((v, d))
}
