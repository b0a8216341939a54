use num_complex::Complex64;

use crate::dense::matrix::{mul, ComplexMatrix};
use crate::dense::schur::{schur, UNIT_ROUNDOFF};
use crate::error::{Error, Result};

/// Solves A11 V - V A22 = C for upper-triangular A11 (p x p) and A22 (q x q)
/// by column back-substitution: column j satisfies
/// (A11 - A22(j,j) I) v_j = c_j + sum_{k<j} A22(k,j) v_k,
/// a shifted triangular solve.
pub fn sylvester_tri(
    a11: &ComplexMatrix,
    a22: &ComplexMatrix,
    c: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    if !a11.is_square() || !a22.is_square() {
        return Err(Error::arg("sylvester_tri", "coefficients must be square"));
    }
    let p = a11.rows();
    let q = a22.rows();
    if c.rows() != p || c.cols() != q {
        return Err(Error::arg("sylvester_tri", "right-hand side shape mismatch"));
    }
    let mut v = ComplexMatrix::zeros(p, q);
    for j in 0..q {
        let mut rhs: Vec<Complex64> = (0..p).map(|i| c[(i, j)]).collect();
        for k in 0..j {
            let akj = a22[(k, j)];
            if akj == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (i, r) in rhs.iter_mut().enumerate() {
                *r += akj * v[(i, k)];
            }
        }
        let mu = a22[(j, j)];
        for i in (0..p).rev() {
            let mut acc = rhs[i];
            for k in (i + 1)..p {
                acc -= a11[(i, k)] * v[(k, j)];
            }
            let d = a11[(i, i)] - mu;
            if d == Complex64::new(0.0, 0.0) {
                return Err(Error::SylvesterSingular {
                    lhs: a11[(i, i)],
                    rhs: mu,
                });
            }
            v[(i, j)] = acc / d;
        }
    }
    Ok(v)
}

/// Back-substitution core for A X + X B = C with both coefficients upper
/// triangular. Each pass peels the last row of A and the first column of B:
/// the corner scalar equation, a shifted column solve against A, a shifted
/// row solve against B, then a rank-two update of the untouched block.
fn sylvester_tri_sum(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let m = a.rows();
    let n = b.rows();
    let mut x = ComplexMatrix::zeros(m, n);
    let mut work = c.clone();
    let mut r = m; // rows still active (0..r)
    let mut t = 0; // first active column
    while r > 0 && t < n {
        let lam = a[(r - 1, r - 1)];
        let mu = b[(t, t)];
        x[(r - 1, t)] = work[(r - 1, t)] / (lam + mu);
        // column t, rows above the corner: (A11 + mu I) x = c - A12 x21
        for i in (0..r - 1).rev() {
            let mut acc = work[(i, t)] - a[(i, r - 1)] * x[(r - 1, t)];
            for k in (i + 1)..(r - 1) {
                acc -= a[(i, k)] * x[(k, t)];
            }
            x[(i, t)] = acc / (a[(i, i)] + mu);
        }
        // row r-1, columns right of the corner: x (B22 + lam I) = c - x21 B12
        for j in (t + 1)..n {
            let mut acc = work[(r - 1, j)] - x[(r - 1, t)] * b[(t, j)];
            for k in (t + 1)..j {
                acc -= x[(r - 1, k)] * b[(k, j)];
            }
            x[(r - 1, j)] = acc / (b[(j, j)] + lam);
        }
        // remaining block: C12 <- C12 - A12 X22 - X11 B12
        for j in (t + 1)..n {
            let xr = x[(r - 1, j)];
            let bt = b[(t, j)];
            for i in 0..(r - 1) {
                let sub = a[(i, r - 1)] * xr + x[(i, t)] * bt;
                work[(i, j)] -= sub;
            }
        }
        r -= 1;
        t += 1;
    }
    Ok(x)
}

/// Solves A X + X B = C for general square A (m x m) and B (n x n): both
/// coefficients are Schur-reduced, the triangular equation is solved by the
/// peeling recursion above, and the result is transformed back.
pub fn sylvester_bartels_stewart(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    if !a.is_square() || !b.is_square() {
        return Err(Error::arg(
            "sylvester_bartels_stewart",
            "coefficients must be square",
        ));
    }
    if c.rows() != a.rows() || c.cols() != b.rows() {
        return Err(Error::arg(
            "sylvester_bartels_stewart",
            "right-hand side shape mismatch",
        ));
    }
    let sa = schur(a)?;
    let sb = schur(b)?;
    for lam in sa.t.diag() {
        for mu in sb.t.diag() {
            if (lam + mu).norm() < 4.0 * UNIT_ROUNDOFF * (lam.norm() + mu.norm()) {
                return Err(Error::SylvesterNearSingular { lambda: lam, mu });
            }
        }
    }
    let c_tilde = mul(&mul(&sa.q.conj_transpose(), c), &sb.q);
    let y = sylvester_tri_sum(&sa.t, &sb.t, &c_tilde)?;
    Ok(mul(&mul(&sa.q, &y), &sb.q.conj_transpose()))
}
