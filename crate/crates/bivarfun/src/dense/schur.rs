use num_complex::Complex64;

use crate::dense::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Unit roundoff for IEEE double precision.
pub const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

/// Unitary similarity A = Q T Q* with T upper triangular.
#[derive(Clone, Debug)]
pub struct SchurForm {
    pub q: ComplexMatrix,
    pub t: ComplexMatrix,
}

/// Plane rotation G = [[c, s], [-conj(s), c]] acting on rows/cols (i, i+1),
/// with c real and c^2 + |s|^2 = 1.
#[derive(Clone, Copy, Debug)]
pub struct GivensRotation {
    pub c: f64,
    pub s: Complex64,
    pub i: usize,
}

impl GivensRotation {
    /// Rotation with G (x, y)^T = (r, 0)^T; the adjoint G* therefore has its
    /// first column parallel to (x, y)^T, which is what eigenvalue swapping
    /// needs.
    pub fn zeroing(i: usize, x: Complex64, y: Complex64) -> Self {
        let nx = x.norm();
        let ny = y.norm();
        if ny == 0.0 {
            return Self { c: 1.0, s: Complex64::new(0.0, 0.0), i };
        }
        if nx == 0.0 {
            return Self { c: 0.0, s: y.conj() / ny, i };
        }
        let t = nx.hypot(ny);
        Self {
            c: nx / t,
            s: (x / nx) * y.conj() / t,
            i,
        }
    }

    /// M <- G M (rows i, i+1).
    pub fn apply_left(&self, m: &mut ComplexMatrix) {
        let (i, c, s) = (self.i, self.c, self.s);
        for j in 0..m.cols() {
            let a = m[(i, j)];
            let b = m[(i + 1, j)];
            m[(i, j)] = c * a + s * b;
            m[(i + 1, j)] = -s.conj() * a + c * b;
        }
    }

    /// M <- M G* (columns i, i+1).
    pub fn apply_right_adj(&self, m: &mut ComplexMatrix) {
        let (i, c, s) = (self.i, self.c, self.s);
        for r in 0..m.rows() {
            let a = m[(r, i)];
            let b = m[(r, i + 1)];
            m[(r, i)] = c * a + s.conj() * b;
            m[(r, i + 1)] = -s * a + c * b;
        }
    }
}

/// Householder reduction to upper Hessenberg form: returns (Q, H) with
/// A = Q H Q* and H zero below the first subdiagonal.
fn hessenberg(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = a.rows();
    let mut h = a.clone();
    let mut q = ComplexMatrix::identity(n);
    if n < 3 {
        return (q, h);
    }
    for k in 0..n - 2 {
        let len = n - k - 1;
        let mut v: Vec<Complex64> = (0..len).map(|t| h[(k + 1 + t, k)]).collect();
        let norm_x = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            continue;
        }
        let x0 = v[0];
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm_x;
        v[0] -= alpha;
        let vn = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vn == 0.0 {
            continue;
        }
        for z in &mut v {
            *z /= vn;
        }
        // H <- (I - 2vv*) H on rows k+1..n
        for j in 0..n {
            let mut w = Complex64::new(0.0, 0.0);
            for t in 0..len {
                w += v[t].conj() * h[(k + 1 + t, j)];
            }
            let w2 = 2.0 * w;
            for t in 0..len {
                let sub = w2 * v[t];
                h[(k + 1 + t, j)] -= sub;
            }
        }
        // H <- H (I - 2vv*) on columns k+1..n
        for r in 0..n {
            let mut w = Complex64::new(0.0, 0.0);
            for t in 0..len {
                w += h[(r, k + 1 + t)] * v[t];
            }
            let w2 = 2.0 * w;
            for t in 0..len {
                let sub = w2 * v[t].conj();
                h[(r, k + 1 + t)] -= sub;
            }
        }
        // Q <- Q (I - 2vv*)
        for r in 0..n {
            let mut w = Complex64::new(0.0, 0.0);
            for t in 0..len {
                w += q[(r, k + 1 + t)] * v[t];
            }
            let w2 = 2.0 * w;
            for t in 0..len {
                let sub = w2 * v[t].conj();
                q[(r, k + 1 + t)] -= sub;
            }
        }
        h[(k + 1, k)] = alpha;
        for t in 1..len {
            h[(k + 1 + t, k)] = Complex64::new(0.0, 0.0);
        }
    }
    (q, h)
}

/// Eigenvalue of the trailing 2x2 of the active block closest to the corner
/// entry.
fn wilkinson_shift(h: &ComplexMatrix, hi: usize) -> Complex64 {
    let a = h[(hi - 1, hi - 1)];
    let b = h[(hi - 1, hi)];
    let c = h[(hi, hi - 1)];
    let d = h[(hi, hi)];
    let p = 0.5 * (a - d);
    let q = (p * p + b * c).sqrt();
    if (p + q).norm() <= (p - q).norm() {
        d + p + q
    } else {
        d + p - q
    }
}

/// Complex Schur decomposition by Householder Hessenberg reduction followed
/// by implicit single-shift QR iteration with Wilkinson shifts.
///
/// Deflation drops a subdiagonal entry once |H(i+1,i)| falls below
/// u (|H(i,i)| + |H(i+1,i+1)|); an exceptional shift replaces the Wilkinson
/// shift every 10 sweeps without progress; each sweep begins at the lowest
/// row where the bulge can start without losing the shift. Gives up after
/// 30 m sweeps.
pub fn schur(a: &ComplexMatrix) -> Result<SchurForm> {
    if !a.is_square() {
        return Err(Error::arg("schur", "matrix must be square"));
    }
    if !a.is_finite() {
        return Err(Error::arg("schur", "matrix has non-finite entries"));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(SchurForm {
            q: ComplexMatrix::zeros(0, 0),
            t: ComplexMatrix::zeros(0, 0),
        });
    }
    let (mut q, mut h) = hessenberg(a);
    let max_sweeps = 30 * n;
    let mut sweeps = 0usize;
    let mut stagnant = 0usize;
    let mut hi = n - 1;
    loop {
        while hi > 0 {
            let sub = h[(hi, hi - 1)].norm();
            let tol = UNIT_ROUNDOFF * (h[(hi - 1, hi - 1)].norm() + h[(hi, hi)].norm());
            if sub <= tol {
                h[(hi, hi - 1)] = Complex64::new(0.0, 0.0);
                hi -= 1;
                stagnant = 0;
            } else {
                break;
            }
        }
        if hi == 0 {
            break;
        }
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let tol = UNIT_ROUNDOFF * (h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm());
            if sub <= tol {
                h[(lo, lo - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if sweeps >= max_sweeps {
            return Err(Error::SchurNoConvergence { sweeps, dim: n });
        }
        sweeps += 1;
        stagnant += 1;
        let shift = if stagnant % 10 == 0 {
            h[(hi, hi)] + 0.75 * h[(hi, hi - 1)].norm()
        } else {
            wilkinson_shift(&h, hi)
        };
        // Start the chase at the lowest row whose incoming subdiagonal is
        // negligible against the shifted column: a tiny (but not yet
        // deflatable) interior subdiagonal would otherwise wash the shift
        // out of the bulge and stall convergence below it.
        let mut start = lo;
        let mut k = hi - 1;
        while k > lo {
            let h11s = (h[(k, k)] - shift).norm();
            let h10 = h[(k, k - 1)].norm();
            let h21 = h[(k + 1, k)].norm();
            if h10 * h21
                <= UNIT_ROUNDOFF * h11s * (h[(k, k)].norm() + h[(k + 1, k + 1)].norm())
            {
                start = k;
                break;
            }
            k -= 1;
        }
        let mut x = h[(start, start)] - shift;
        let mut y = h[(start + 1, start)];
        for k in start..hi {
            let g = GivensRotation::zeroing(k, x, y);
            g.apply_left(&mut h);
            g.apply_right_adj(&mut h);
            g.apply_right_adj(&mut q);
            if k + 1 < hi {
                x = h[(k + 1, k)];
                y = h[(k + 2, k)];
            }
        }
        // the chased bulge leaves only roundoff below the subdiagonal
        for k in start..hi.saturating_sub(1) {
            h[(k + 2, k)] = Complex64::new(0.0, 0.0);
        }
    }
    for j in 0..n {
        for i in (j + 1)..n {
            h[(i, j)] = Complex64::new(0.0, 0.0);
        }
    }
    Ok(SchurForm { q, t: h })
}

/// Swaps the diagonal entries at positions (i, i+1) of T by a unitary
/// similarity built from the eigenvector (T(i,i+1), lambda2 - lambda1)^T.
/// Returns false when the pair is numerically equal and the physical swap is
/// skipped.
fn swap_adjacent(q: &mut ComplexMatrix, t: &mut ComplexMatrix, i: usize) -> bool {
    let l1 = t[(i, i)];
    let l2 = t[(i + 1, i + 1)];
    let off = t[(i, i + 1)];
    if (l1 - l2).norm() < 4.0 * UNIT_ROUNDOFF * l1.norm().max(l2.norm()) {
        return false;
    }
    let g = GivensRotation::zeroing(i, off, l2 - l1);
    g.apply_left(t);
    g.apply_right_adj(t);
    g.apply_right_adj(q);
    t[(i + 1, i)] = Complex64::new(0.0, 0.0);
    true
}

/// Reorders the Schur form so that diag(T')[k] = diag(T)[target_order[k]],
/// using a bubble sort of adjacent Givens swaps. Swaps between numerically
/// equal eigenvalues (gap below 4u max(|l1|,|l2|)) are skipped physically and
/// absorbed into the bookkeeping; block orderings produced upstream never
/// separate eigenvalues that close.
pub fn reorder_schur(s: &SchurForm, target_order: &[usize]) -> Result<SchurForm> {
    let n = s.t.rows();
    if target_order.len() != n {
        return Err(Error::arg("reorder_schur", "permutation length mismatch"));
    }
    let mut seen = vec![false; n];
    for &p in target_order {
        if p >= n || seen[p] {
            return Err(Error::arg("reorder_schur", "target_order is not a permutation"));
        }
        seen[p] = true;
    }
    let mut rank = vec![0usize; n];
    for (pos, &orig) in target_order.iter().enumerate() {
        rank[orig] = pos;
    }
    let mut cur: Vec<usize> = (0..n).collect();
    let mut q = s.q.clone();
    let mut t = s.t.clone();
    loop {
        let mut moved = false;
        for i in 0..n.saturating_sub(1) {
            if rank[cur[i]] > rank[cur[i + 1]] {
                swap_adjacent(&mut q, &mut t, i);
                cur.swap(i, i + 1);
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    Ok(SchurForm { q, t })
}
