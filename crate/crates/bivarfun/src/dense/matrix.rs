use num_complex::Complex64;
use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Dense complex matrix in column-major layout.
///
/// Column-major is fixed so the in-memory order coincides with the cmx file
/// format and so loop nests below have a single canonical form, which keeps
/// results bit-reproducible across runs on the same platform.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds from a row-major slice of (re, im) pairs; convenient in tests.
    pub fn from_rows(rows: usize, cols: usize, entries: &[Complex64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count mismatch");
        Self::from_fn(rows, cols, |i, j| entries[i * cols + j])
    }

    /// Column-major raw storage, matching the cmx file order.
    pub fn raw(&self) -> &[Complex64] {
        &self.data
    }

    pub fn raw_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn from_raw(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), rows * cols, "raw length mismatch");
        ComplexMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn block(&self, row0: usize, col0: usize, rows: usize, cols: usize) -> Self {
        assert!(row0 + rows <= self.rows && col0 + cols <= self.cols, "block out of range");
        Self::from_fn(rows, cols, |i, j| self[(row0 + i, col0 + j)])
    }

    pub fn set_block(&mut self, row0: usize, col0: usize, block: &ComplexMatrix) {
        assert!(
            row0 + block.rows <= self.rows && col0 + block.cols <= self.cols,
            "block out of range"
        );
        for j in 0..block.cols {
            for i in 0..block.rows {
                self[(row0 + i, col0 + j)] = block[(i, j)];
            }
        }
    }

    pub fn diag(&self) -> Vec<Complex64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= s;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "dimension mismatch");
        let mut out = self.clone();
        for (v, w) in out.data.iter_mut().zip(&other.data) {
            *v += w;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "dimension mismatch");
        let mut out = self.clone();
        for (v, w) in out.data.iter_mut().zip(&other.data) {
            *v -= w;
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Strictly-upper-triangular test used by fast paths (exact zeros below).
    pub fn is_upper_triangular(&self) -> bool {
        for j in 0..self.cols {
            for i in (j + 1)..self.rows {
                if self[(i, j)] != Complex64::new(0.0, 0.0) {
                    return false;
                }
            }
        }
        true
    }

    /// Horizontal stack [self | other].
    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        let mut out = Self::zeros(self.rows, self.cols + other.cols);
        out.set_block(0, 0, self);
        out.set_block(0, self.cols, other);
        out
    }

    /// Vertical stack [self; other].
    pub fn vstack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols);
        let mut out = Self::zeros(self.rows + other.rows, self.cols);
        out.set_block(0, 0, self);
        out.set_block(self.rows, 0, other);
        out
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    #[inline(always)]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i + j * self.rows]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline(always)]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i + j * self.rows]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        let show = self.rows.min(8);
        for i in 0..show {
            write!(f, "  ")?;
            for j in 0..self.cols.min(8) {
                let z = self[(i, j)];
                write!(f, "{:>12.4e}{:+.4e}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        if show < self.rows {
            writeln!(f, "  ...")?;
        }
        write!(f, "]")
    }
}

/// Standard product with a fixed loop nest (j outer, k middle, i inner) so the
/// summation order never varies between call sites.
pub fn matmul(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<ComplexMatrix> {
    if x.cols() != y.rows() {
        return Err(Error::arg(
            "matmul",
            format!("{}x{} times {}x{}", x.rows(), x.cols(), y.rows(), y.cols()),
        ));
    }
    let (m, k_dim, n) = (x.rows(), x.cols(), y.cols());
    let mut out = ComplexMatrix::zeros(m, n);
    for j in 0..n {
        for k in 0..k_dim {
            let yk = y[(k, j)];
            if yk == Complex64::new(0.0, 0.0) {
                continue;
            }
            let out_col = &mut out.raw_mut()[j * m..(j + 1) * m];
            let x_col = &x.raw()[k * m..(k + 1) * m];
            for i in 0..m {
                out_col[i] += x_col[i] * yk;
            }
        }
    }
    Ok(out)
}

/// Infallible product for dimension-checked internal call sites.
pub(crate) fn mul(x: &ComplexMatrix, y: &ComplexMatrix) -> ComplexMatrix {
    matmul(x, y).expect("internal dimension mismatch")
}

/// Solves L X = B for general square L by LU with partial pivoting.
/// Internal helper (gallery similarity transforms, test oracles); not part of
/// the engine's triangular pipeline.
pub fn solve_lu(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() || a.rows() != b.rows() {
        return Err(Error::arg("solve_lu", "dimension mismatch"));
    }
    let n = a.rows();
    let mut lu = a.clone();
    let mut x = b.clone();
    let mut piv: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut p = k;
        let mut best = lu[(k, k)].norm();
        for i in (k + 1)..n {
            let v = lu[(i, k)].norm();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == 0.0 {
            return Err(Error::SingularTriangular {
                what: format!("LU pivot {k} is exactly zero"),
            });
        }
        if p != k {
            piv.swap(p, k);
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(p, j)];
                lu[(p, j)] = tmp;
            }
            for j in 0..x.cols() {
                let tmp = x[(k, j)];
                x[(k, j)] = x[(p, j)];
                x[(p, j)] = tmp;
            }
        }
        let pivot = lu[(k, k)];
        for i in (k + 1)..n {
            let factor = lu[(i, k)] / pivot;
            lu[(i, k)] = factor;
            for j in (k + 1)..n {
                let sub = factor * lu[(k, j)];
                lu[(i, j)] -= sub;
            }
            for j in 0..x.cols() {
                let sub = factor * x[(k, j)];
                x[(i, j)] -= sub;
            }
        }
    }
    for j in 0..x.cols() {
        for ii in (0..n).rev() {
            let mut acc = x[(ii, j)];
            for k in (ii + 1)..n {
                acc -= lu[(ii, k)] * x[(k, j)];
            }
            x[(ii, j)] = acc / lu[(ii, ii)];
        }
    }
    Ok(x)
}

/// Inverse via LU; internal helper for gallery construction and tests.
pub fn inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    solve_lu(a, &ComplexMatrix::identity(a.rows()))
}
