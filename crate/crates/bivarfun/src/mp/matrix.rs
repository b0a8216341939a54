use num_complex::Complex64;
use rug::ops::CompleteRound;

use crate::dense::ComplexMatrix;
use crate::error::{Error, Result};
use crate::mp::{MpComplex, PrecisionContext};

/// Dense complex matrix whose entries all carry the same precision context,
/// column-major like its double-precision counterpart.
#[derive(Clone, Debug)]
pub struct MpMatrix {
    rows: usize,
    cols: usize,
    data: Vec<rug::Complex>,
    ctx: PrecisionContext,
}

impl MpMatrix {
    pub fn zeros(rows: usize, cols: usize, ctx: PrecisionContext) -> Self {
        let bits = ctx.bits();
        MpMatrix {
            rows,
            cols,
            data: (0..rows * cols).map(|_| rug::Complex::new(bits)).collect(),
            ctx,
        }
    }

    pub fn identity(n: usize, ctx: PrecisionContext) -> Self {
        let mut m = Self::zeros(n, n, ctx);
        for i in 0..n {
            *m.at_mut(i, i) = rug::Complex::with_val(ctx.bits(), (1, 0));
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn ctx(&self) -> PrecisionContext {
        self.ctx
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub(crate) fn at(&self, i: usize, j: usize) -> &rug::Complex {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i + j * self.rows]
    }

    pub(crate) fn at_mut(&mut self, i: usize, j: usize) -> &mut rug::Complex {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i + j * self.rows]
    }

    pub fn get(&self, i: usize, j: usize) -> MpComplex {
        MpComplex::from_rug(self.ctx, self.at(i, j).clone())
    }

    pub fn set(&mut self, i: usize, j: usize, v: &MpComplex) {
        let bits = self.ctx.bits();
        *self.at_mut(i, j) = rug::Complex::with_val(bits, &v.z);
    }

    /// Re-rounds every entry to a new context.
    pub fn with_context(&self, ctx: PrecisionContext) -> MpMatrix {
        let bits = ctx.bits();
        MpMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|z| rug::Complex::with_val(bits, z))
                .collect(),
            ctx,
        }
    }

    pub fn conj_transpose(&self) -> MpMatrix {
        let bits = self.ctx.bits();
        let mut out = Self::zeros(self.cols, self.rows, self.ctx);
        for j in 0..self.cols {
            for i in 0..self.rows {
                *out.at_mut(j, i) = rug::Complex::with_val(bits, self.at(i, j)).conj();
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<MpMatrix> {
        if self.ctx != other.ctx {
            return Err(Error::arg("mp add", "context mismatch"));
        }
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::arg("mp add", "dimension mismatch"));
        }
        let mut out = self.clone();
        for (v, w) in out.data.iter_mut().zip(&other.data) {
            *v += w;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<MpMatrix> {
        if self.ctx != other.ctx {
            return Err(Error::arg("mp sub", "context mismatch"));
        }
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::arg("mp sub", "dimension mismatch"));
        }
        let mut out = self.clone();
        for (v, w) in out.data.iter_mut().zip(&other.data) {
            *v -= w;
        }
        Ok(out)
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.real().is_finite() && z.imag().is_finite())
    }
}

/// Exact embedding of a double-precision matrix: every double is representable
/// at 16 or more decimal digits.
pub fn promote(x: &ComplexMatrix, ctx: PrecisionContext) -> MpMatrix {
    let bits = ctx.bits();
    let mut out = MpMatrix::zeros(x.rows(), x.cols(), ctx);
    for j in 0..x.cols() {
        for i in 0..x.rows() {
            let v = x[(i, j)];
            *out.at_mut(i, j) = rug::Complex::with_val(bits, (v.re, v.im));
        }
    }
    out
}

/// Round-to-nearest double per component. The flag reports overflow: some
/// finite entry mapped to +-inf.
pub fn demote(x: &MpMatrix) -> (ComplexMatrix, bool) {
    let mut overflow = false;
    let mut out = ComplexMatrix::zeros(x.rows(), x.cols());
    for j in 0..x.cols() {
        for i in 0..x.rows() {
            let z = x.at(i, j);
            let re = z.real().to_f64();
            let im = z.imag().to_f64();
            if (!re.is_finite() && z.real().is_finite())
                || (!im.is_finite() && z.imag().is_finite())
            {
                overflow = true;
            }
            out[(i, j)] = Complex64::new(re, im);
        }
    }
    (out, overflow)
}

fn resolve_ctx(a: &MpMatrix, b: &MpMatrix, target: Option<PrecisionContext>, what: &'static str) -> Result<PrecisionContext> {
    match target {
        Some(ctx) => Ok(ctx),
        None if a.ctx() == b.ctx() => Ok(a.ctx()),
        None => Err(Error::arg(what, "context mismatch without an explicit target")),
    }
}

/// Product with every intermediate rounded at the target context.
pub fn mp_matmul(a: &MpMatrix, b: &MpMatrix, target: Option<PrecisionContext>) -> Result<MpMatrix> {
    let ctx = resolve_ctx(a, b, target, "mp_matmul")?;
    if a.cols() != b.rows() {
        return Err(Error::arg("mp_matmul", "dimension mismatch"));
    }
    let prec = (ctx.bits(), ctx.bits());
    let (m, kk, n) = (a.rows(), a.cols(), b.cols());
    let mut out = MpMatrix::zeros(m, n, ctx);
    for j in 0..n {
        for k in 0..kk {
            let bkj = b.at(k, j);
            if bkj.real().is_zero() && bkj.imag().is_zero() {
                continue;
            }
            for i in 0..m {
                *out.at_mut(i, j) += (a.at(i, k) * bkj).complete(prec);
            }
        }
    }
    Ok(out)
}

/// Solves T X = B for upper-triangular T by back-substitution at the target
/// context.
pub fn mp_triangular_solve(
    t: &MpMatrix,
    b: &MpMatrix,
    target: Option<PrecisionContext>,
) -> Result<MpMatrix> {
    let ctx = resolve_ctx(t, b, target, "mp_triangular_solve")?;
    if !t.is_square() || t.rows() != b.rows() {
        return Err(Error::arg("mp_triangular_solve", "dimension mismatch"));
    }
    let n = t.rows();
    for i in 0..n {
        if t.at(i, i).real().is_zero() && t.at(i, i).imag().is_zero() {
            return Err(Error::SingularTriangular {
                what: format!("zero diagonal entry at index {i}"),
            });
        }
    }
    let prec = (ctx.bits(), ctx.bits());
    let mut x = MpMatrix::zeros(n, b.cols(), ctx);
    for j in 0..b.cols() {
        for i in (0..n).rev() {
            let mut acc = rug::Complex::with_val(ctx.bits(), b.at(i, j));
            for k in (i + 1)..n {
                acc -= (t.at(i, k) * x.at(k, j)).complete(prec);
            }
            *x.at_mut(i, j) = acc / t.at(i, i);
        }
    }
    Ok(x)
}

/// Solves X T = B for upper-triangular T, sweeping columns left to right.
pub fn mp_triangular_rsolve(
    b: &MpMatrix,
    t: &MpMatrix,
    target: Option<PrecisionContext>,
) -> Result<MpMatrix> {
    let ctx = resolve_ctx(b, t, target, "mp_triangular_rsolve")?;
    if !t.is_square() || t.rows() != b.cols() {
        return Err(Error::arg("mp_triangular_rsolve", "dimension mismatch"));
    }
    let n = t.rows();
    for i in 0..n {
        if t.at(i, i).real().is_zero() && t.at(i, i).imag().is_zero() {
            return Err(Error::SingularTriangular {
                what: format!("zero diagonal entry at index {i}"),
            });
        }
    }
    let prec = (ctx.bits(), ctx.bits());
    let m = b.rows();
    let mut x = MpMatrix::zeros(m, n, ctx);
    for j in 0..n {
        for i in 0..m {
            let mut acc = rug::Complex::with_val(ctx.bits(), b.at(i, j));
            for k in 0..j {
                acc -= (x.at(i, k) * t.at(k, j)).complete(prec);
            }
            *x.at_mut(i, j) = acc / t.at(j, j);
        }
    }
    Ok(x)
}

/// Entrywise product at the target context.
pub fn mp_hadamard(a: &MpMatrix, b: &MpMatrix, target: Option<PrecisionContext>) -> Result<MpMatrix> {
    let ctx = resolve_ctx(a, b, target, "mp_hadamard")?;
    if (a.rows(), a.cols()) != (b.rows(), b.cols()) {
        return Err(Error::arg("mp_hadamard", "dimension mismatch"));
    }
    let prec = (ctx.bits(), ctx.bits());
    let mut out = MpMatrix::zeros(a.rows(), a.cols(), ctx);
    for j in 0..a.cols() {
        for i in 0..a.rows() {
            *out.at_mut(i, j) = (a.at(i, j) * b.at(i, j)).complete(prec);
        }
    }
    Ok(out)
}

/// Frobenius norm at the matrix's own context; stands in for the spectral
/// norm inside multiprecision bookkeeping (over-estimates it by at most
/// sqrt(mn), absorbed by the slack already in the precision formulas).
pub fn mp_norm_fro(a: &MpMatrix) -> rug::Float {
    let bits = a.ctx().bits();
    let mut acc = rug::Float::with_val(bits, 0);
    for j in 0..a.cols() {
        for i in 0..a.rows() {
            let z = a.at(i, j);
            acc += (z.real() * z.real()).complete(bits);
            acc += (z.imag() * z.imag()).complete(bits);
        }
    }
    acc.sqrt()
}
