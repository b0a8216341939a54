//! Arbitrary-precision complex arithmetic with an explicit working-precision
//! context. Precision is a property of each value, never ambient state: the
//! adaptive evaluator switches precision several times per call and every
//! switch has to be visible at the call site.

pub mod eig;
pub mod matrix;

use num_complex::Complex64;
use rug::ops::CompleteRound;

use crate::error::{Error, Result};

pub use eig::mp_triangular_eig;
pub use matrix::{
    demote, mp_hadamard, mp_matmul, mp_norm_fro, mp_triangular_rsolve, mp_triangular_solve,
    promote, MpMatrix,
};

pub const MIN_DIGITS: u32 = 16;
pub const MAX_DIGITS: u32 = 4096;

/// Working precision expressed in decimal digits; the backing binary
/// precision is ceil(digits log2 10) bits, so 16 digits already embeds every
/// double exactly.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct PrecisionContext {
    digits: u32,
}

impl PrecisionContext {
    pub fn new(digits: u32) -> Result<Self> {
        if !(MIN_DIGITS..=MAX_DIGITS).contains(&digits) {
            return Err(Error::arg(
                "PrecisionContext",
                format!("digits must lie in {MIN_DIGITS}..={MAX_DIGITS}, got {digits}"),
            ));
        }
        Ok(PrecisionContext { digits })
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn bits(&self) -> u32 {
        (self.digits as f64 * std::f64::consts::LOG2_10).ceil() as u32
    }

    /// Unit roundoff 10^(-digits) as a double; underflows to 0 beyond 307
    /// digits, so precision bookkeeping works with `digits` directly.
    pub fn unit_roundoff(&self) -> f64 {
        10f64.powi(-(self.digits as i32))
    }
}

/// Complex scalar whose parts carry the context's precision.
#[derive(Clone, Debug)]
pub struct MpComplex {
    pub(crate) z: rug::Complex,
    ctx: PrecisionContext,
}

impl MpComplex {
    pub fn new(ctx: PrecisionContext, re: f64, im: f64) -> Self {
        MpComplex {
            z: rug::Complex::with_val(ctx.bits(), (re, im)),
            ctx,
        }
    }

    pub fn zero(ctx: PrecisionContext) -> Self {
        Self::new(ctx, 0.0, 0.0)
    }

    pub fn from_c64(ctx: PrecisionContext, v: Complex64) -> Self {
        Self::new(ctx, v.re, v.im)
    }

    pub(crate) fn from_rug(ctx: PrecisionContext, z: rug::Complex) -> Self {
        MpComplex { z, ctx }
    }

    pub fn from_parts(ctx: PrecisionContext, re: rug::Float, im: rug::Float) -> Self {
        let bits = ctx.bits();
        MpComplex {
            z: rug::Complex::with_val(
                bits,
                (
                    rug::Float::with_val(bits, re),
                    rug::Float::with_val(bits, im),
                ),
            ),
            ctx,
        }
    }

    pub fn real(&self) -> rug::Float {
        self.z.real().clone()
    }

    pub fn imag(&self) -> rug::Float {
        self.z.imag().clone()
    }

    pub fn ctx(&self) -> PrecisionContext {
        self.ctx
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.z.real().to_f64(), self.z.imag().to_f64())
    }

    pub fn is_finite(&self) -> bool {
        self.z.real().is_finite() && self.z.imag().is_finite()
    }

    fn prec(&self) -> (u32, u32) {
        let b = self.ctx.bits();
        (b, b)
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.ctx, other.ctx);
        Self::from_rug(self.ctx, (&self.z + &other.z).complete(self.prec()))
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.ctx, other.ctx);
        Self::from_rug(self.ctx, (&self.z - &other.z).complete(self.prec()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.ctx, other.ctx);
        Self::from_rug(self.ctx, (&self.z * &other.z).complete(self.prec()))
    }

    pub fn div(&self, other: &Self) -> Self {
        debug_assert_eq!(self.ctx, other.ctx);
        Self::from_rug(self.ctx, (&self.z / &other.z).complete(self.prec()))
    }

    pub fn neg(&self) -> Self {
        Self::from_rug(self.ctx, (-&self.z).complete(self.prec()))
    }

    pub fn conj(&self) -> Self {
        Self::from_rug(self.ctx, self.z.clone().conj())
    }

    pub fn scale_f64(&self, s: f64) -> Self {
        Self::from_rug(self.ctx, (&self.z * s).complete(self.prec()))
    }

    pub fn recip(&self) -> Self {
        Self::from_rug(self.ctx, self.z.clone().recip())
    }

    pub fn sqrt(&self) -> Self {
        Self::from_rug(self.ctx, self.z.clone().sqrt())
    }

    pub fn exp(&self) -> Self {
        Self::from_rug(self.ctx, self.z.clone().exp())
    }

    /// Modulus as a real at the context precision.
    pub fn abs(&self) -> rug::Float {
        self.z.clone().abs().into_real_imag().0
    }

    pub fn abs_f64(&self) -> f64 {
        self.abs().to_f64()
    }
}
