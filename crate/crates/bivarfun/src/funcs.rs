//! Built-in bivariate functions with closed-form mixed partials.
//!
//! Every builtin is conjugate-symmetric (real Taylor coefficients) and ships
//! partials up to total order 60, enough for the Taylor evaluator's degree
//! search. Magnitude queries used by remainder bounds have dedicated
//! log-space forms so they survive total orders where the raw derivative
//! overflows a double.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mp::{MpComplex, PrecisionContext, MAX_DIGITS};

/// Largest total order i+j for which builtins provide mixed partials.
pub const MAX_PARTIAL_ORDER: u32 = 60;

pub trait BivariateFunction: Send + Sync {
    fn name(&self) -> &str;

    fn eval(&self, x: Complex64, y: Complex64) -> Complex64;

    /// Evaluation at multiprecision scalars; the result carries the inputs'
    /// context. Implementations add guard digits internally where the
    /// formula cancels (divided differences, the x-y factor).
    fn eval_mp(&self, x: &MpComplex, y: &MpComplex) -> MpComplex;

    /// Mixed partial f^(i,j)(x, y); None when the order exceeds
    /// `max_order` or the value is not representable in double precision.
    fn partial(&self, i: u32, j: u32, x: Complex64, y: Complex64) -> Option<Complex64>;

    fn max_order(&self) -> u32 {
        MAX_PARTIAL_ORDER
    }

    /// Whether partials are available at all; false disables the Taylor
    /// evaluator for this function.
    fn has_partials(&self) -> bool {
        true
    }

    /// f(conj x, conj y) = conj f(x, y); required by the real 2x2 path.
    fn conj_symmetric(&self) -> bool {
        true
    }

    /// Points where f fails to be analytic (branch cuts, poles).
    fn is_singular_at(&self, _x: Complex64, _y: Complex64) -> bool {
        false
    }

    /// ln(|f^(i,j)(x,y)| / (i! j!)), the Taylor-term magnitude used by
    /// remainder bounds; overridden with closed forms where the raw partial
    /// can overflow.
    fn term_log_abs(&self, i: u32, j: u32, x: Complex64, y: Complex64) -> Option<f64> {
        let v = self.partial(i, j, x, y)?;
        let m = v.norm();
        if !m.is_finite() {
            return None;
        }
        if m == 0.0 {
            return Some(f64::NEG_INFINITY);
        }
        Some(m.ln() - ln_factorial(i) - ln_factorial(j))
    }

    /// f^(i,j)(x,y) / (i! j!), the Taylor coefficient; overridden in
    /// log-space where the numerator overflows.
    fn taylor_coeff(&self, i: u32, j: u32, x: Complex64, y: Complex64) -> Option<Complex64> {
        let v = self.partial(i, j, x, y)?;
        if !v.re.is_finite() || !v.im.is_finite() {
            return None;
        }
        if i + j <= 30 {
            Some(v / (factorial(i) * factorial(j)))
        } else {
            Some(v * (-ln_factorial(i) - ln_factorial(j)).exp())
        }
    }
}

pub fn factorial(n: u32) -> f64 {
    let mut acc = 1.0f64;
    for t in 2..=n {
        acc *= t as f64;
    }
    acc
}

pub fn ln_factorial(n: u32) -> f64 {
    let mut acc = 0.0f64;
    for t in 2..=n {
        acc += (t as f64).ln();
    }
    acc
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for t in 0..k {
        acc = acc * (n - t) as f64 / (t + 1) as f64;
    }
    acc
}

/// Principal-branch cut of the square root: nonpositive real axis.
fn on_sqrt_cut(s: Complex64) -> bool {
    s.im == 0.0 && s.re <= 0.0
}

fn is_finite_c(v: Complex64) -> bool {
    v.re.is_finite() && v.im.is_finite()
}

fn finite_or_none(v: Complex64) -> Option<Complex64> {
    if is_finite_c(v) {
        Some(v)
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// univariate helpers for g in {exp, sqrt}
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum UnivariateKind {
    Exp,
    Sqrt,
}

/// Product (1/2)(1/2-1)...(1/2-n+1), the n-th derivative coefficient of
/// z^(1/2); 1 for n = 0.
fn sqrt_falling_coeff(n: u32) -> f64 {
    let mut acc = 1.0f64;
    for t in 0..n {
        acc *= 0.5 - t as f64;
    }
    acc
}

fn ln_abs_sqrt_falling(n: u32) -> f64 {
    let mut acc = 0.0f64;
    for t in 0..n {
        acc += (0.5 - t as f64).abs().ln();
    }
    acc
}

/// Same for z^(-1/2): (-1/2)(-1/2-1)...
fn inv_sqrt_falling_coeff(n: u32) -> f64 {
    let mut acc = 1.0f64;
    for t in 0..n {
        acc *= -0.5 - t as f64;
    }
    acc
}

fn ln_abs_inv_sqrt_falling(n: u32) -> f64 {
    let mut acc = 0.0f64;
    for t in 0..n {
        acc += (0.5 + t as f64).ln();
    }
    acc
}

fn uni_derivative(kind: UnivariateKind, n: u32, z: Complex64) -> Option<Complex64> {
    match kind {
        UnivariateKind::Exp => finite_or_none(z.exp()),
        UnivariateKind::Sqrt => {
            if n == 0 {
                finite_or_none(z.sqrt())
            } else {
                // c_n sqrt(z) / z^n keeps the principal branch of the n = 0 case
                finite_or_none(z.sqrt() * z.powi(-(n as i32)) * sqrt_falling_coeff(n))
            }
        }
    }
}

/// ln |g^(n)(z)| without forming the (possibly overflowing) value.
fn uni_derivative_log_abs(kind: UnivariateKind, n: u32, z: Complex64) -> f64 {
    match kind {
        UnivariateKind::Exp => z.re,
        UnivariateKind::Sqrt => ln_abs_sqrt_falling(n) + (0.5 - n as f64) * z.norm().ln(),
    }
}

/// Phase (unit modulus) of g^(n)(z), matching the principal branch of
/// `uni_derivative`.
fn uni_derivative_phase(kind: UnivariateKind, n: u32, z: Complex64) -> Complex64 {
    match kind {
        UnivariateKind::Exp => Complex64::new(0.0, z.im).exp(),
        UnivariateKind::Sqrt => {
            let theta = (0.5 - n as f64) * z.arg();
            let sign = if sqrt_falling_coeff(n) < 0.0 { -1.0 } else { 1.0 };
            sign * Complex64::new(0.0, theta).exp()
        }
    }
}

fn uni_eval_mp(kind: UnivariateKind, z: &MpComplex) -> MpComplex {
    match kind {
        UnivariateKind::Exp => z.exp(),
        UnivariateKind::Sqrt => z.sqrt(),
    }
}

fn uni_d1_mp(kind: UnivariateKind, z: &MpComplex) -> MpComplex {
    match kind {
        UnivariateKind::Exp => z.exp(),
        UnivariateKind::Sqrt => z.sqrt().recip().scale_f64(0.5),
    }
}

/// Decimal digits lost to cancellation when `value` was produced from inputs
/// of magnitude `scale`.
fn cancellation_digits(scale: f64, value: f64) -> u32 {
    if value == 0.0 || !value.is_finite() || !scale.is_finite() {
        return 0;
    }
    let lost = (scale / value).log10();
    if lost.is_finite() && lost > 0.0 {
        lost.ceil() as u32
    } else {
        0
    }
}

/// Runs `f` at an elevated-precision context and rounds the result back.
fn with_guard_digits(
    ctx: PrecisionContext,
    extra: u32,
    f: impl Fn(PrecisionContext) -> MpComplex,
) -> MpComplex {
    if extra == 0 {
        return f(ctx);
    }
    let digits = (ctx.digits() + extra).min(MAX_DIGITS);
    let hi = PrecisionContext::new(digits).expect("guard context in range");
    let v = f(hi);
    MpComplex::from_parts(ctx, v.real(), v.imag())
}

// ---------------------------------------------------------------------------
// functions of the sum s = x + y
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum SumKind {
    /// 1/s
    Inv,
    /// sqrt(s)
    Sqrt,
    /// 1/sqrt(s)
    InvSqrt,
    /// exp(s)
    Exp,
    /// exp(s)/s
    ExpOverSum,
    /// exp(sqrt(s))
    ExpSqrt,
}

struct SumFunction {
    kind: SumKind,
    name: &'static str,
}

/// Truncated exponential series sum_{t<=n} z^t / t!.
fn exp_partial_sum(n: u32, z: Complex64) -> Complex64 {
    let mut term = Complex64::new(1.0, 0.0);
    let mut acc = term;
    for t in 1..=n {
        term = term * z / (t as f64);
        acc += term;
    }
    acc
}

impl SumFunction {
    /// n-th derivative of the underlying univariate function at s.
    fn derivative_n(&self, n: u32, s: Complex64) -> Option<Complex64> {
        match self.kind {
            SumKind::Inv => {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                finite_or_none(sign * factorial(n) * s.powi(-(n as i32 + 1)))
            }
            SumKind::Sqrt => uni_derivative(UnivariateKind::Sqrt, n, s),
            SumKind::InvSqrt => {
                finite_or_none(s.sqrt().finv() * s.powi(-(n as i32)) * inv_sqrt_falling_coeff(n))
            }
            SumKind::Exp => finite_or_none(s.exp()),
            SumKind::ExpOverSum => {
                // d^n/ds^n (e^s / s) = (-1)^n n! s^(-n-1) e^s sum_{t<=n} (-s)^t / t!
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                let tail = exp_partial_sum(n, -s);
                finite_or_none(sign * factorial(n) * s.powi(-(n as i32 + 1)) * s.exp() * tail)
            }
            SumKind::ExpSqrt => {
                // w' = v w with v = (1/2) s^(-1/2); Leibniz recurrence on w
                let w0 = s.sqrt().exp();
                if n == 0 {
                    return finite_or_none(w0);
                }
                let inv_sqrt = s.sqrt().finv();
                let mut v = Vec::with_capacity(n as usize);
                for m in 0..n {
                    let vm = 0.5 * inv_sqrt_falling_coeff(m) * inv_sqrt * s.powi(-(m as i32));
                    if !is_finite_c(vm) {
                        return None;
                    }
                    v.push(vm);
                }
                let mut w = vec![w0];
                for q in 0..n {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..=q {
                        acc += binomial(q, k) * v[k as usize] * w[(q - k) as usize];
                    }
                    if !is_finite_c(acc) {
                        return None;
                    }
                    w.push(acc);
                }
                Some(w[n as usize])
            }
        }
    }

    /// ln |d^n/ds^n| in closed form; None where only the direct value exists.
    fn derivative_log_abs(&self, n: u32, s: Complex64) -> Option<f64> {
        let ls = s.norm().ln();
        match self.kind {
            SumKind::Inv => Some(ln_factorial(n) - (n as f64 + 1.0) * ls),
            SumKind::Sqrt => Some(ln_abs_sqrt_falling(n) + (0.5 - n as f64) * ls),
            SumKind::InvSqrt => Some(ln_abs_inv_sqrt_falling(n) + (-0.5 - n as f64) * ls),
            SumKind::Exp => Some(s.re),
            SumKind::ExpOverSum => {
                let tail = exp_partial_sum(n, -s).norm();
                if tail == 0.0 || !tail.is_finite() {
                    return None;
                }
                Some(ln_factorial(n) - (n as f64 + 1.0) * ls + s.re + tail.ln())
            }
            SumKind::ExpSqrt => {
                let v = self.derivative_n(n, s)?;
                let m = v.norm();
                if m == 0.0 {
                    return Some(f64::NEG_INFINITY);
                }
                Some(m.ln())
            }
        }
    }

    /// Unit-modulus phase matching `derivative_n`'s branch choices.
    fn derivative_phase(&self, n: u32, s: Complex64) -> Option<Complex64> {
        let arg = s.arg();
        let rot = |theta: f64| Complex64::new(0.0, theta).exp();
        match self.kind {
            SumKind::Inv => {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                Some(sign * rot(-(n as f64 + 1.0) * arg))
            }
            SumKind::Sqrt => Some(uni_derivative_phase(UnivariateKind::Sqrt, n, s)),
            SumKind::InvSqrt => {
                let sign = if inv_sqrt_falling_coeff(n) < 0.0 { -1.0 } else { 1.0 };
                Some(sign * rot((-0.5 - n as f64) * arg))
            }
            SumKind::Exp => Some(rot(s.im)),
            SumKind::ExpOverSum => {
                let tail = exp_partial_sum(n, -s);
                let tm = tail.norm();
                if tm == 0.0 || !tm.is_finite() {
                    return None;
                }
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                Some(sign * rot(-(n as f64 + 1.0) * arg) * rot(s.im) * (tail / tm))
            }
            SumKind::ExpSqrt => None,
        }
    }
}

impl BivariateFunction for SumFunction {
    fn name(&self) -> &str {
        self.name
    }

    fn eval(&self, x: Complex64, y: Complex64) -> Complex64 {
        let s = x + y;
        match self.kind {
            SumKind::Inv => s.finv(),
            SumKind::Sqrt => s.sqrt(),
            SumKind::InvSqrt => s.sqrt().finv(),
            SumKind::Exp => s.exp(),
            SumKind::ExpOverSum => s.exp() / s,
            SumKind::ExpSqrt => s.sqrt().exp(),
        }
    }

    fn eval_mp(&self, x: &MpComplex, y: &MpComplex) -> MpComplex {
        let ctx = x.ctx();
        let scale = x.abs_f64().max(y.abs_f64());
        let s_probe = x.add(y);
        let extra = cancellation_digits(scale, s_probe.abs_f64());
        with_guard_digits(ctx, extra, |c| {
            let xs = MpComplex::from_parts(c, x.real(), x.imag());
            let ys = MpComplex::from_parts(c, y.real(), y.imag());
            let s = xs.add(&ys);
            match self.kind {
                SumKind::Inv => s.recip(),
                SumKind::Sqrt => s.sqrt(),
                SumKind::InvSqrt => s.sqrt().recip(),
                SumKind::Exp => s.exp(),
                SumKind::ExpOverSum => s.exp().div(&s),
                SumKind::ExpSqrt => s.sqrt().exp(),
            }
        })
    }

    fn partial(&self, i: u32, j: u32, x: Complex64, y: Complex64) -> Option<Complex64> {
        let n = i + j;
        if n > MAX_PARTIAL_ORDER {
            return None;
        }
        self.derivative_n(n, x + y)
    }

    fn is_singular_at(&self, x: Complex64, y: Complex64) -> bool {
        let s = x + y;
        match self.kind {
            SumKind::Inv | SumKind::ExpOverSum => s == Complex64::new(0.0, 0.0),
            SumKind::Sqrt | SumKind::InvSqrt | SumKind::ExpSqrt => on_sqrt_cut(s),
            SumKind::Exp => false,
        }
    }

    fn term_log_abs(&self, i: u32, j: u32, x: Complex64, y: Complex64) -> Option<f64> {
        let n = i + j;
        if n > MAX_PARTIAL_ORDER {
            return None;
        }
        let l = self.derivative_log_abs(n, x + y)?;
        Some(l - ln_factorial(i) - ln_factorial(j))
    }

    fn taylor_coeff(&self, i: u32, j: u32, x: Complex64, y: Complex64) -> Option<Complex64> {
        let n = i + j;
        if n > MAX_PARTIAL_ORDER {
            return None;
        }
        if n <= 30 {
            let v = self.derivative_n(n, x + y)?;
            return Some(v / (factorial(i) * factorial(j)));
        }
        let s = x + y;
        match self.derivative_phase(n, s) {
            Some(phase) => {
                let l = self.derivative_log_abs(n, s)? - ln_factorial(i) - ln_factorial(j);
                finite_or_none(phase * l.exp())
            }
            None => {
                let v = self.derivative_n(n, s)?;
                finite_or_none(v * (-ln_factorial(i) - ln_factorial(j)).exp())
            }
        }
    }
}

// ---------------------------------------------------------------------------
// divided-difference kernel f2(x,y) = (g(x) - g(y)) / (x - y)
// ---------------------------------------------------------------------------

struct DividedDifference {
    g: UnivariateKind,
    name: &'static str,
}

impl DividedDifference {
    /// Midpoint-series evaluation of f2^(i,j): with c = (x+y)/2 and
    /// u = (x-y)/2,
    /// f2^(i,j) = sum_t g^(n+t+1)(c)/(n+t+1)! sum_{p+q=t} (i+p)!/p! (j+q)!/q! u^p (-u)^q,
    /// every term assembled from log-magnitudes and unit phases.
    fn partial_series(&self, i: u32, j: u32, c: Complex64, u: Complex64) -> Option<Complex64> {
        let n = i + j;
        let lu = if u.norm() == 0.0 { f64::NEG_INFINITY } else { u.norm().ln() };
        let arg_u = u.arg();
        let mut acc = Complex64::new(0.0, 0.0);
        let mut small_streak = 0;
        for t in 0..=90u32 {
            let m = n + t + 1;
            let lg = uni_derivative_log_abs(self.g, m, c);
            let gphase = uni_derivative_phase(self.g, m, c);
            let mut term = Complex64::new(0.0, 0.0);
            for p in 0..=t {
                let q = t - p;
                let lcoef = ln_factorial(i + p) - ln_factorial(p) + ln_factorial(j + q)
                    - ln_factorial(q)
                    - ln_factorial(m);
                let lmag = lg + lcoef + if t == 0 { 0.0 } else { t as f64 * lu };
                if lmag > 700.0 {
                    return None;
                }
                let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
                let phase = gphase * Complex64::new(0.0, t as f64 * arg_u).exp() * sign;
                term += phase * lmag.exp();
            }
            acc += term;
            if !is_finite_c(acc) {
                return None;
            }
            if term.norm() <= 1e-18 * acc.norm().max(f64::MIN_POSITIVE) {
                small_streak += 1;
                if small_streak >= 3 {
                    return Some(acc);
                }
            } else {
                small_streak = 0;
            }
        }
        Some(acc)
    }

    /// Direct recurrence from (x-y) f = g(x) - g(y):
    /// f^(i,j) = (g^(i)(x)[j=0] - g^(j)(y)[i=0] - i f^(i-1,j) + j f^(i,j-1)) / (x-y).
    fn partial_recurrence(&self, i: u32, j: u32, x: Complex64, y: Complex64) -> Option<Complex64> {
        let d = x - y;
        let mut table = vec![vec![Complex64::new(0.0, 0.0); j as usize + 1]; i as usize + 1];
        for a in 0..=i as usize {
            for b in 0..=j as usize {
                let mut num = Complex64::new(0.0, 0.0);
                if b == 0 {
                    num += uni_derivative(self.g, a as u32, x)?;
                }
                if a == 0 {
                    num -= uni_derivative(self.g, b as u32, y)?;
                }
                if a > 0 {
                    num -= a as f64 * table[a - 1][b];
                }
                if b > 0 {
                    num += b as f64 * table[a][b - 1];
                }
                let v = num / d;
                if !is_finite_c(v) {
                    return None;
                }
                table[a][b] = v;
            }
        }
        Some(table[i as usize][j as usize])
    }

    fn series_applicable(&self, c: Complex64, u: Complex64) -> bool {
        match self.g {
            UnivariateKind::Exp => u.norm() <= 8.0,
            UnivariateKind::Sqrt => u.norm() <= 0.25 * c.norm(),
        }
    }
}

impl BivariateFunction for DividedDifference {
    fn name(&self) -> &str {
        self.name
    }

    fn eval(&self, x: Complex64, y: Complex64) -> Complex64 {
        self.partial(0, 0, x, y)
            .unwrap_or_else(|| Complex64::new(f64::NAN, f64::NAN))
    }

    fn eval_mp(&self, x: &MpComplex, y: &MpComplex) -> MpComplex {
        let ctx = x.ctx();
        let d = x.sub(y);
        let dm = d.abs_f64();
        if dm == 0.0 {
            return uni_d1_mp(self.g, x);
        }
        let scale = x.abs_f64().max(y.abs_f64());
        let extra = cancellation_digits(scale, dm);
        with_guard_digits(ctx, extra, |c| {
            let xs = MpComplex::from_parts(c, x.real(), x.imag());
            let ys = MpComplex::from_parts(c, y.real(), y.imag());
            let num = uni_eval_mp(self.g, &xs).sub(&uni_eval_mp(self.g, &ys));
            num.div(&xs.sub(&ys))
        })
    }

    fn partial(&self, i: u32, j: u32, x: Complex64, y: Complex64) -> Option<Complex64> {
        if i + j > MAX_PARTIAL_ORDER {
            return None;
        }
        let c = 0.5 * (x + y);
        let u = 0.5 * (x - y);
        if self.series_applicable(c, u) {
            self.partial_series(i, j, c, u)
        } else {
            self.partial_recurrence(i, j, x, y)
        }
    }

    fn is_singular_at(&self, x: Complex64, y: Complex64) -> bool {
        match self.g {
            UnivariateKind::Exp => false,
            UnivariateKind::Sqrt => on_sqrt_cut(x) || on_sqrt_cut(y),
        }
    }
}

// ---------------------------------------------------------------------------
// f(x,y) = 1 / (sqrt(x+y) (x-y))
// ---------------------------------------------------------------------------

struct InvSqrtSumDiff;

impl BivariateFunction for InvSqrtSumDiff {
    fn name(&self) -> &str {
        "inv_sqrt_sum_diff"
    }

    fn eval(&self, x: Complex64, y: Complex64) -> Complex64 {
        ((x + y).sqrt() * (x - y)).finv()
    }

    fn eval_mp(&self, x: &MpComplex, y: &MpComplex) -> MpComplex {
        let ctx = x.ctx();
        let scale = x.abs_f64().max(y.abs_f64());
        let extra = cancellation_digits(scale, x.add(y).abs_f64())
            + cancellation_digits(scale, x.sub(y).abs_f64());
        with_guard_digits(ctx, extra, |c| {
            let xs = MpComplex::from_parts(c, x.real(), x.imag());
            let ys = MpComplex::from_parts(c, y.real(), y.imag());
            xs.add(&ys).sqrt().mul(&xs.sub(&ys)).recip()
        })
    }

    /// Separates into h(s) q(d) with s = x+y, d = x-y, h = s^(-1/2),
    /// q = d^(-1); then
    /// f^(i,j) = (d/ds + d/dd)^i (d/ds - d/dd)^j [h q]
    ///         = sum_{a,b} C(i,a) C(j,b) (-1)^(j-b) h^(a+b)(s) q^(i-a+j-b)(d).
    fn partial(&self, i: u32, j: u32, x: Complex64, y: Complex64) -> Option<Complex64> {
        if i + j > MAX_PARTIAL_ORDER {
            return None;
        }
        let s = x + y;
        let d = x - y;
        let inv_sqrt_s = s.sqrt().finv();
        let inv_d = d.finv();
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 0..=i {
            for b in 0..=j {
                let h = inv_sqrt_falling_coeff(a + b) * inv_sqrt_s * s.powi(-((a + b) as i32));
                let m = (i - a) + (j - b);
                let qsign = if m % 2 == 0 { 1.0 } else { -1.0 };
                let q = qsign * factorial(m) * inv_d.powi(m as i32 + 1);
                let bsign = if (j - b) % 2 == 0 { 1.0 } else { -1.0 };
                acc += binomial(i, a) * binomial(j, b) * bsign * h * q;
                if !is_finite_c(acc) {
                    return None;
                }
            }
        }
        Some(acc)
    }

    fn is_singular_at(&self, x: Complex64, y: Complex64) -> bool {
        on_sqrt_cut(x + y) || x == y
    }
}

// ---------------------------------------------------------------------------
// registry
// ---------------------------------------------------------------------------

/// Built-in function lookup. Recognized names: `f1` (1/(x+y)),
/// `f2g`/`f2g:exp`/`f2g:sqrt` (divided difference of g), `f3h`/`f3h:exp`
/// (exp(x+y)), `f3h:sqrt` and `sqrt_sum` (sqrt(x+y)), `inv_sqrt_sum`,
/// `exp_over_sum`, `exp_sqrt_sum`, `inv_sqrt_sum_diff`.
pub fn builtin_function(name: &str) -> Result<Arc<dyn BivariateFunction>> {
    let f: Arc<dyn BivariateFunction> = match name {
        "f1" => Arc::new(SumFunction { kind: SumKind::Inv, name: "f1" }),
        "f2g" | "f2g:exp" => Arc::new(DividedDifference { g: UnivariateKind::Exp, name: "f2g:exp" }),
        "f2g:sqrt" => Arc::new(DividedDifference { g: UnivariateKind::Sqrt, name: "f2g:sqrt" }),
        "f3h" | "f3h:exp" => Arc::new(SumFunction { kind: SumKind::Exp, name: "f3h:exp" }),
        "f3h:sqrt" => Arc::new(SumFunction { kind: SumKind::Sqrt, name: "f3h:sqrt" }),
        "sqrt_sum" => Arc::new(SumFunction { kind: SumKind::Sqrt, name: "sqrt_sum" }),
        "inv_sqrt_sum" => Arc::new(SumFunction { kind: SumKind::InvSqrt, name: "inv_sqrt_sum" }),
        "exp_over_sum" => Arc::new(SumFunction { kind: SumKind::ExpOverSum, name: "exp_over_sum" }),
        "exp_sqrt_sum" => Arc::new(SumFunction { kind: SumKind::ExpSqrt, name: "exp_sqrt_sum" }),
        "inv_sqrt_sum_diff" => Arc::new(InvSqrtSumDiff),
        _ => {
            return Err(Error::arg(
                "builtin_function",
                format!("unknown function name {name:?}"),
            ))
        }
    };
    Ok(f)
}
