//! Truncated bivariate Taylor evaluator for one atomic block pair: the
//! degree is raised until a remainder bound on the eigenvalue grid drops
//! below the tolerance, then the kept terms are evaluated by a two-level
//! Horner scheme in the shifted blocks.

use num_complex::Complex64;

use crate::dense::matrix::mul;
use crate::dense::{spectral_norm, ComplexMatrix};
use crate::error::{Error, Result};
use crate::funcs::BivariateFunction;

/// Hard cap on the candidate truncation degree.
pub const K_MAX: usize = 150;

/// Outcome of Taylor degree selection for one block pair.
#[derive(Clone, Debug)]
pub struct TaylorPlan {
    /// Expansion center (tr A / m, tr B / n).
    pub center: (Complex64, Complex64),
    /// Bound on max(‖A − λI‖, ‖B − μI‖), inflated by 1.01 to absorb the
    /// norm estimation error.
    pub theta: f64,
    /// Selected degree k; terms with i + j ≤ k are kept.
    pub degree: usize,
    /// Tolerance the remainder bound was driven below.
    pub epsilon: f64,
}

fn trace_mean(x: &ComplexMatrix) -> Complex64 {
    x.diag().iter().sum::<Complex64>() / x.rows() as f64
}

fn shifted(x: &ComplexMatrix, s: Complex64) -> ComplexMatrix {
    let mut y = x.clone();
    for i in 0..y.rows() {
        y[(i, i)] -= s;
    }
    y
}

/// ln Σ_{i+j=order} |f^(i,j)(x,y)| / (i! j!), assembled in log space so the
/// sum survives derivative magnitudes far beyond double range.
fn ln_term_sum(
    f: &dyn BivariateFunction,
    order: u32,
    x: Complex64,
    y: Complex64,
) -> Option<f64> {
    let mut terms = Vec::with_capacity(order as usize + 1);
    for i in 0..=order {
        let t = f.term_log_abs(i, order - i, x, y)?;
        if t.is_nan() {
            return None;
        }
        terms.push(t);
    }
    let mx = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if mx == f64::NEG_INFINITY {
        return Some(f64::NEG_INFINITY);
    }
    let s: f64 = terms.iter().map(|&t| (t - mx).exp()).sum();
    Some(mx + s.ln())
}

/// Truncation-error bound θ^(k+1) ‖C‖ max over the grid of the order-(k+1)
/// Taylor-term sum. Returns 0 when θ, ‖C‖, or every term vanishes, and +∞
/// when a needed derivative magnitude is unavailable.
pub fn taylor_remainder_bound(
    f: &dyn BivariateFunction,
    plan: &TaylorPlan,
    grid: &[(Complex64, Complex64)],
    norm_c: f64,
) -> f64 {
    if plan.theta == 0.0 || norm_c == 0.0 {
        return 0.0;
    }
    let order = (plan.degree + 1) as u32;
    let mut worst = f64::NEG_INFINITY;
    for &(x, y) in grid {
        match ln_term_sum(f, order, x, y) {
            Some(l) => worst = worst.max(l),
            None => return f64::INFINITY,
        }
    }
    if worst == f64::NEG_INFINITY {
        return 0.0;
    }
    (f64::from(order) * plan.theta.ln() + norm_c.ln() + worst).exp()
}

fn scalar_diag(n: usize, t: Complex64) -> ComplexMatrix {
    let mut p = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        p[(i, i)] = t;
    }
    p
}

fn add_to_diag(p: &mut ComplexMatrix, t: Complex64) {
    for i in 0..p.rows() {
        p[(i, i)] += t;
    }
}

/// Σ_{i+j≤k} t_ij N_A^i C N_B^j by two nested Horner levels; the outer level
/// runs in whichever block is larger so the inner polynomials stay cheap.
fn horner(
    f: &dyn BivariateFunction,
    na: &ComplexMatrix,
    nb: &ComplexMatrix,
    c: &ComplexMatrix,
    k: usize,
    lam: Complex64,
    mu: Complex64,
) -> Result<ComplexMatrix> {
    let coeff = |i: usize, j: usize| -> Result<Complex64> {
        f.taylor_coeff(i as u32, j as u32, lam, mu).ok_or_else(|| {
            Error::arg(
                "taylor degree",
                format!(
                    "`{}` cannot supply the ({i},{j}) Taylor coefficient at the expansion center",
                    f.name()
                ),
            )
        })
    };
    if nb.rows() <= na.rows() {
        let poly_b = |i: usize| -> Result<ComplexMatrix> {
            let top = k - i;
            let mut p = scalar_diag(nb.rows(), coeff(i, top)?);
            for j in (0..top).rev() {
                p = mul(&p, nb);
                add_to_diag(&mut p, coeff(i, j)?);
            }
            Ok(p)
        };
        let mut r = mul(c, &poly_b(k)?);
        for i in (0..k).rev() {
            r = mul(na, &r).add(&mul(c, &poly_b(i)?));
        }
        Ok(r)
    } else {
        let poly_a = |j: usize| -> Result<ComplexMatrix> {
            let top = k - j;
            let mut p = scalar_diag(na.rows(), coeff(top, j)?);
            for i in (0..top).rev() {
                p = mul(&p, na);
                add_to_diag(&mut p, coeff(i, j)?);
            }
            Ok(p)
        };
        let mut r = mul(&poly_a(k)?, c);
        for j in (0..k).rev() {
            r = mul(&r, nb).add(&mul(&poly_a(j)?, c));
        }
        Ok(r)
    }
}

fn check_dims(a: &ComplexMatrix, b: &ComplexMatrix, c: &ComplexMatrix) -> Result<()> {
    if !a.is_square() || !b.is_square() || a.is_empty() || b.is_empty() {
        return Err(Error::arg("taylor", "A and B must be square and non-empty"));
    }
    if c.rows() != a.rows() || c.cols() != b.rows() {
        return Err(Error::arg(
            "taylor",
            format!("C must be {} x {}", a.rows(), b.rows()),
        ));
    }
    Ok(())
}

/// Taylor polynomial of f at the trace-mean center, truncated at `degree`
/// and applied to the block pair. No remainder control; callers that need a
/// certified result go through [`fun2_atom_taylor`].
pub fn taylor_polynomial(
    f: &dyn BivariateFunction,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    degree: usize,
) -> Result<ComplexMatrix> {
    check_dims(a, b, c)?;
    let lam = trace_mean(a);
    let mu = trace_mean(b);
    horner(f, &shifted(a, lam), &shifted(b, mu), c, degree, lam, mu)
}

/// Atomic-block evaluation by the truncated Taylor expansion: picks the
/// smallest degree whose remainder bound clears `epsilon` first at the
/// expansion center and then on the full eigenvalue grid Λ_A × Λ_B.
pub fn fun2_atom_taylor(
    f: &dyn BivariateFunction,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    epsilon: f64,
) -> Result<(ComplexMatrix, TaylorPlan)> {
    check_dims(a, b, c)?;
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::arg("taylor", "epsilon must be positive and finite"));
    }
    let lam = trace_mean(a);
    let mu = trace_mean(b);
    let na = shifted(a, lam);
    let nb = shifted(b, mu);
    let theta = spectral_norm(&na).max(spectral_norm(&nb)) * 1.01;
    let norm_c = spectral_norm(c) * 1.01;

    let mut grid = Vec::with_capacity(a.rows() * b.rows());
    for &x in &a.diag() {
        for &y in &b.diag() {
            grid.push((x, y));
        }
    }
    for &(x, y) in grid.iter().chain(std::iter::once(&(lam, mu))) {
        if f.is_singular_at(x, y) {
            return Err(Error::SingularFunctionValue { lambda: x, mu: y });
        }
    }

    let center = [(lam, mu)];
    let mut last_bound = f64::INFINITY;
    for k in 0..=K_MAX {
        if (k + 1) as u32 > f.max_order() {
            return Err(Error::TaylorNoConvergence {
                k_max: k,
                last_bound,
                epsilon,
            });
        }
        let plan = TaylorPlan {
            center: (lam, mu),
            theta,
            degree: k,
            epsilon,
        };
        // The center is in the convex hull of the grid, so its bound is a
        // lower estimate of the grid bound and makes a cheap early reject.
        let at_center = taylor_remainder_bound(f, &plan, &center, norm_c);
        if at_center > epsilon {
            last_bound = at_center;
            continue;
        }
        let on_grid = taylor_remainder_bound(f, &plan, &grid, norm_c);
        last_bound = on_grid;
        if on_grid <= epsilon {
            let result = horner(f, &na, &nb, c, k, lam, mu)?;
            return Ok((result, plan));
        }
    }
    Err(Error::TaylorNoConvergence {
        k_max: K_MAX,
        last_bound,
        epsilon,
    })
}
