//! Randomized perturb-and-diagonalize evaluator for one atomic block pair.
//! Tiny diagonal perturbations split the (near-)confluent eigenvalues, the
//! conditioning damage done by the split is estimated and then verified a
//! posteriori, and the diagonalized formula is evaluated with just enough
//! extra precision to cancel that damage.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::blocking::proximity_components;
use crate::dense::norms::upper_triangular_inverse;
use crate::dense::{spectral_norm, ComplexMatrix, UNIT_ROUNDOFF};
use crate::error::{Error, Result};
use crate::funcs::BivariateFunction;
use crate::mp::{
    demote, mp_hadamard, mp_matmul, mp_norm_fro, mp_triangular_eig, mp_triangular_rsolve,
    mp_triangular_solve, promote, MpComplex, MpMatrix, PrecisionContext, MAX_DIGITS, MIN_DIGITS,
};

/// Digits of the fixed working precision at which the perturbed copies are
/// formed; enough for a double entry plus a u-sized perturbation exactly.
const PERTURB_DIGITS: u32 = 32;
const MAX_ATTEMPTS: usize = 4;
const MAX_REFINE_ROUNDS: usize = 3;
const SUBBLOCK_DELTA: f64 = 5e-3;
/// Largest κ the double-precision refinement stage is trusted for.
const REFINE_DOUBLE_LIMIT: f64 = 1e14;
/// Accept the comparison-matrix stage only while ‖U⁻¹‖ ≤ this times ‖V⁻¹‖.
const COMPARISON_SLACK: f64 = 1e4;

/// Perturbed-diagonalization record for one block pair.
#[derive(Clone, Debug)]
pub struct DiagPlan {
    /// Final condition estimates of the two eigenvector matrices.
    pub kappa_a: f64,
    pub kappa_b: f64,
    /// Unit roundoff of the function evaluations, min(u², u / (κ_A κ_B));
    /// 0.0 when the required precision exceeds double range.
    pub u_h: f64,
    /// Decimal digits corresponding to u_h.
    pub digits: u32,
    /// Magnitudes of the diagonal perturbation entries drawn for A and B.
    pub perturbation_scale: (f64, f64),
}

fn kestimate_core(
    eigs: &[Complex64],
    delta1: f64,
    offdiag: impl Fn(usize, usize) -> f64,
    gap: impl Fn(usize, usize) -> f64,
) -> f64 {
    let mut worst = 1.0f64;
    for comp in proximity_components(eigs, delta1) {
        let mb = comp.len();
        if mb < 2 {
            continue;
        }
        let mut num = 0.0f64;
        let mut den = f64::INFINITY;
        for (s, &i) in comp.iter().enumerate() {
            for &j in &comp[s + 1..] {
                num = num.max(offdiag(i, j));
                den = den.min(gap(i, j));
            }
        }
        if num == 0.0 {
            // The cluster is diagonal, so its eigenbasis is exact no matter
            // how close the eigenvalues sit.
            continue;
        }
        if den == 0.0 {
            return f64::INFINITY;
        }
        let zeta = num / den;
        worst = worst.max(mb as f64 * zeta * (zeta + 1.0).powi(mb as i32 - 2));
    }
    worst
}

/// Eigenvector conditioning heuristic for a perturbed triangular matrix.
/// The diagonal is clustered at `delta1`; within each cluster ζ is the
/// largest off-diagonal magnitude over the smallest diagonal gap and the
/// cluster contributes m_b ζ (ζ+1)^(m_b−2). Returns +∞ on an exact diagonal
/// tie inside a coupled cluster, signalling the caller to re-perturb.
pub fn kappa_estimate_heuristic(t: &ComplexMatrix, delta1: f64) -> f64 {
    let eigs = t.diag();
    kestimate_core(
        &eigs,
        delta1,
        |i, j| t[(i, j)].norm(),
        |i, j| (eigs[i] - eigs[j]).norm(),
    )
}

/// Same heuristic on the multiprecision copy. Diagonal gaps are differenced
/// before demotion: the perturbations sit at or below the ulp of the
/// eigenvalues, so double-precision subtraction could collapse them to an
/// exact tie that is not really there.
fn kappa_estimate_mp(t: &MpMatrix, delta1: f64) -> f64 {
    let m = t.rows();
    let eigs: Vec<Complex64> = (0..m).map(|i| t.get(i, i).to_c64()).collect();
    kestimate_core(
        &eigs,
        delta1,
        |i, j| t.get(i, j).abs_f64(),
        |i, j| t.get(i, i).sub(&t.get(j, j)).abs_f64(),
    )
}

/// A-posteriori estimate of κ(V) = ‖V‖‖V⁻¹‖ for the unit-diagonal triangular
/// eigenvector matrix, from cheapest stage to dearest: double-precision
/// inversion while the result stays below 1e14, then the comparison-matrix
/// inverse (non-negative back-substitution, no cancellation) when it does not
/// overshoot ‖V⁻¹‖ by more than 1e4, then a full multiprecision inversion at
/// the u_h working precision. Overflow at every stage yields +∞.
pub fn greedy_kappa_refine(v: &MpMatrix, u_h: f64) -> f64 {
    let (vd, _) = demote(v);
    let mut norm_vinv = f64::INFINITY;
    if vd.is_finite() {
        let norm_v = spectral_norm(&vd);
        if let Ok(w) = upper_triangular_inverse(&vd) {
            if w.is_finite() {
                norm_vinv = spectral_norm(&w);
            }
        }
        let direct = norm_v * norm_vinv;
        if direct <= REFINE_DOUBLE_LIMIT {
            return direct.max(1.0);
        }
        let n = vd.rows();
        let mut comparison = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let a = vd[(i, j)].norm();
                comparison[(i, j)] = Complex64::new(if i == j { a } else { -a }, 0.0);
            }
        }
        if let Ok(ci) = upper_triangular_inverse(&comparison) {
            if ci.is_finite() {
                let norm_ci = spectral_norm(&ci);
                if norm_ci <= COMPARISON_SLACK * norm_vinv {
                    let via_comparison = norm_v * norm_ci;
                    if via_comparison.is_finite() {
                        return via_comparison.max(1.0);
                    }
                }
            }
        }
    }
    let digits = if u_h > 0.0 {
        (-u_h.log10()).ceil() as i64
    } else {
        i64::from(MAX_DIGITS)
    };
    let digits = digits.clamp(i64::from(MIN_DIGITS), i64::from(MAX_DIGITS)) as u32;
    let Ok(ctx) = PrecisionContext::new(digits) else {
        return f64::INFINITY;
    };
    let vm = v.with_context(ctx);
    let ident = MpMatrix::identity(vm.rows(), ctx);
    let Ok(winv) = mp_triangular_solve(&vm, &ident, None) else {
        return f64::INFINITY;
    };
    let k = mp_norm_fro(&vm).to_f64() * mp_norm_fro(&winv).to_f64();
    if k.is_finite() {
        k.max(1.0)
    } else {
        f64::INFINITY
    }
}

fn perturbation_magnitude(x: &ComplexMatrix) -> f64 {
    let scale = x.frobenius_norm();
    if scale > 0.0 {
        scale * UNIT_ROUNDOFF / (x.rows() as f64).sqrt()
    } else {
        // A zero block still needs distinct eigenvalues to diagonalize.
        UNIT_ROUNDOFF * UNIT_ROUNDOFF
    }
}

fn perturbed(base: &MpMatrix, rng: &mut ChaCha12Rng, magnitude: f64) -> MpMatrix {
    let mut out = base.clone();
    for i in 0..out.rows() {
        let phase = rng.random::<f64>() * std::f64::consts::TAU;
        let e = MpComplex::from_c64(out.ctx(), Complex64::from_polar(magnitude, phase));
        let d = out.get(i, i).add(&e);
        out.set(i, i, &d);
    }
    out
}

/// (log10 u_h, digits for f evaluations, digits for the eigenvector work).
/// Computed in log space so κ products beyond double range stay meaningful.
fn choose_precision(kappa_a: f64, kappa_b: f64) -> (f64, f64, f64) {
    let lg_u = UNIT_ROUNDOFF.log10();
    let log10_uh = (lg_u - kappa_a.log10() - kappa_b.log10()).min(2.0 * lg_u);
    let digits_h = (-log10_uh).ceil();
    let digits_eig = (-log10_uh + kappa_a.max(kappa_b).log10()).ceil();
    (log10_uh, digits_h, digits_eig)
}

fn ensure_digits(d: f64) -> Result<u32> {
    if !d.is_finite() || d > f64::from(MAX_DIGITS) {
        return Err(Error::PrecisionCapExceeded {
            digits: if d.is_finite() {
                d.min(f64::from(u32::MAX)) as u32
            } else {
                u32::MAX
            },
            cap: MAX_DIGITS,
        });
    }
    Ok((d as u32).clamp(MIN_DIGITS, MAX_DIGITS))
}

struct Diagonalization {
    va: MpMatrix,
    da: MpMatrix,
    vb: MpMatrix,
    db: MpMatrix,
    kappa_a: f64,
    kappa_b: f64,
    log10_uh: f64,
    digits_h: u32,
}

/// Eigenvector computation with the greedy refinement loop: if the measured
/// κ exceeds the heuristic guess, the precision is raised and the
/// eigenvectors recomputed, at most three rounds. `Ok(None)` reports an
/// exactly repeated eigenvalue, asking for a fresh perturbation.
fn diagonalize_refined(
    at: &MpMatrix,
    bt: &MpMatrix,
    mut kappa_a: f64,
    mut kappa_b: f64,
) -> Result<Option<Diagonalization>> {
    let (mut log10_uh, _, digits_eig) = choose_precision(kappa_a, kappa_b);
    let mut eig_digits = ensure_digits(digits_eig)?;
    let mut round = 0;
    loop {
        let ctx_eig = PrecisionContext::new(eig_digits)?;
        let (va, da) = match mp_triangular_eig(&at.with_context(ctx_eig)) {
            Ok(vd) => vd,
            Err(Error::RepeatedEigenvalue { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        let (vb, db) = match mp_triangular_eig(&bt.with_context(ctx_eig)) {
            Ok(vd) => vd,
            Err(Error::RepeatedEigenvalue { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        let u_h = 10f64.powf(log10_uh);
        let ka_post = greedy_kappa_refine(&va, u_h);
        let kb_post = greedy_kappa_refine(&vb, u_h);
        let grew = ka_post > kappa_a || kb_post > kappa_b;
        kappa_a = ka_post;
        kappa_b = kb_post;
        let (l, digits_h, de) = choose_precision(kappa_a, kappa_b);
        log10_uh = l;
        let refreshed = ensure_digits(de)?;
        round += 1;
        if grew && round < MAX_REFINE_ROUNDS && refreshed > eig_digits {
            eig_digits = refreshed;
            continue;
        }
        return Ok(Some(Diagonalization {
            va,
            da,
            vb,
            db,
            kappa_a,
            kappa_b,
            log10_uh,
            digits_h: ensure_digits(digits_h)?,
        }));
    }
}

fn evaluate(
    f: &dyn BivariateFunction,
    c: &ComplexMatrix,
    s: &Diagonalization,
    perturbation_scale: (f64, f64),
) -> Result<(ComplexMatrix, DiagPlan)> {
    let ctx_eig = s.va.ctx();
    let ctx_h = PrecisionContext::new(s.digits_h)?;
    let m = s.va.rows();
    let n = s.vb.rows();
    let c_mp = promote(c, ctx_eig);
    let ct = mp_matmul(&mp_triangular_solve(&s.va, &c_mp, None)?, &s.vb, None)?;

    let xs: Vec<MpComplex> = (0..m)
        .map(|i| MpComplex::from_parts(ctx_h, s.da.get(i, i).real(), s.da.get(i, i).imag()))
        .collect();
    let ys: Vec<MpComplex> = (0..n)
        .map(|j| MpComplex::from_parts(ctx_h, s.db.get(j, j).real(), s.db.get(j, j).imag()))
        .collect();
    let mut g = MpMatrix::zeros(m, n, ctx_h);
    for i in 0..m {
        for j in 0..n {
            if f.is_singular_at(xs[i].to_c64(), ys[j].to_c64()) {
                return Err(Error::SingularFunctionValue {
                    lambda: xs[i].to_c64(),
                    mu: ys[j].to_c64(),
                });
            }
            g.set(i, j, &f.eval_mp(&xs[i], &ys[j]));
        }
    }

    let h = mp_hadamard(&g, &ct, Some(ctx_eig))?;
    let r = mp_triangular_rsolve(&mp_matmul(&s.va, &h, None)?, &s.vb, None)?;
    let (result, _) = demote(&r);
    Ok((
        result,
        DiagPlan {
            kappa_a: s.kappa_a,
            kappa_b: s.kappa_b,
            u_h: 10f64.powf(s.log10_uh),
            digits: s.digits_h,
            perturbation_scale,
        },
    ))
}

/// Atomic-block evaluation by randomized diagonalization. Both blocks get
/// independent uniform-phase diagonal perturbations of magnitude ‖·‖_F u/√m,
/// drawn from per-side substreams of `rng_seed`; draws that leave an exact
/// eigenvalue tie are retried up to four times.
pub fn fun2_atom_diag(
    f: &dyn BivariateFunction,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    rng_seed: u64,
) -> Result<(ComplexMatrix, DiagPlan)> {
    fun2_atom_diag_with(f, a, b, c, rng_seed, SUBBLOCK_DELTA)
}

/// As `fun2_atom_diag`, with the sub-blocking separation of the condition
/// estimate exposed (the engine threads its delta1 option through here).
pub(crate) fn fun2_atom_diag_with(
    f: &dyn BivariateFunction,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    rng_seed: u64,
    delta1: f64,
) -> Result<(ComplexMatrix, DiagPlan)> {
    if !a.is_square() || !b.is_square() || a.is_empty() || b.is_empty() {
        return Err(Error::arg("fun2_atom_diag", "A and B must be square and non-empty"));
    }
    if !a.is_upper_triangular() || !b.is_upper_triangular() {
        return Err(Error::arg("fun2_atom_diag", "A and B must be upper triangular"));
    }
    if c.rows() != a.rows() || c.cols() != b.rows() {
        return Err(Error::arg(
            "fun2_atom_diag",
            format!("C must be {} x {}", a.rows(), b.rows()),
        ));
    }
    let mag_a = perturbation_magnitude(a);
    let mag_b = perturbation_magnitude(b);
    let ctx_work = PrecisionContext::new(PERTURB_DIGITS)?;
    let a_work = promote(a, ctx_work);
    let b_work = promote(b, ctx_work);
    let mut rng_a = ChaCha12Rng::seed_from_u64(rng_seed);
    rng_a.set_stream(0x41);
    let mut rng_b = ChaCha12Rng::seed_from_u64(rng_seed);
    rng_b.set_stream(0x42);

    for _ in 0..MAX_ATTEMPTS {
        let at = perturbed(&a_work, &mut rng_a, mag_a);
        let bt = perturbed(&b_work, &mut rng_b, mag_b);
        let ka = kappa_estimate_mp(&at, delta1);
        let kb = kappa_estimate_mp(&bt, delta1);
        if !ka.is_finite() || !kb.is_finite() {
            continue;
        }
        match diagonalize_refined(&at, &bt, ka, kb)? {
            None => continue,
            Some(state) => return evaluate(f, c, &state, (mag_a, mag_b)),
        }
    }
    Err(Error::PerturbationBudgetExhausted {
        attempts: MAX_ATTEMPTS,
    })
}
