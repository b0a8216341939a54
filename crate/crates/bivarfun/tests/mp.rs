use bivarfun::dense::ComplexMatrix;
use bivarfun::mp::{
    demote, mp_hadamard, mp_matmul, mp_norm_fro, mp_triangular_eig, mp_triangular_rsolve,
    mp_triangular_solve, promote, MpComplex, MpMatrix, PrecisionContext,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

fn z(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn gauss(rng: &mut ChaCha12Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    z(re, im)
}

fn rand_matrix(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    ComplexMatrix::from_fn(rows, cols, |_, _| gauss(&mut rng))
}

fn rand_triangular(n: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            z(1.0 + i as f64, 0.0) + 0.3 * gauss(&mut rng)
        } else if i < j {
            gauss(&mut rng)
        } else {
            z(0.0, 0.0)
        }
    })
}

fn ctx(digits: u32) -> PrecisionContext {
    PrecisionContext::new(digits).unwrap()
}

/// T X - B evaluated 32 digits above the working context, as a double.
fn solve_residual(t: &MpMatrix, x: &MpMatrix, b: &MpMatrix) -> f64 {
    let hi = ctx(t.ctx().digits() + 32);
    let tx = mp_matmul(&t.with_context(hi), &x.with_context(hi), None).unwrap();
    let r = tx.sub(&b.with_context(hi)).unwrap();
    mp_norm_fro(&r).to_f64()
}

#[test]
fn context_rejects_out_of_range_digits() {
    assert!(PrecisionContext::new(15).is_err());
    assert!(PrecisionContext::new(4097).is_err());
    assert!(PrecisionContext::new(16).is_ok());
    assert!(PrecisionContext::new(4096).is_ok());
}

#[test]
fn context_monotone_unit_roundoff() {
    assert!(ctx(32).unit_roundoff() > ctx(64).unit_roundoff());
    assert_eq!(ctx(16).unit_roundoff(), 1e-16);
}

#[test]
fn promote_identity_is_exact() {
    let m = promote(&ComplexMatrix::identity(2), ctx(64));
    let (back, overflow) = demote(&m);
    assert!(!overflow);
    assert_eq!(back.raw(), ComplexMatrix::identity(2).raw());
}

#[test]
fn promote_demote_round_trip_is_identity() {
    let m = rand_matrix(5, 4, 21);
    let (back, overflow) = demote(&promote(&m, ctx(16)));
    assert!(!overflow);
    assert_eq!(back.raw(), m.raw());
}

#[test]
fn promoted_tenth_differs_from_decimal_tenth() {
    let m = ComplexMatrix::from_rows(1, 1, &[z(0.1, 0.0)]);
    let p = promote(&m, ctx(64));
    let exact = rug::Float::with_val(ctx(64).bits(), rug::Float::parse("0.1").unwrap());
    let x = p.get(0, 0);
    let diff = (x.to_c64().re - 0.1).abs(); // zero in doubles
    assert_eq!(diff, 0.0);
    let mag = (x.real() - exact).abs().to_f64();
    assert!((mag - 5.55e-18).abs() < 0.02e-18, "got {mag:e}");
}

#[test]
fn demote_small_integers_unchanged() {
    let m = ComplexMatrix::from_rows(2, 1, &[z(3.0, -7.0), z(0.0, 1.0)]);
    let (back, overflow) = demote(&promote(&m, ctx(100)));
    assert!(!overflow);
    assert_eq!(back.raw(), m.raw());
}

#[test]
fn demote_overflow_sets_flag() {
    let mut m = MpMatrix::zeros(1, 1, ctx(32));
    let big = MpComplex::new(ctx(32), 1e308, 0.0);
    let big = big.mul(&MpComplex::new(ctx(32), 1e100, 0.0));
    m.set(0, 0, &big);
    let (back, overflow) = demote(&m);
    assert!(overflow);
    assert!(back[(0, 0)].re.is_infinite());
}

#[test]
fn demote_pi_rounds_to_nearest_double() {
    let c64 = ctx(64);
    let bits = c64.bits();
    let pi = rug::Float::with_val(bits, rug::float::Constant::Pi);
    let zero = rug::Float::with_val(bits, 0);
    let mut m = MpMatrix::zeros(1, 1, c64);
    m.set(0, 0, &MpComplex::from_parts(c64, pi.clone(), zero));
    let (back, overflow) = demote(&m);
    assert!(!overflow);
    let err = (rug::Float::with_val(bits, back[(0, 0)].re) - &pi).to_f64().abs();
    assert!(err <= std::f64::consts::PI * 2f64.powi(-53));
}

#[test]
fn mp_matmul_identity_exact() {
    for digits in [16u32, 64, 300] {
        let c = ctx(digits);
        let m = promote(&rand_matrix(4, 4, 22), c);
        let id = MpMatrix::identity(4, c);
        let p = mp_matmul(&id, &m, None).unwrap();
        let (pd, _) = demote(&p);
        let (md, _) = demote(&m);
        assert_eq!(pd.raw(), md.raw());
    }
}

#[test]
fn mp_third_times_three_is_one_to_127_digits() {
    let c = ctx(128);
    let three = MpComplex::new(c, 3.0, 0.0);
    let x = three.recip();
    let y = x.scale_f64(3.0).sub(&MpComplex::new(c, 1.0, 0.0));
    assert!(y.abs_f64() <= 1e-127);
}

#[test]
fn mp_matmul_context_mismatch_is_an_error() {
    let a = promote(&rand_matrix(2, 2, 23), ctx(32));
    let b = promote(&rand_matrix(2, 2, 24), ctx(64));
    assert!(mp_matmul(&a, &b, None).is_err());
    assert!(mp_matmul(&a, &b, Some(ctx(64))).is_ok());
}

#[test]
fn mp_triangular_solve_residual() {
    let c64 = ctx(64);
    let t = promote(&rand_triangular(8, 25), c64);
    let b = promote(&rand_matrix(8, 3, 26), c64);
    let x = mp_triangular_solve(&t, &b, None).unwrap();
    let scale = mp_norm_fro(&t).to_f64() * mp_norm_fro(&x).to_f64();
    assert!(solve_residual(&t, &x, &b) <= 1e-60 * scale);
}

#[test]
fn mp_triangular_rsolve_residual() {
    let c64 = ctx(64);
    let t = promote(&rand_triangular(6, 27), c64);
    let b = promote(&rand_matrix(4, 6, 28), c64);
    let x = mp_triangular_rsolve(&b, &t, None).unwrap();
    let hi = ctx(96);
    let xt = mp_matmul(&x.with_context(hi), &t.with_context(hi), None).unwrap();
    let r = xt.sub(&b.with_context(hi)).unwrap();
    let scale = mp_norm_fro(&t).to_f64() * mp_norm_fro(&x).to_f64();
    assert!(mp_norm_fro(&r).to_f64() <= 1e-60 * scale);
}

#[test]
fn mp_hadamard_matches_entrywise() {
    let c = ctx(32);
    let a = promote(&rand_matrix(3, 3, 29), c);
    let b = promote(&rand_matrix(3, 3, 30), c);
    let h = mp_hadamard(&a, &b, None).unwrap();
    let (hd, _) = demote(&h);
    let (ad, _) = demote(&a);
    let (bd, _) = demote(&b);
    for j in 0..3 {
        for i in 0..3 {
            let want = ad[(i, j)] * bd[(i, j)];
            assert!((hd[(i, j)] - want).norm() <= 1e-15 * want.norm());
        }
    }
}

#[test]
fn eig_of_diagonal_is_identity() {
    let c = ctx(32);
    let t = promote(
        &ComplexMatrix::from_fn(3, 3, |i, j| if i == j { z(i as f64 + 1.0, 0.5) } else { z(0.0, 0.0) }),
        c,
    );
    let (v, d) = mp_triangular_eig(&t).unwrap();
    let (vd, _) = demote(&v);
    assert_eq!(vd.raw(), ComplexMatrix::identity(3).raw());
    let (dd, _) = demote(&d);
    let (td, _) = demote(&t);
    assert_eq!(dd.raw(), td.raw());
}

#[test]
fn eig_two_by_two_by_hand() {
    let c = ctx(32);
    let t = promote(
        &ComplexMatrix::from_rows(2, 2, &[z(1.0, 0.0), z(1.0, 0.0), z(0.0, 0.0), z(2.0, 0.0)]),
        c,
    );
    let (v, d) = mp_triangular_eig(&t).unwrap();
    let (vd, _) = demote(&v);
    assert_eq!(vd[(0, 0)], z(1.0, 0.0));
    assert_eq!(vd[(0, 1)], z(1.0, 0.0));
    assert_eq!(vd[(1, 1)], z(1.0, 0.0));
    let (dd, _) = demote(&d);
    assert_eq!(dd[(0, 0)], z(1.0, 0.0));
    assert_eq!(dd[(1, 1)], z(2.0, 0.0));
}

#[test]
fn eig_repeated_diagonal_is_an_error() {
    let c = ctx(32);
    let t = promote(
        &ComplexMatrix::from_rows(2, 2, &[z(1.0, 0.0), z(1.0, 0.0), z(0.0, 0.0), z(1.0, 0.0)]),
        c,
    );
    assert!(mp_triangular_eig(&t).is_err());
}

#[test]
fn eig_residual_random_16() {
    let c64 = ctx(64);
    let t = promote(&rand_triangular(16, 31), c64);
    let (v, d) = mp_triangular_eig(&t).unwrap();
    let hi = ctx(96);
    let tv = mp_matmul(&t.with_context(hi), &v.with_context(hi), None).unwrap();
    let vd = mp_matmul(&v.with_context(hi), &d.with_context(hi), None).unwrap();
    let r = tv.sub(&vd).unwrap();
    let scale = mp_norm_fro(&t).to_f64() * mp_norm_fro(&v).to_f64();
    assert!(mp_norm_fro(&r).to_f64() <= 1e-60 * scale);
}

#[test]
fn eig_columns_satisfy_shifted_system() {
    let c64 = ctx(64);
    let t = promote(&rand_triangular(10, 32), c64);
    let (v, d) = mp_triangular_eig(&t).unwrap();
    let hi = ctx(96);
    let tv = mp_matmul(&t.with_context(hi), &v.with_context(hi), None).unwrap();
    let vd = mp_matmul(&v.with_context(hi), &d.with_context(hi), None).unwrap();
    let r = tv.sub(&vd).unwrap();
    // column j of TV - VD is (T - d_j I) v_j; its leading j+1 rows must vanish
    let tnorm = mp_norm_fro(&t).to_f64();
    for j in 0..10 {
        let mut col = 0.0f64;
        let mut vnorm = 0.0f64;
        for i in 0..=j {
            col += r.get(i, j).abs_f64().powi(2);
            vnorm += v.get(i, j).abs_f64().powi(2);
        }
        assert!(col.sqrt() <= 1e-58 * tnorm * vnorm.sqrt().max(1.0));
    }
}

#[test]
fn precision_monotonicity_of_residuals() {
    let mut last = f64::INFINITY;
    for digits in [32u32, 64, 128] {
        let c = ctx(digits);
        let t = promote(&rand_triangular(8, 33), c);
        let b = promote(&rand_matrix(8, 2, 34), c);
        let x = mp_triangular_solve(&t, &b, None).unwrap();
        let r = solve_residual(&t, &x, &b);
        assert!(r <= last, "residual grew when raising digits to {digits}");
        last = r;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn promote_demote_bitwise_identity(re in prop::num::f64::NORMAL, im in prop::num::f64::NORMAL) {
        let m = ComplexMatrix::from_rows(1, 1, &[z(re, im)]);
        let (back, overflow) = demote(&promote(&m, ctx(16)));
        prop_assert!(!overflow);
        prop_assert_eq!(back[(0, 0)].re.to_bits(), re.to_bits());
        prop_assert_eq!(back[(0, 0)].im.to_bits(), im.to_bits());
    }
}
