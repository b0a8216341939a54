//! Benchmark matrix gallery. The structured matrices (grcar, smoke, kahan,
//! lesp, sampling) are re-implemented from their standard published
//! definitions with default parameters; each generator's docstring states the
//! construction. Randomness is drawn from named ChaCha substreams of the case
//! seed, one per matrix, so the draw of one matrix never shifts another's.

use std::f64::consts::TAU;

use bivarfun::dense::{inverse, matmul, schur, spectral_norm};
use bivarfun::{ComplexMatrix, Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

pub const CASE_NAMES: [&str; 9] = [
    "rand-eig", "randn", "jordbloc", "grcar", "smoke", "kahan", "lesp", "sampling", "grcar-rand",
];

/// Substream ids off the master seed: A and B are consumed here, C by
/// `generate_c`; ids above these are free for callers (probes, perturbations).
pub const STREAM_A: u64 = 0xA;
pub const STREAM_B: u64 = 0xB;
pub const STREAM_C: u64 = 0xC;

#[derive(Clone, Debug)]
pub struct GalleryCase {
    pub name: String,
    pub n: usize,
    pub seed: u64,
}

impl GalleryCase {
    pub fn new(name: &str, n: usize, seed: u64) -> Self {
        GalleryCase { name: name.to_string(), n, seed }
    }
}

pub fn stream(seed: u64, id: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn gauss(rng: &mut ChaCha12Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Entries with independent standard-normal real and imaginary parts, drawn
/// column by column. (The variance convention is ours; the construction only
/// asks for "Gaussian".)
pub fn complex_gaussian(rows: usize, cols: usize, rng: &mut ChaCha12Rng) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = Complex64::new(gauss(rng), gauss(rng));
        }
    }
    m
}

/// V D V^{-1} with D diagonal, Re d_k uniform on [1, 2), Im d_k standard
/// normal, and V complex Gaussian.
fn rand_eig(n: usize, rng: &mut ChaCha12Rng) -> Result<ComplexMatrix> {
    let mut d = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        d[(k, k)] = Complex64::new(1.0 + rng.random::<f64>(), gauss(rng));
    }
    let v = complex_gaussian(n, n, rng);
    let vinv = inverse(&v)?;
    matmul(&matmul(&v, &d)?, &vinv)
}

/// Unitary factor of a Householder QR factorization of a complex Gaussian
/// matrix, accumulated as the product of the reflectors.
fn random_unitary(n: usize, rng: &mut ChaCha12Rng) -> ComplexMatrix {
    let mut a = complex_gaussian(n, n, rng);
    let mut q = ComplexMatrix::identity(n);
    for k in 0..n {
        let xnorm = (k..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let akk = a[(k, k)];
        let phase = if akk == Complex64::new(0.0, 0.0) { Complex64::new(1.0, 0.0) } else { akk / akk.norm() };
        let beta = -phase * xnorm;
        let mut v = vec![Complex64::new(0.0, 0.0); n - k];
        for i in k..n {
            v[i - k] = a[(i, k)];
        }
        v[0] -= beta;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let tau = 2.0 / vnorm2;
        // a <- H a on the trailing block, q <- q H on all rows
        for j in k..n {
            let mut s = Complex64::new(0.0, 0.0);
            for i in k..n {
                s += v[i - k].conj() * a[(i, j)];
            }
            s *= tau;
            for i in k..n {
                a[(i, j)] -= s * v[i - k];
            }
        }
        for i in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for j in k..n {
                s += q[(i, j)] * v[j - k];
            }
            s *= tau;
            for j in k..n {
                q[(i, j)] -= s * v[j - k].conj();
            }
        }
    }
    q
}

/// Q (J ⊕ (G + I)) Q^* with J the 8x8 Jordan block at eigenvalue 0.1, G a
/// complex Gaussian of size n-8, and Q a random unitary from a Householder QR
/// of a complex Gaussian.
fn jordbloc(n: usize, rng: &mut ChaCha12Rng) -> Result<ComplexMatrix> {
    let mut j = ComplexMatrix::zeros(n, n);
    for k in 0..8 {
        j[(k, k)] = Complex64::new(0.1, 0.0);
        if k + 1 < 8 {
            j[(k, k + 1)] = Complex64::new(1.0, 0.0);
        }
    }
    let m = n - 8;
    let mut g = complex_gaussian(m, m, rng);
    for k in 0..m {
        g[(k, k)] += 1.0;
    }
    j.set_block(8, 8, &g);
    let q = random_unitary(n, rng);
    matmul(&matmul(&q, &j)?, &q.conj_transpose())
}

/// Toeplitz matrix with -1 on the subdiagonal and +1 on the diagonal and the
/// first three superdiagonals (the grcar matrix with its default k = 3).
fn grcar(n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j + 1 {
            Complex64::new(-1.0, 0.0)
        } else if j >= i && j <= i + 3 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Complex Schur factor of the smoke matrix: diag(w, w^2, ..., w^n) for
/// w = exp(2*pi*i/n), ones on the superdiagonal and in the (n,1) corner.
/// Its eigenvalues are the n-th roots of 2.
fn smoke(n: usize) -> Result<ComplexMatrix> {
    let mut a = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        a[(k, k)] = Complex64::from_polar(1.0, TAU * (k + 1) as f64 / n as f64);
        if k + 1 < n {
            a[(k, k + 1)] = Complex64::new(1.0, 0.0);
        }
    }
    a[(n - 1, 0)] = Complex64::new(1.0, 0.0);
    Ok(schur(&a)?.t)
}

/// Upper-triangular Kahan matrix with the default angle 1.2: writing
/// s = sin 1.2 and c = cos 1.2, row i carries s^i on the diagonal and -c s^i
/// to its right, so the diagonal is (1, s, s^2, ...).
fn kahan(n: usize) -> ComplexMatrix {
    let (s, c) = (1.2f64.sin(), 1.2f64.cos());
    ComplexMatrix::from_fn(n, n, |i, j| {
        let row = s.powi(i as i32);
        if j == i {
            Complex64::new(row, 0.0)
        } else if j > i {
            Complex64::new(-c * row, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

fn direct_sum(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (m, n) = (a.rows(), b.rows());
    let mut out = ComplexMatrix::zeros(m + n, m + n);
    out.set_block(0, 0, a);
    out.set_block(m, m, b);
    out
}

/// Complex Gaussian rescaled to unit spectral norm, shifted by the identity:
/// G/‖G‖₂ + shift·I.
fn unit_norm_gaussian_shifted(m: usize, shift: f64, rng: &mut ChaCha12Rng) -> ComplexMatrix {
    let g = complex_gaussian(m, m, rng);
    let nrm = spectral_norm(&g);
    let mut r = if nrm > 0.0 { g.scale(Complex64::new(1.0 / nrm, 0.0)) } else { g };
    for k in 0..m {
        r[(k, k)] += shift;
    }
    r
}

/// Minus the direct sum of the Schur factor of the 32x32 lesp matrix and a
/// unit-spectral-norm complex Gaussian minus the identity. lesp is the
/// tridiagonal matrix with diagonal -(2k+3), superdiagonal k+1 and
/// subdiagonal 1/(k+1) in 1-based indexing; its eigenvalues are real,
/// negative and increasingly sensitive towards the negative end.
fn lesp_case(n: usize, rng: &mut ChaCha12Rng) -> Result<ComplexMatrix> {
    let m = 32usize;
    let mut l = ComplexMatrix::zeros(m, m);
    for k in 0..m {
        l[(k, k)] = Complex64::new(-(2.0 * (k + 1) as f64 + 3.0), 0.0);
        if k + 1 < m {
            l[(k, k + 1)] = Complex64::new((k + 2) as f64, 0.0);
            l[(k + 1, k)] = Complex64::new(1.0 / (k + 2) as f64, 0.0);
        }
    }
    let t = schur(&l)?.t;
    let r = unit_norm_gaussian_shifted(n - m, -1.0, rng);
    Ok(direct_sum(&t, &r).scale(Complex64::new(-1.0, 0.0)))
}

/// Direct sum of the 32x32 sampling matrix and a unit-spectral-norm complex
/// Gaussian plus the identity. sampling on the nodes x_k = k/32 has
/// off-diagonal entries x_i/(x_i - x_j) and diagonal entries the row sums of
/// the rest; its eigenvalues are the integers 0..31, with ill-conditioned
/// eigenvectors.
fn sampling_case(n: usize, rng: &mut ChaCha12Rng) -> Result<ComplexMatrix> {
    let m = 32usize;
    let x: Vec<f64> = (1..=m).map(|k| k as f64 / m as f64).collect();
    let mut s = ComplexMatrix::zeros(m, m);
    for i in 0..m {
        let mut row_sum = 0.0;
        for j in 0..m {
            if i != j {
                let v = x[i] / (x[i] - x[j]);
                s[(i, j)] = Complex64::new(v, 0.0);
                row_sum += v;
            }
        }
        s[(i, i)] = Complex64::new(row_sum, 0.0);
    }
    let r = unit_norm_gaussian_shifted(n - m, 1.0, rng);
    Ok(direct_sum(&s, &r))
}

/// Builds the (A, B) pair of a gallery case. A draws from substream 0xA of
/// the seed and B from 0xB; the deterministic cases (grcar, smoke, kahan) use
/// the same matrix for both sides.
pub fn generate(case: &GalleryCase) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let n = case.n;
    let need = |min: usize| -> Result<()> {
        if n < min {
            Err(Error::arg(
                "generate",
                format!("gallery case {} needs n >= {min}, got {n}", case.name),
            ))
        } else {
            Ok(())
        }
    };
    let mut ra = stream(case.seed, STREAM_A);
    let mut rb = stream(case.seed, STREAM_B);
    match case.name.as_str() {
        "rand-eig" => {
            need(1)?;
            Ok((rand_eig(n, &mut ra)?, rand_eig(n, &mut rb)?))
        }
        "randn" => {
            need(1)?;
            Ok((
                complex_gaussian(n, n, &mut ra),
                complex_gaussian(n, n, &mut rb),
            ))
        }
        "jordbloc" => {
            need(9)?;
            Ok((jordbloc(n, &mut ra)?, jordbloc(n, &mut rb)?))
        }
        "grcar" => {
            need(1)?;
            let a = grcar(n);
            Ok((a.clone(), a))
        }
        "smoke" => {
            need(2)?;
            let a = smoke(n)?;
            Ok((a.clone(), a))
        }
        "kahan" => {
            need(1)?;
            let a = kahan(n);
            Ok((a.clone(), a))
        }
        "lesp" => {
            need(33)?;
            Ok((lesp_case(n, &mut ra)?, lesp_case(n, &mut rb)?))
        }
        "sampling" => {
            need(33)?;
            Ok((sampling_case(n, &mut ra)?, sampling_case(n, &mut rb)?))
        }
        "grcar-rand" => {
            need(1)?;
            Ok((grcar(n), rand_eig(n, &mut rb)?))
        }
        other => Err(Error::arg("generate", format!("unknown gallery case {other:?}"))),
    }
}

/// The right-hand-side draw that goes with a case: complex Gaussian from the
/// C substream of the same seed.
pub fn generate_c(case: &GalleryCase) -> ComplexMatrix {
    complex_gaussian(case.n, case.n, &mut stream(case.seed, STREAM_C))
}
