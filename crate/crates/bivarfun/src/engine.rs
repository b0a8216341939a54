//! The public evaluation engine.
//!
//! `fun2m` dispatches normal coefficient matrices to explicit
//! diagonalization (whole-matrix, row-wise, or column-wise), and everything
//! else to the Schur path: cluster both spectra, build one split tree per
//! side with the Sylvester solutions precomputed, run the block recursion,
//! and undo the unitary reductions. The driver-level operations (`fun2m`,
//! `fun2_diag`, `fun2_diag_a`, `fun2_diag_b`) compute
//! sum_{ij} t_ij A^i C (B^T)^j of their literal arguments; the triangular
//! kernels (`fun2m_rec`, `corollary_2x2`) receive the already-transposed
//! right side and apply powers of it directly, sum_{ij} t_ij A^i C B^j.

use std::time::Instant;

use num_complex::Complex64;

use crate::atom::{fun2_atom_diag_with, fun2_atom_taylor};
use crate::blocking::{blocking, build_tree, precompute_sylvesters, PartitionTree, Side};
pub use crate::blocking::SplitStrategy;
use crate::dense::{matmul, reorder_schur, schur, solve_lu, ComplexMatrix, UNIT_ROUNDOFF};
use crate::error::{Error, Result};
use crate::funcs::BivariateFunction;
use crate::mp::MpComplex;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum AtomMethod {
    /// Truncated bivariate Taylor expansion; needs mixed partials of f.
    Taylor,
    /// Randomized perturb-and-diagonalize in adaptive multiprecision.
    Diag,
}

/// Tuning knobs of the evaluation engine.
#[derive(Clone, Debug)]
pub struct EvalOptions {
    pub atom_method: AtomMethod,
    /// Cluster separation of the Schur blocking.
    pub delta: f64,
    /// Sub-cluster separation used by the diagonalization evaluator's
    /// condition estimate; must stay below `delta`.
    pub delta1: f64,
    /// Recursion floor: blocks this small are evaluated atomically without
    /// further splitting (diag atoms only; Taylor atoms must keep the
    /// clustering the blocking produced).
    pub n_min: usize,
    pub strategy: SplitStrategy,
    /// Remainder tolerance of the Taylor degree selection.
    pub epsilon: f64,
    /// Ill-conditioning threshold for precomputed Sylvester solutions:
    /// a split is rejected when norm(V) / norm(rhs) > gamma / delta.
    pub gamma: f64,
    /// Master seed of the diagonalization evaluator's perturbation draws;
    /// each atomic block derives its own stream from this and its position.
    pub seed: u64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            atom_method: AtomMethod::Diag,
            delta: 0.1,
            delta1: 5e-3,
            n_min: 4,
            strategy: SplitStrategy::Balanced,
            epsilon: UNIT_ROUNDOFF,
            gamma: 10.0,
            seed: 0,
        }
    }
}

impl EvalOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(Error::arg("opts.delta", "must be positive and finite"));
        }
        if !(self.delta1 > 0.0) || self.delta1 >= self.delta {
            return Err(Error::arg("opts.delta1", "must satisfy 0 < delta1 < delta"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::arg("opts.epsilon", "must lie in (0, 1)"));
        }
        if self.n_min < 1 {
            return Err(Error::arg("opts.n_min", "must be at least 1"));
        }
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::arg("opts.gamma", "must be positive and finite"));
        }
        Ok(())
    }
}

/// What one `fun2m` call did, returned alongside the result (also on error,
/// for diagnostics).
#[derive(Clone, Debug, Default, serde::Serialize)]
pub struct EvalReport {
    /// Atomic blocks per side after merging and the n_min cut; zero when a
    /// normality fast path skipped the blocking entirely.
    pub n_blocks_a: usize,
    pub n_blocks_b: usize,
    /// Largest decimal precision any diagonalization atom worked at.
    pub max_digits: u32,
    /// Largest degree any Taylor atom selected.
    pub max_taylor_degree: usize,
    /// Ill-conditioned splits collapsed into atomic blocks.
    pub merges: usize,
    pub wall_time: f64,
    /// MERGE/WARN lines from the Sylvester precomputation.
    pub diagnostics: Vec<String>,
}

// ---------------------------------------------------------------------------
// normality test and dense eigendecomposition
// ---------------------------------------------------------------------------

/// Frobenius-norm commutator test: ||A*A - AA*||_F <= 10 m u ||A||_F^2.
fn is_normal(a: &ComplexMatrix) -> Result<bool> {
    let m = a.rows();
    if m <= 1 {
        return Ok(true);
    }
    let ah = a.conj_transpose();
    let comm = matmul(&ah, a)?.sub(&matmul(a, &ah)?);
    let na = a.frobenius_norm();
    Ok(comm.frobenius_norm() <= 10.0 * m as f64 * UNIT_ROUNDOFF * na * na)
}

/// Eigenvectors of an upper triangular matrix by back-substitution, one
/// unit-normalized column per diagonal entry. Exactly zero right-hand sides
/// keep the coordinate direction (so diagonal matrices with repeated entries
/// come out as the identity); small divisors are clamped to u * max|T| in
/// the LAPACK manner, trading an error for a large-but-finite eigenvector
/// at nearly defective pairs.
pub fn triangular_eigenvectors(t: &ComplexMatrix) -> ComplexMatrix {
    let n = t.rows();
    let mut v = ComplexMatrix::identity(n);
    let guard = UNIT_ROUNDOFF * t.max_abs();
    for j in 1..n {
        let ljj = t[(j, j)];
        for i in (0..j).rev() {
            let mut s = Complex64::new(0.0, 0.0);
            for k in (i + 1)..=j {
                s += t[(i, k)] * v[(k, j)];
            }
            if s == Complex64::new(0.0, 0.0) {
                continue;
            }
            let mut den = t[(i, i)] - ljj;
            let dn = den.norm();
            if dn < guard {
                den = if dn == 0.0 {
                    Complex64::new(guard, 0.0)
                } else {
                    den * (guard / dn)
                };
            }
            v[(i, j)] = -s / den;
        }
        let nrm = (0..=j).map(|i| v[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        if nrm.is_finite() && nrm > 0.0 {
            for i in 0..=j {
                v[(i, j)] /= nrm;
            }
        }
    }
    v
}

/// Eigendecomposition A = S diag(d) S^{-1} via the Schur form, with
/// unit-norm eigenvector columns. Never rejects defective input: near-parallel
/// columns are clamped rather than refused, so S can be arbitrarily
/// ill-conditioned and the caller is expected to check `cond_estimate` when
/// accuracy matters.
pub fn eig_dense(a: &ComplexMatrix) -> Result<(ComplexMatrix, Vec<Complex64>)> {
    let s = schur(a)?;
    let v = triangular_eigenvectors(&s.t);
    let d = s.t.diag();
    Ok((matmul(&s.q, &v)?, d))
}

// ---------------------------------------------------------------------------
// argument-swapped view of a function (for the row-wise evaluator)
// ---------------------------------------------------------------------------

struct Swapped<'a> {
    inner: &'a dyn BivariateFunction,
    name: String,
}

impl<'a> Swapped<'a> {
    fn new(inner: &'a dyn BivariateFunction) -> Self {
        let name = format!("swap({})", inner.name());
        Swapped { inner, name }
    }
}

impl BivariateFunction for Swapped<'_> {
    fn name(&self) -> &str {
        &self.name
    }

    fn eval(&self, x: Complex64, y: Complex64) -> Complex64 {
        self.inner.eval(y, x)
    }

    fn eval_mp(&self, x: &MpComplex, y: &MpComplex) -> MpComplex {
        self.inner.eval_mp(y, x)
    }

    fn partial(&self, i: u32, j: u32, x: Complex64, y: Complex64) -> Option<Complex64> {
        self.inner.partial(j, i, y, x)
    }

    fn max_order(&self) -> u32 {
        self.inner.max_order()
    }

    fn has_partials(&self) -> bool {
        self.inner.has_partials()
    }

    fn conj_symmetric(&self) -> bool {
        self.inner.conj_symmetric()
    }

    fn is_singular_at(&self, x: Complex64, y: Complex64) -> bool {
        self.inner.is_singular_at(y, x)
    }

    fn term_log_abs(&self, i: u32, j: u32, x: Complex64, y: Complex64) -> Option<f64> {
        self.inner.term_log_abs(j, i, y, x)
    }

    fn taylor_coeff(&self, i: u32, j: u32, x: Complex64, y: Complex64) -> Option<Complex64> {
        self.inner.taylor_coeff(j, i, y, x)
    }
}

// ---------------------------------------------------------------------------
// diagonal fast paths
// ---------------------------------------------------------------------------

fn check_dims(op: &'static str, a: &ComplexMatrix, b: &ComplexMatrix, c: &ComplexMatrix) -> Result<()> {
    if !a.is_square() || !b.is_square() {
        return Err(Error::arg(op, "A and B must be square"));
    }
    if c.rows() != a.rows() || c.cols() != b.rows() {
        return Err(Error::arg(
            op,
            format!("C must be {} x {}", a.rows(), b.rows()),
        ));
    }
    if !a.is_finite() || !b.is_finite() || !c.is_finite() {
        return Err(Error::arg(op, "inputs must be finite"));
    }
    Ok(())
}

/// X -> X S^{-T} through one transposed solve.
fn right_solve_transposed(x: &ComplexMatrix, s: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(solve_lu(s, &x.transpose())?.transpose())
}

fn check_grid_analytic(f: &dyn BivariateFunction, da: &[Complex64], db: &[Complex64]) -> Result<()> {
    for &x in da {
        for &y in db {
            if f.is_singular_at(x, y) {
                return Err(Error::SingularFunctionValue { lambda: x, mu: y });
            }
        }
    }
    Ok(())
}

/// Whole-matrix diagonalization: S_A (F o C~) S_B^T with C~ = S_A^{-1} C S_B^{-T}
/// and F_ij = f(lambda_i, mu_j).
pub fn fun2_diag(
    f: &dyn BivariateFunction,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    check_dims("fun2_diag", a, b, c)?;
    if a.is_empty() || b.is_empty() {
        return Ok(ComplexMatrix::zeros(c.rows(), c.cols()));
    }
    let (sa, da) = eig_dense(a)?;
    let (sb, db) = eig_dense(b)?;
    check_grid_analytic(f, &da, &db)?;
    let mut ct = right_solve_transposed(&solve_lu(&sa, c)?, &sb)?;
    for i in 0..ct.rows() {
        for j in 0..ct.cols() {
            ct[(i, j)] *= f.eval(da[i], db[j]);
        }
    }
    matmul(&matmul(&sa, &ct)?, &sb.transpose())
}

/// Row-wise evaluation after diagonalizing A: row k of the inner result is
/// c~_k f_{lambda_k}(B^T), obtained by delegating each row to the engine
/// with the arguments swapped and a 1 x 1 second coefficient.
pub fn fun2_diag_a(
    f: &dyn BivariateFunction,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let mut report = EvalReport::default();
    diag_a_impl(f, a, b, c, &EvalOptions::default(), &mut report)
}

fn diag_a_impl(
    f: &dyn BivariateFunction,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    opts: &EvalOptions,
    report: &mut EvalReport,
) -> Result<ComplexMatrix> {
    check_dims("fun2_diag_a", a, b, c)?;
    if a.is_empty() || b.is_empty() {
        return Ok(ComplexMatrix::zeros(c.rows(), c.cols()));
    }
    let (sa, da) = eig_dense(a)?;
    let ct = solve_lu(&sa, c)?;
    let swapped = Swapped::new(f);
    let n = b.rows();
    let mut d = ComplexMatrix::zeros(a.rows(), n);
    for (k, &lam) in da.iter().enumerate() {
        let rhs = ct.block(k, 0, 1, n).transpose();
        let lam1 = ComplexMatrix::from_rows(1, 1, &[lam]);
        let row = fun2m_impl(&swapped, b, &lam1, &rhs, opts, report)?;
        d.set_block(k, 0, &row.transpose());
    }
    matmul(&sa, &d)
}

/// Column-wise evaluation after diagonalizing B: column j of the result
/// before the basis change back is f_{mu_j}(A) c~_j, delegated to the engine
/// with a 1 x 1 second coefficient.
pub fn fun2_diag_b(
    f: &dyn BivariateFunction,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let mut report = EvalReport::default();
    diag_b_impl(f, a, b, c, &EvalOptions::default(), &mut report)
}

fn diag_b_impl(
    f: &dyn BivariateFunction,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    opts: &EvalOptions,
    report: &mut EvalReport,
) -> Result<ComplexMatrix> {
    check_dims("fun2_diag_b", a, b, c)?;
    if a.is_empty() || b.is_empty() {
        return Ok(ComplexMatrix::zeros(c.rows(), c.cols()));
    }
    if b.rows() == 1 {
        // Scalar second coefficient: evaluate the univariate function of A
        // through the Schur recursion directly. Delegating to fun2m here
        // would bounce straight back (a 1 x 1 matrix is always normal).
        return general_path(f, a, b, c, opts, report);
    }
    let (sb, db) = eig_dense(b)?;
    let ct = right_solve_transposed(c, &sb)?;
    let m = a.rows();
    let mut d = ComplexMatrix::zeros(m, b.rows());
    for (j, &mu) in db.iter().enumerate() {
        let rhs = ct.block(0, j, m, 1);
        let mu1 = ComplexMatrix::from_rows(1, 1, &[mu]);
        let col = fun2m_impl(f, a, &mu1, &rhs, opts, report)?;
        d.set_block(0, j, &col);
    }
    matmul(&d, &sb.transpose())
}

// ---------------------------------------------------------------------------
// top-level driver
// ---------------------------------------------------------------------------

/// Evaluates the bivariate matrix function of (A, B) applied to C.
///
/// Normal coefficients take the diagonalization fast paths; otherwise both
/// sides are Schur-reduced (B through its transpose), their spectra
/// clustered at `opts.delta`, and the splitting recursion runs over the
/// per-side partition trees. The report is returned in both the success and
/// the error case.
pub fn fun2m(
    f: &dyn BivariateFunction,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    opts: &EvalOptions,
) -> (Result<ComplexMatrix>, EvalReport) {
    let start = Instant::now();
    let mut report = EvalReport::default();
    let res = fun2m_impl(f, a, b, c, opts, &mut report);
    report.wall_time = start.elapsed().as_secs_f64();
    (res, report)
}

fn fun2m_impl(
    f: &dyn BivariateFunction,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    opts: &EvalOptions,
    report: &mut EvalReport,
) -> Result<ComplexMatrix> {
    opts.validate()?;
    check_dims("fun2m", a, b, c)?;
    if a.is_empty() || b.is_empty() {
        return Ok(ComplexMatrix::zeros(c.rows(), c.cols()));
    }
    let a_normal = is_normal(a)?;
    let b_normal = is_normal(b)?;
    if a_normal && b_normal {
        fun2_diag(f, a, b, c)
    } else if a_normal {
        diag_a_impl(f, a, b, c, opts, report)
    } else if b_normal {
        diag_b_impl(f, a, b, c, opts, report)
    } else {
        general_path(f, a, &b.transpose(), c, opts, report)
    }
}

/// Schur path. `b_eff` is the matrix whose powers multiply C from the right
/// (the transpose of the user-facing B).
fn general_path(
    f: &dyn BivariateFunction,
    a: &ComplexMatrix,
    b_eff: &ComplexMatrix,
    c: &ComplexMatrix,
    opts: &EvalOptions,
    report: &mut EvalReport,
) -> Result<ComplexMatrix> {
    let sa = schur(a)?;
    let sb = schur(b_eff)?;
    let pa = blocking(&sa, opts.delta)?;
    let pb = blocking(&sb, opts.delta)?;
    let sa = reorder_schur(&sa, &pa.permutation)?;
    let sb = reorder_schur(&sb, &pb.permutation)?;

    let mut tree_a = build_tree(&pa, opts.strategy);
    let mut tree_b = build_tree(&pb, opts.strategy);
    let merge = opts.atom_method == AtomMethod::Diag;
    if merge {
        tree_a = prune_at(tree_a, opts.n_min);
        tree_b = prune_at(tree_b, opts.n_min);
    }
    let mut diags = Vec::new();
    let tree_a =
        precompute_sylvesters(&sa.t, tree_a, opts.gamma, opts.delta, merge, Side::A, &mut diags)?;
    let tree_b =
        precompute_sylvesters(&sb.t, tree_b, opts.gamma, opts.delta, merge, Side::B, &mut diags)?;
    report.merges += diags.iter().filter(|l| l.starts_with("MERGE")).count();
    report.diagnostics.append(&mut diags);
    report.n_blocks_a = count_leaves(&tree_a);
    report.n_blocks_b = count_leaves(&tree_b);

    let ct = matmul(&sa.q.conj_transpose(), &matmul(c, &sb.q)?)?;
    let fr = rec(f, &sa.t, &sb.t, ct, &tree_a, &tree_b, opts, report)?;
    matmul(&matmul(&sa.q, &fr)?, &sb.q.conj_transpose())
}

/// Collapses every subtree whose span is at most `n_min` indices into a leaf.
fn prune_at(tree: PartitionTree, n_min: usize) -> PartitionTree {
    if tree.span().len() <= n_min {
        return PartitionTree {
            node: tree.node,
            children: None,
            sylvester_solution: None,
            merged_flag: false,
        };
    }
    let PartitionTree { node, children, sylvester_solution, merged_flag } = tree;
    let children = children.map(|ch| {
        let [l, r] = *ch;
        Box::new([prune_at(l, n_min), prune_at(r, n_min)])
    });
    PartitionTree { node, children, sylvester_solution, merged_flag }
}

fn count_leaves(tree: &PartitionTree) -> usize {
    match &tree.children {
        None => 1,
        Some(ch) => count_leaves(&ch[0]) + count_leaves(&ch[1]),
    }
}

// ---------------------------------------------------------------------------
// splitting recursion
// ---------------------------------------------------------------------------

/// Block recursion over precomputed partition trees. `a` and `b` are the
/// full reordered triangular matrices; `c` is the block of the transformed
/// right-hand side matching the two nodes' spans. Both trees must carry
/// Sylvester solutions at their internal nodes.
pub fn fun2m_rec(
    f: &dyn BivariateFunction,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    tree_a: &PartitionTree,
    tree_b: &PartitionTree,
    opts: &EvalOptions,
) -> Result<ComplexMatrix> {
    opts.validate()?;
    if !a.is_square() || !b.is_square() || !a.is_upper_triangular() || !b.is_upper_triangular() {
        return Err(Error::arg("fun2m_rec", "A and B must be square upper triangular"));
    }
    if tree_a.span() != (0..a.rows()) || tree_b.span() != (0..b.rows()) {
        return Err(Error::arg("fun2m_rec", "trees must cover the matrices"));
    }
    if c.rows() != a.rows() || c.cols() != b.rows() {
        return Err(Error::arg(
            "fun2m_rec",
            format!("C must be {} x {}", a.rows(), b.rows()),
        ));
    }
    let mut report = EvalReport::default();
    rec(f, a, b, c.clone(), tree_a, tree_b, opts, &mut report)
}

fn node_sylvester<'t>(node: &'t PartitionTree, side: Side) -> Result<&'t ComplexMatrix> {
    node.sylvester_solution.as_ref().ok_or_else(|| Error::Internal {
        what: format!("internal node on side {side} lacks a precomputed Sylvester solution"),
    })
}

#[allow(clippy::too_many_arguments)]
fn rec(
    f: &dyn BivariateFunction,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: ComplexMatrix,
    na: &PartitionTree,
    nb: &PartitionTree,
    opts: &EvalOptions,
    report: &mut EvalReport,
) -> Result<ComplexMatrix> {
    let (la, lb) = (na.span().len(), nb.span().len());
    if la == 0 || lb == 0 {
        return Ok(ComplexMatrix::zeros(la, lb));
    }
    match (&na.children, &nb.children) {
        (None, None) => atom_eval(f, a, b, &c, na, nb, opts, report),
        (Some(ach), Some(bch)) => {
            let [al, ar] = &**ach;
            let [bl, br] = &**bch;
            let v = node_sylvester(na, Side::A)?;
            let w = node_sylvester(nb, Side::B)?;
            let (ma, ka) = (al.span().len(), ar.span().len());
            let (mb, kb) = (bl.span().len(), br.span().len());
            let c11 = c.block(0, 0, ma, mb);
            let c12 = c.block(0, mb, ma, kb);
            let c21 = c.block(ma, 0, ka, mb);
            let c22 = c.block(ma, mb, ka, kb);
            let vc21 = matmul(v, &c21)?;
            let c1 = c11.add(&vc21);
            let c3 = c12
                .sub(&matmul(&c11, w)?)
                .sub(&matmul(&vc21, w)?)
                .add(&matmul(v, &c22)?);
            let c4 = c22.sub(&matmul(&c21, w)?);
            let f1 = rec(f, a, b, c1, al, bl, opts, report)?;
            let f2 = rec(f, a, b, c21, ar, bl, opts, report)?;
            let f3 = rec(f, a, b, c3, al, br, opts, report)?;
            let f4 = rec(f, a, b, c4, ar, br, opts, report)?;
            let vf2 = matmul(v, &f2)?;
            let f1w = matmul(&f1, w)?;
            let top_left = f1.sub(&vf2);
            let top_right = f1w.sub(&matmul(&vf2, w)?).add(&f3).sub(&matmul(v, &f4)?);
            let bottom_right = matmul(&f2, w)?.add(&f4);
            Ok(top_left.hstack(&top_right).vstack(&f2.hstack(&bottom_right)))
        }
        (Some(ach), None) => {
            let [al, ar] = &**ach;
            let v = node_sylvester(na, Side::A)?;
            let ma = al.span().len();
            let ka = ar.span().len();
            let c_top = c.block(0, 0, ma, lb);
            let c_bot = c.block(ma, 0, ka, lb);
            let c1 = c_top.add(&matmul(v, &c_bot)?);
            let f1 = rec(f, a, b, c1, al, nb, opts, report)?;
            let f2 = rec(f, a, b, c_bot, ar, nb, opts, report)?;
            Ok(f1.sub(&matmul(v, &f2)?).vstack(&f2))
        }
        (None, Some(bch)) => {
            let [bl, br] = &**bch;
            let w = node_sylvester(nb, Side::B)?;
            let mb = bl.span().len();
            let kb = br.span().len();
            let c_left = c.block(0, 0, la, mb);
            let c_right = c.block(0, mb, la, kb);
            let c3 = c_right.sub(&matmul(&c_left, w)?);
            let f1 = rec(f, a, b, c_left, na, bl, opts, report)?;
            let f3 = rec(f, a, b, c3, na, br, opts, report)?;
            Ok(f1.hstack(&matmul(&f1, w)?.add(&f3)))
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Stream seed of the atom at block position (a0, b0): mixes the master
/// seed with the coordinates so no two atoms share perturbation draws and
/// the result is independent of evaluation order.
fn atom_seed(seed: u64, a0: usize, b0: usize) -> u64 {
    splitmix64(splitmix64(seed ^ (a0 as u64).rotate_left(32)) ^ b0 as u64)
}

#[allow(clippy::too_many_arguments)]
fn atom_eval(
    f: &dyn BivariateFunction,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    na: &PartitionTree,
    nb: &PartitionTree,
    opts: &EvalOptions,
    report: &mut EvalReport,
) -> Result<ComplexMatrix> {
    let ra = na.span();
    let rb = nb.span();
    let ablk = a.block(ra.start, ra.start, ra.len(), ra.len());
    let bblk = b.block(rb.start, rb.start, rb.len(), rb.len());
    match opts.atom_method {
        AtomMethod::Taylor => {
            let (res, plan) = fun2_atom_taylor(f, &ablk, &bblk, c, opts.epsilon)?;
            report.max_taylor_degree = report.max_taylor_degree.max(plan.degree);
            Ok(res)
        }
        AtomMethod::Diag => {
            let seed = atom_seed(opts.seed, ra.start, rb.start);
            let (res, plan) = fun2_atom_diag_with(f, &ablk, &bblk, c, seed, opts.delta1)?;
            report.max_digits = report.max_digits.max(plan.digits);
            Ok(res)
        }
    }
}

// ---------------------------------------------------------------------------
// 2 x 2 closed form
// ---------------------------------------------------------------------------

const CONFLUENCE_TOL: f64 = 1e-8;

fn confluent(x1: Complex64, x2: Complex64) -> bool {
    (x1 - x2).norm() <= CONFLUENCE_TOL * x1.norm().max(x2.norm()).max(1.0)
}

fn partial_or_err(
    f: &dyn BivariateFunction,
    i: u32,
    j: u32,
    x: Complex64,
    y: Complex64,
    at: Complex64,
) -> Result<Complex64> {
    f.partial(i, j, x, y).ok_or(Error::DerivativeRequired {
        value: at,
        order: (i + j) as usize,
    })
}

/// D_x[x1, x2] f(., y): first divided difference in the first argument,
/// switching to the partial derivative at the midpoint when the nodes are
/// confluent.
fn div_diff_x(
    f: &dyn BivariateFunction,
    x1: Complex64,
    x2: Complex64,
    y: Complex64,
    derivative_fallback: bool,
) -> Result<Complex64> {
    if !confluent(x1, x2) {
        return Ok((f.eval(x2, y) - f.eval(x1, y)) / (x2 - x1));
    }
    let mid = 0.5 * (x1 + x2);
    if !derivative_fallback {
        return Err(Error::DerivativeRequired { value: mid, order: 1 });
    }
    partial_or_err(f, 1, 0, mid, y, mid)
}

fn div_diff_y(
    f: &dyn BivariateFunction,
    x: Complex64,
    y1: Complex64,
    y2: Complex64,
    derivative_fallback: bool,
) -> Result<Complex64> {
    if !confluent(y1, y2) {
        return Ok((f.eval(x, y2) - f.eval(x, y1)) / (y2 - y1));
    }
    let mid = 0.5 * (y1 + y2);
    if !derivative_fallback {
        return Err(Error::DerivativeRequired { value: mid, order: 1 });
    }
    partial_or_err(f, 0, 1, x, mid, mid)
}

fn div_diff_xy(
    f: &dyn BivariateFunction,
    x1: Complex64,
    x2: Complex64,
    y1: Complex64,
    y2: Complex64,
    derivative_fallback: bool,
) -> Result<Complex64> {
    match (confluent(x1, x2), confluent(y1, y2)) {
        (false, false) => Ok(
            (f.eval(x2, y2) - f.eval(x2, y1) - f.eval(x1, y2) + f.eval(x1, y1))
                / ((x2 - x1) * (y2 - y1)),
        ),
        (true, false) => {
            let dx2 = div_diff_x(f, x1, x2, y2, derivative_fallback)?;
            let dx1 = div_diff_x(f, x1, x2, y1, derivative_fallback)?;
            Ok((dx2 - dx1) / (y2 - y1))
        }
        (false, true) => {
            let dy2 = div_diff_y(f, x2, y1, y2, derivative_fallback)?;
            let dy1 = div_diff_y(f, x1, y1, y2, derivative_fallback)?;
            Ok((dy2 - dy1) / (x2 - x1))
        }
        (true, true) => {
            let mx = 0.5 * (x1 + x2);
            let my = 0.5 * (y1 + y2);
            if !derivative_fallback {
                return Err(Error::DerivativeRequired { value: mx, order: 2 });
            }
            partial_or_err(f, 1, 1, mx, my, mx)
        }
    }
}

/// Closed form on a pair of upper triangular 2 x 2 blocks: the Hadamard
/// term f(lambda_i, mu_j) o C plus divided-difference corrections driven by
/// the off-diagonal entries a12 and b12. Like `fun2m_rec`, B multiplies C
/// on the right as given (for f = x + y the result solves AX + XB = C).
pub fn corollary_2x2(
    f: &dyn BivariateFunction,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    derivative_fallback: bool,
) -> Result<ComplexMatrix> {
    check_dims("corollary_2x2", a, b, c)?;
    if a.rows() != 2 || b.rows() != 2 {
        return Err(Error::arg("corollary_2x2", "A, B, C must all be 2 x 2"));
    }
    if !a.is_upper_triangular() || !b.is_upper_triangular() {
        return Err(Error::arg("corollary_2x2", "A and B must be upper triangular"));
    }
    let (l1, l2) = (a[(0, 0)], a[(1, 1)]);
    let (m1, m2) = (b[(0, 0)], b[(1, 1)]);
    let a12 = a[(0, 1)];
    let b12 = b[(0, 1)];
    check_grid_analytic(f, &[l1, l2], &[m1, m2])?;

    let mut out = ComplexMatrix::zeros(2, 2);
    for (i, &l) in [l1, l2].iter().enumerate() {
        for (j, &m) in [m1, m2].iter().enumerate() {
            out[(i, j)] = f.eval(l, m) * c[(i, j)];
        }
    }

    let zero = Complex64::new(0.0, 0.0);
    if a12 != zero {
        let dx1 = div_diff_x(f, l1, l2, m1, derivative_fallback)?;
        out[(0, 0)] += c[(1, 0)] * a12 * dx1;
        let dx2 = div_diff_x(f, l1, l2, m2, derivative_fallback)?;
        out[(0, 1)] += c[(1, 1)] * a12 * dx2;
    }
    if b12 != zero {
        let dy2 = div_diff_y(f, l2, m1, m2, derivative_fallback)?;
        out[(1, 1)] += c[(1, 0)] * b12 * dy2;
        let dy1 = div_diff_y(f, l1, m1, m2, derivative_fallback)?;
        out[(0, 1)] += c[(0, 0)] * b12 * dy1;
    }
    if a12 != zero && b12 != zero {
        let dxy = div_diff_xy(f, l1, l2, m1, m2, derivative_fallback)?;
        out[(0, 1)] += c[(1, 0)] * a12 * b12 * dxy;
    }
    Ok(out)
}
