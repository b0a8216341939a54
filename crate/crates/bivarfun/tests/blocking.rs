use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use bivarfun::blocking::{
    blocking, build_tree, precompute_sylvesters, Partition, PartitionTree, Side, SplitStrategy,
};
use bivarfun::dense::{matmul, schur, reorder_schur, ComplexMatrix, SchurForm};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn diag_schur(eigs: &[Complex64]) -> SchurForm {
    let m = eigs.len();
    let mut t = ComplexMatrix::zeros(m, m);
    for (k, &e) in eigs.iter().enumerate() {
        t.raw_mut()[k * m + k] = e;
    }
    SchurForm { q: ComplexMatrix::identity(m), t }
}

fn gauss(rng: &mut ChaCha12Rng) -> Complex64 {
    let u1: f64 = rng.random::<f64>().max(1e-12);
    let u2: f64 = rng.random();
    let r = (-2.0 * u1.ln()).sqrt();
    Complex64::new(
        r * (2.0 * std::f64::consts::PI * u2).cos(),
        r * (2.0 * std::f64::consts::PI * u2).sin(),
    )
}

fn rand_matrix(n: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    ComplexMatrix::from_fn(n, n, |_, _| gauss(&mut rng))
}

/// Random triangular matrix whose diagonal is supplied by the caller.
fn triangular_with_diag(diag: &[Complex64], seed: u64) -> ComplexMatrix {
    let m = diag.len();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    ComplexMatrix::from_fn(m, m, |i, j| {
        if i < j {
            gauss(&mut rng)
        } else if i == j {
            diag[i]
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

// ---------------------------------------------------------------------------
// blocking
// ---------------------------------------------------------------------------

#[test]
fn far_apart_eigenvalues_become_singletons() {
    let eigs = [c(0.0, 0.0), c(5.0, 0.0), c(10.0, 0.0), c(0.0, 7.0)];
    let p = blocking(&diag_schur(&eigs), 0.1).unwrap();
    assert_eq!(p.blocks.len(), 4);
    for b in &p.blocks {
        assert_eq!(b.len(), 1);
    }
    // ordering by mean real part, tie on imaginary part
    let order: Vec<Complex64> = p.permutation.iter().map(|&k| eigs[k]).collect();
    assert_eq!(order, vec![c(0.0, 0.0), c(0.0, 7.0), c(5.0, 0.0), c(10.0, 0.0)]);
}

#[test]
fn chained_pair_is_grouped() {
    let eigs = [c(0.0, 0.0), c(0.05, 0.0), c(10.0, 0.0)];
    let p = blocking(&diag_schur(&eigs), 0.1).unwrap();
    assert_eq!(p.blocks.len(), 2);
    assert_eq!(p.blocks[0], 0..2);
    assert_eq!(p.blocks[1], 2..3);
    assert_eq!(p.permutation, vec![0, 1, 2]);
}

#[test]
fn transitive_chain_groups_even_beyond_delta() {
    // 0 and 0.18 are farther than delta apart but chained through 0.09
    let eigs = [c(0.0, 0.0), c(0.09, 0.0), c(0.18, 0.0), c(1.0, 0.0)];
    let p = blocking(&diag_schur(&eigs), 0.1).unwrap();
    assert_eq!(p.blocks.len(), 2);
    assert_eq!(p.blocks[0].len(), 3);
}

#[test]
fn rejects_nonpositive_delta() {
    let s = diag_schur(&[c(1.0, 0.0)]);
    assert!(blocking(&s, 0.0).is_err());
    assert!(blocking(&s, -1.0).is_err());
    assert!(blocking(&s, f64::NAN).is_err());
}

/// Independent union-find over the proximity graph.
fn oracle_components(eigs: &[Complex64], delta: f64) -> Vec<Vec<usize>> {
    let m = eigs.len();
    let mut comp: Vec<Option<usize>> = vec![None; m];
    let mut out: Vec<Vec<usize>> = Vec::new();
    for start in 0..m {
        if comp[start].is_some() {
            continue;
        }
        let id = out.len();
        let mut stack = vec![start];
        let mut group = Vec::new();
        comp[start] = Some(id);
        while let Some(i) = stack.pop() {
            group.push(i);
            for j in 0..m {
                if comp[j].is_none() && (eigs[i] - eigs[j]).norm() <= delta {
                    comp[j] = Some(id);
                    stack.push(j);
                }
            }
        }
        group.sort_unstable();
        out.push(group);
    }
    out
}

fn block_multiset(p: &Partition, eigs: &[Complex64]) -> Vec<Vec<(u64, u64)>> {
    let mut sets: Vec<Vec<(u64, u64)>> = p
        .blocks
        .iter()
        .map(|b| {
            let mut v: Vec<(u64, u64)> = p.permutation[b.clone()]
                .iter()
                .map(|&k| (eigs[k].re.to_bits(), eigs[k].im.to_bits()))
                .collect();
            v.sort_unstable();
            v
        })
        .collect();
    sets.sort();
    sets
}

#[test]
fn matches_union_find_oracle_on_random_spectra() {
    let mut rng = ChaCha12Rng::seed_from_u64(11);
    for round in 0..20 {
        let m = 20;
        // clustered draws force nontrivial components
        let eigs: Vec<Complex64> = (0..m)
            .map(|_| {
                let center = rng.random_range(0..4) as f64;
                c(center + 0.08 * rng.random::<f64>(), 0.08 * rng.random::<f64>())
            })
            .collect();
        let delta = 0.1;
        let p = blocking(&diag_schur(&eigs), delta).unwrap();
        let mut oracle = oracle_components(&eigs, delta);
        let mut oracle_sets: Vec<Vec<(u64, u64)>> = oracle
            .drain(..)
            .map(|g| {
                let mut v: Vec<(u64, u64)> = g
                    .iter()
                    .map(|&k| (eigs[k].re.to_bits(), eigs[k].im.to_bits()))
                    .collect();
                v.sort_unstable();
                v
            })
            .collect();
        oracle_sets.sort();
        assert_eq!(block_multiset(&p, &eigs), oracle_sets, "round {round}");
    }
}

fn check_partition_invariants(p: &Partition, eigs: &[Complex64]) {
    let m = eigs.len();
    // permutation is a bijection
    let mut seen = vec![false; m];
    for &k in &p.permutation {
        assert!(!seen[k]);
        seen[k] = true;
    }
    // blocks tile 0..m contiguously
    let mut next = 0;
    for b in &p.blocks {
        assert_eq!(b.start, next);
        next = b.end;
    }
    assert_eq!(next, m);
    let reordered: Vec<Complex64> = p.permutation.iter().map(|&k| eigs[k]).collect();
    // separation across blocks
    for (bi, b) in p.blocks.iter().enumerate() {
        for (bj, b2) in p.blocks.iter().enumerate() {
            if bi == bj {
                continue;
            }
            for i in b.clone() {
                for j in b2.clone() {
                    assert!(
                        (reordered[i] - reordered[j]).norm() > p.delta,
                        "blocks {bi} and {bj} too close"
                    );
                }
            }
        }
    }
    // chaining within blocks
    for b in &p.blocks {
        if b.len() < 2 {
            continue;
        }
        for i in b.clone() {
            let has_neighbor = b
                .clone()
                .any(|j| j != i && (reordered[i] - reordered[j]).norm() <= p.delta);
            assert!(has_neighbor, "eigenvalue {i} stranded in its block");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn partition_invariants_hold(seed in 0u64..1000, m in 1usize..50) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let eigs: Vec<Complex64> = (0..m)
            .map(|_| {
                let center = rng.random_range(0..3) as f64;
                c(center + 0.15 * rng.random::<f64>(), 0.15 * rng.random::<f64>())
            })
            .collect();
        let p = blocking(&diag_schur(&eigs), 0.1).unwrap();
        check_partition_invariants(&p, &eigs);
    }

    #[test]
    fn blocking_is_permutation_invariant(seed in 0u64..1000) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let m = 12;
        let eigs: Vec<Complex64> = (0..m)
            .map(|_| {
                let center = rng.random_range(0..3) as f64;
                c(center + 0.12 * rng.random::<f64>(), 0.12 * rng.random::<f64>())
            })
            .collect();
        // Fisher-Yates shuffle
        let mut shuffled = eigs.clone();
        for i in (1..m).rev() {
            let j = rng.random_range(0..=i);
            shuffled.swap(i, j);
        }
        let p1 = blocking(&diag_schur(&eigs), 0.1).unwrap();
        let p2 = blocking(&diag_schur(&shuffled), 0.1).unwrap();
        prop_assert_eq!(block_multiset(&p1, &eigs), block_multiset(&p2, &shuffled));
    }
}

// ---------------------------------------------------------------------------
// build_tree
// ---------------------------------------------------------------------------

fn partition_of_sizes(sizes: &[usize]) -> Partition {
    let mut blocks = Vec::new();
    let mut at = 0;
    for &s in sizes {
        blocks.push(at..at + s);
        at += s;
    }
    Partition { blocks, delta: 0.1, permutation: (0..at).collect() }
}

fn leaf_spans(tree: &PartitionTree) -> Vec<(usize, usize)> {
    match &tree.children {
        None => vec![(tree.span().start, tree.span().end)],
        Some(ch) => {
            let mut v = leaf_spans(&ch[0]);
            v.extend(leaf_spans(&ch[1]));
            v
        }
    }
}

fn depth(tree: &PartitionTree) -> usize {
    match &tree.children {
        None => 1,
        Some(ch) => 1 + depth(&ch[0]).max(depth(&ch[1])),
    }
}

#[test]
fn single_block_gives_leaf() {
    let p = partition_of_sizes(&[7]);
    for strat in [SplitStrategy::Balanced, SplitStrategy::Single] {
        let t = build_tree(&p, strat);
        assert!(t.is_leaf());
        assert_eq!(t.span(), 0..7);
    }
}

#[test]
fn balanced_tree_on_equal_blocks() {
    let p = partition_of_sizes(&[3, 3, 3, 3]);
    let t = build_tree(&p, SplitStrategy::Balanced);
    let ch = t.children.as_ref().unwrap();
    assert_eq!(ch[0].span(), 0..6);
    assert_eq!(ch[1].span(), 6..12);
    assert_eq!(depth(&t), 3);
    assert_eq!(leaf_spans(&t), vec![(0, 3), (3, 6), (6, 9), (9, 12)]);
}

#[test]
fn single_tree_peels_last_block() {
    let p = partition_of_sizes(&[5, 1, 1, 1]);
    let t = build_tree(&p, SplitStrategy::Single);
    let ch = t.children.as_ref().unwrap();
    assert_eq!(ch[0].span(), 0..7);
    assert_eq!(ch[1].span(), 7..8);
    let ch2 = ch[0].children.as_ref().unwrap();
    assert_eq!(ch2[0].span(), 0..6);
    assert_eq!(ch2[1].span(), 6..7);
    let ch3 = ch2[0].children.as_ref().unwrap();
    assert_eq!(ch3[0].span(), 0..5);
    assert_eq!(ch3[1].span(), 5..6);
    assert!(ch3[0].is_leaf());
}

#[test]
fn balanced_never_splits_atomic_blocks_and_prefers_smaller_left() {
    // sizes (4, 2): only split point is between them
    let t = build_tree(&partition_of_sizes(&[4, 2]), SplitStrategy::Balanced);
    let ch = t.children.as_ref().unwrap();
    assert_eq!(ch[0].span(), 0..4);
    // sizes (1, 2, 1): splits (1|2,1) and (1,2|1) both give |gap|=2; smaller left wins
    let t = build_tree(&partition_of_sizes(&[1, 2, 1]), SplitStrategy::Balanced);
    let ch = t.children.as_ref().unwrap();
    assert_eq!(ch[0].span(), 0..1);
    assert_eq!(ch[1].span(), 1..4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn tree_leaves_tile_partition(sizes in prop::collection::vec(1usize..5, 1..8), single in any::<bool>()) {
        let p = partition_of_sizes(&sizes);
        let strat = if single { SplitStrategy::Single } else { SplitStrategy::Balanced };
        let t = build_tree(&p, strat);
        // children concatenate to the parent, leaves are atomic blocks
        let leaves = leaf_spans(&t);
        let expect: Vec<(usize, usize)> = p.blocks.iter().map(|b| (b.start, b.end)).collect();
        prop_assert_eq!(leaves, expect);
    }
}

// ---------------------------------------------------------------------------
// precompute_sylvesters
// ---------------------------------------------------------------------------

#[test]
fn block_diagonal_matrix_solves_to_zero_without_merging() {
    let mut t = ComplexMatrix::zeros(4, 4);
    for k in 0..4 {
        t.raw_mut()[k * 4 + k] = c(k as f64, 0.0);
    }
    let p = partition_of_sizes(&[2, 2]);
    let tree = build_tree(&p, SplitStrategy::Balanced);
    let mut diags = Vec::new();
    let solved = precompute_sylvesters(&t, tree, 10.0, 0.1, true, Side::A, &mut diags).unwrap();
    assert!(diags.is_empty());
    let v = solved.sylvester_solution.as_ref().unwrap();
    assert_eq!(v.max_abs(), 0.0);
    assert!(!solved.merged_flag);
}

#[test]
fn moderate_ratio_keeps_split() {
    // T = [[1, 1],[0, 1.2]]: scalar Sylvester v - 1.2 v = 1 gives v = -5, r = 5
    let t = ComplexMatrix::from_rows(
        2,
        2,
        &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.2, 0.0)],
    );
    let p = partition_of_sizes(&[1, 1]);
    let tree = build_tree(&p, SplitStrategy::Balanced);
    let mut diags = Vec::new();
    let solved = precompute_sylvesters(&t, tree, 10.0, 0.1, true, Side::A, &mut diags).unwrap();
    assert!(diags.is_empty());
    let v = solved.sylvester_solution.as_ref().unwrap();
    assert!((v[(0, 0)] - c(-5.0, 0.0)).norm() <= 1e-14);
    assert!(!solved.merged_flag);
    assert!(!solved.is_leaf());
}

#[test]
fn huge_ratio_merges_under_diag_evaluator() {
    let t = ComplexMatrix::from_rows(
        2,
        2,
        &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0 + 1e-9, 0.0)],
    );
    let p = partition_of_sizes(&[1, 1]);
    let tree = build_tree(&p, SplitStrategy::Balanced);
    let mut diags = Vec::new();
    let solved = precompute_sylvesters(&t, tree, 10.0, 0.1, true, Side::A, &mut diags).unwrap();
    assert!(solved.is_leaf());
    assert!(solved.merged_flag);
    assert!(solved.sylvester_solution.is_none());
    assert_eq!(diags.len(), 1);
    assert!(diags[0].starts_with("MERGE side=A idx=0..2 r="), "{}", diags[0]);
    assert!(diags[0].contains("thresh=1.000000e2"), "{}", diags[0]);
}

#[test]
fn huge_ratio_warns_but_keeps_split_under_taylor() {
    let t = ComplexMatrix::from_rows(
        2,
        2,
        &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0 + 1e-9, 0.0)],
    );
    let p = partition_of_sizes(&[1, 1]);
    let tree = build_tree(&p, SplitStrategy::Balanced);
    let mut diags = Vec::new();
    let solved = precompute_sylvesters(&t, tree, 10.0, 0.1, false, Side::B, &mut diags).unwrap();
    assert!(!solved.is_leaf());
    assert!(!solved.merged_flag);
    assert!(solved.sylvester_solution.is_some());
    assert_eq!(diags.len(), 1);
    assert!(diags[0].starts_with("WARN side=B idx=0..2 r="), "{}", diags[0]);
}

#[test]
fn exact_collision_across_split_is_internal_error() {
    let t = ComplexMatrix::from_rows(
        2,
        2,
        &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
    );
    let p = partition_of_sizes(&[1, 1]);
    let tree = build_tree(&p, SplitStrategy::Balanced);
    let mut diags = Vec::new();
    let err = precompute_sylvesters(&t, tree, 10.0, 0.1, true, Side::A, &mut diags).unwrap_err();
    assert!(matches!(err, bivarfun::Error::Internal { .. }), "{err}");
}

#[test]
fn solved_tree_satisfies_sylvester_residuals() {
    let mut rng = ChaCha12Rng::seed_from_u64(3);
    let m = 12;
    let diag: Vec<Complex64> = (0..m)
        .map(|k| c(2.0 * k as f64 / m as f64, 0.3 * rng.random::<f64>()))
        .collect();
    let t = triangular_with_diag(&diag, 77);
    // singleton blocks give a deep tree with many internal nodes
    let p = partition_of_sizes(&vec![1; m]);
    for strat in [SplitStrategy::Balanced, SplitStrategy::Single] {
        let tree = build_tree(&p, strat);
        let mut diags = Vec::new();
        let solved =
            precompute_sylvesters(&t, tree, 1e12, 0.1, true, Side::A, &mut diags).unwrap();
        check_residuals(&t, &solved);
    }
}

fn check_residuals(t: &ComplexMatrix, tree: &PartitionTree) {
    let Some(ch) = &tree.children else { return };
    let v = tree.sylvester_solution.as_ref().unwrap();
    let (l, r) = (ch[0].span(), ch[1].span());
    let a11 = t.block(l.start, l.start, l.len(), l.len());
    let a22 = t.block(r.start, r.start, r.len(), r.len());
    let a12 = t.block(l.start, r.start, l.len(), r.len());
    let resid = matmul(&a11, v)
        .unwrap()
        .sub(&matmul(v, &a22).unwrap())
        .sub(&a12)
        .frobenius_norm();
    let scale = (a11.frobenius_norm() + a22.frobenius_norm()) * v.frobenius_norm()
        + a12.frobenius_norm();
    assert!(
        resid <= 1e-13 * scale.max(1e-300) * t.rows() as f64,
        "residual {resid:.3e} vs scale {scale:.3e}"
    );
    check_residuals(t, &ch[0]);
    check_residuals(t, &ch[1]);
}

#[test]
fn reordered_schur_form_reconstructs_original() {
    for seed in [5u64, 6, 7] {
        let m = 14;
        let a = rand_matrix(m, seed);
        let s = schur(&a).unwrap();
        let p = blocking(&s, 0.5).unwrap();
        let s2 = reorder_schur(&s, &p.permutation).unwrap();
        // diagonal landed in block order
        for (pos, &orig) in p.permutation.iter().enumerate() {
            let want = s.t[(orig, orig)];
            let got = s2.t[(pos, pos)];
            assert!((want - got).norm() <= 1e-8 * want.norm().max(1.0));
        }
        let recon = matmul(&matmul(&s2.q, &s2.t).unwrap(), &s2.q.conj_transpose()).unwrap();
        let err = recon.sub(&a).frobenius_norm();
        assert!(
            err <= 1e-12 * m as f64 * a.frobenius_norm(),
            "seed {seed}: reconstruction error {err:.3e}"
        );
    }
}
