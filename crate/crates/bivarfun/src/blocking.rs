//! Eigenvalue clustering, Schur-form reordering, and the recursive split
//! tree with precomputed Sylvester solutions.
//!
//! Clusters are the connected components of the proximity graph that joins
//! two eigenvalues when they lie within `delta` of each other. Reordering
//! makes each cluster contiguous on the triangular diagonal; the split tree
//! then fixes, once per matrix, how every recursion branch divides the
//! clusters, so that both degenerate and four-way recursion steps stay
//! consistent.

use std::fmt::Write as _;
use std::ops::Range;

use num_complex::Complex64;

use crate::dense::{sylvester_tri, ComplexMatrix, SchurForm};
use crate::error::{Error, Result};

/// Ordered eigenvalue clusters of one Schur form.
///
/// `blocks` are contiguous index ranges of the *reordered* diagonal;
/// `permutation[pos]` is the original Schur position whose eigenvalue lands
/// at reordered position `pos` (the `target_order` of `reorder_schur`).
#[derive(Clone, Debug)]
pub struct Partition {
    pub blocks: Vec<Range<usize>>,
    pub delta: f64,
    pub permutation: Vec<usize>,
}

impl Partition {
    pub fn size(&self) -> usize {
        self.permutation.len()
    }
}

/// Groups the diagonal of `t` into clusters separated by more than `delta`.
///
/// Two eigenvalues join the same cluster when a chain of eigenvalues with
/// successive distances at most `delta` connects them. Clusters are ordered
/// by ascending mean real part (ties: mean imaginary part, then smallest
/// original index); inside a cluster the original relative order survives.
pub fn blocking(t: &SchurForm, delta: f64) -> Result<Partition> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::arg("blocking", "delta must be positive and finite"));
    }
    let m = t.t.rows();
    let eigs: Vec<Complex64> = (0..m).map(|k| t.t[(k, k)]).collect();
    let mut members = proximity_components(&eigs, delta);

    members.sort_by(|a, b| {
        let key = |ix: &Vec<usize>| {
            let inv = 1.0 / ix.len() as f64;
            let mean: Complex64 = ix.iter().map(|&k| eigs[k]).sum::<Complex64>() * inv;
            (mean.re, mean.im, ix[0])
        };
        let (ar, ai, a0) = key(a);
        let (br, bi, b0) = key(b);
        ar.total_cmp(&br).then(ai.total_cmp(&bi)).then(a0.cmp(&b0))
    });

    let mut blocks = Vec::with_capacity(members.len());
    let mut permutation = Vec::with_capacity(m);
    for ix in &members {
        let start = permutation.len();
        permutation.extend_from_slice(ix);
        blocks.push(start..permutation.len());
    }
    Ok(Partition { blocks, delta, permutation })
}

/// Connected components of the proximity graph joining points within `delta`
/// of each other. Each component lists its member indices in ascending order;
/// components appear in order of their smallest member.
pub(crate) fn proximity_components(eigs: &[Complex64], delta: f64) -> Vec<Vec<usize>> {
    let m = eigs.len();
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..m {
        for j in (i + 1)..m {
            if (eigs[i] - eigs[j]).norm() <= delta {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut root_slot = vec![usize::MAX; m];
    for i in 0..m {
        let r = find(&mut parent, i);
        if root_slot[r] == usize::MAX {
            root_slot[r] = members.len();
            members.push(Vec::new());
        }
        members[root_slot[r]].push(i);
    }
    members
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SplitStrategy {
    /// Split so both sides cover nearly equal index counts.
    Balanced,
    /// Peel the last atomic block off on the right.
    Single,
}

/// One node of the split tree. `node` lists the atomic blocks covered (as
/// reordered index ranges); internal nodes carry the Sylvester solution of
/// their off-diagonal block once `precompute_sylvesters` has run.
#[derive(Clone, Debug)]
pub struct PartitionTree {
    pub node: Vec<Range<usize>>,
    pub children: Option<Box<[PartitionTree; 2]>>,
    pub sylvester_solution: Option<ComplexMatrix>,
    pub merged_flag: bool,
}

impl PartitionTree {
    /// Contiguous index range covered by this node.
    pub fn span(&self) -> Range<usize> {
        let start = self.node.first().map_or(0, |r| r.start);
        let end = self.node.last().map_or(0, |r| r.end);
        start..end
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }
}

/// Builds the split tree over a partition's blocks, without Sylvester
/// solutions. Splits never cut through an atomic block.
pub fn build_tree(p: &Partition, strategy: SplitStrategy) -> PartitionTree {
    build_tree_from(p.blocks.clone(), strategy)
}

fn build_tree_from(node: Vec<Range<usize>>, strategy: SplitStrategy) -> PartitionTree {
    if node.len() <= 1 {
        return PartitionTree { node, children: None, sylvester_solution: None, merged_flag: false };
    }
    let total: usize = node.iter().map(|r| r.len()).sum();
    let split = match strategy {
        SplitStrategy::Single => node.len() - 1,
        SplitStrategy::Balanced => {
            // first split point where the left side reaches half; ties
            // between |left-right| resolved toward the smaller left side
            let mut best = (usize::MAX, 1usize);
            let mut left = 0usize;
            for s in 1..node.len() {
                left += node[s - 1].len();
                let right = total - left;
                let gap = left.abs_diff(right);
                if gap < best.0 {
                    best = (gap, s);
                }
            }
            best.1
        }
    };
    let right = node[split..].to_vec();
    let left = node[..split].to_vec();
    let children = Box::new([
        build_tree_from(left, strategy),
        build_tree_from(right, strategy),
    ]);
    PartitionTree { node, children: Some(children), sylvester_solution: None, merged_flag: false }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Side {
    A,
    B,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Side::A => f.write_str("A"),
            Side::B => f.write_str("B"),
        }
    }
}

/// Solves every internal node's Sylvester equation A11 V - V A22 = A12 over
/// the triangular matrix `t`, depth first.
///
/// When the solution is large relative to the data, r = |V|/|A12| > gamma/delta,
/// the split is judged ill-conditioned. With `merge_on_ill_conditioning` the
/// node collapses into a leaf (`merged_flag`) and its subtree is discarded,
/// which the caller treats as one atomic block; otherwise the solution is
/// kept and a warning is recorded. Every such event appends a line to
/// `diagnostics` (`MERGE side=... idx=... r=... thresh=...`, or `WARN ...`).
pub fn precompute_sylvesters(
    t: &ComplexMatrix,
    tree: PartitionTree,
    gamma: f64,
    delta: f64,
    merge_on_ill_conditioning: bool,
    side: Side,
    diagnostics: &mut Vec<String>,
) -> Result<PartitionTree> {
    if !t.is_square() || tree.span().end > t.rows() {
        return Err(Error::arg("precompute_sylvesters", "tree does not fit the matrix"));
    }
    let thresh = gamma / delta;
    solve_node(t, tree, thresh, merge_on_ill_conditioning, side, diagnostics)
}

fn solve_node(
    t: &ComplexMatrix,
    tree: PartitionTree,
    thresh: f64,
    merge: bool,
    side: Side,
    diagnostics: &mut Vec<String>,
) -> Result<PartitionTree> {
    let Some(children) = tree.children else {
        return Ok(tree);
    };
    let [left, right] = *children;
    let (l, r) = (left.span(), right.span());
    let a11 = t.block(l.start, l.start, l.len(), l.len());
    let a22 = t.block(r.start, r.start, r.len(), r.len());
    let a12 = t.block(l.start, r.start, l.len(), r.len());

    let rhs_norm = a12.frobenius_norm();
    let (v, ratio) = if rhs_norm == 0.0 {
        (ComplexMatrix::zeros(l.len(), r.len()), 0.0)
    } else {
        let v = sylvester_tri(&a11, &a22, &a12).map_err(|e| match e {
            Error::SylvesterSingular { .. } => Error::Internal {
                what: format!(
                    "eigenvalue collision across split {:?}|{:?} survived blocking",
                    l, r
                ),
            },
            other => other,
        })?;
        let ratio = v.frobenius_norm() / rhs_norm;
        (v, ratio)
    };

    if ratio > thresh {
        let span = tree.node.first().unwrap().start..tree.node.last().unwrap().end;
        let mut line = String::new();
        let tag = if merge { "MERGE" } else { "WARN" };
        let _ = write!(
            line,
            "{tag} side={side} idx={}..{} r={ratio:.6e} thresh={thresh:.6e}",
            span.start, span.end
        );
        diagnostics.push(line);
        if merge {
            return Ok(PartitionTree {
                node: tree.node,
                children: None,
                sylvester_solution: None,
                merged_flag: true,
            });
        }
    }

    let left = solve_node(t, left, thresh, merge, side, diagnostics)?;
    let right = solve_node(t, right, thresh, merge, side, diagnostics)?;
    Ok(PartitionTree {
        node: tree.node,
        children: Some(Box::new([left, right])),
        sylvester_solution: Some(v),
        merged_flag: false,
    })
}
