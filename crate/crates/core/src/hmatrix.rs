//! Hierarchical approximation of kernel matrices.
//!
//! Points are organized in a binary cluster tree (longest bounding-box axis
//! split at the median). A pair of clusters whose boxes satisfy the strong
//! admissibility condition `min(diam) ≤ η · dist` is stored as a low-rank
//! factor computed by partially pivoted adaptive cross approximation (ACA);
//! inadmissible pairs are subdivided until one side is a leaf and then
//! stored densely.
//!
//! The block tree is built symmetrically: below every diagonal block the
//! lower off-diagonal child is the exact transpose of the upper one, so the
//! approximation `W̃` is itself symmetric and can be used inside conjugate
//! gradient.
//!
//! The regression solve uses CG on `G + α(D̃ − W̃)` with `D̃ = W̃ 𝟙`. Any
//! [`LinearOperator`] can stand in for `W̃`.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::kernels::{KernelMatrix, KernelParams};
use crate::numerics::{
    conjugate_gradient, power_iteration_norm, CgOptions, DenseMatrix, Difference, LinearOperator, LowRankFactor,
};
use crate::solver::{build_g_diagonal, LabeledProblem, Prediction, SolveError, SolverConfig, SolverPath};

#[derive(Debug, Clone, PartialEq)]
pub enum HMatrixError {
    InvalidConfig(&'static str),
    /// ACA did not reach the target accuracy within `k_max` crosses.
    RankCapReached {
        k_max: usize,
    },
    DimensionMismatch {
        expected: usize,
        found: usize,
    },
}

impl fmt::Display for HMatrixError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidConfig(why) => write!(f, "invalid H-matrix configuration: {why}"),
            Self::RankCapReached { k_max } => write!(f, "ACA did not converge within rank {k_max}"),
            Self::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
        }
    }
}

impl core::error::Error for HMatrixError {}

// ── geometry ────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq)]
pub struct BoundingBox {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl BoundingBox {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Self {
        debug_assert_eq!(min.len(), max.len());
        Self { min, max }
    }

    /// Smallest box holding the rows `idx` of `points`.
    pub fn of_points(points: &DenseMatrix, idx: &[usize]) -> Self {
        let d = points.cols();
        let mut min = vec![f64::INFINITY; d];
        let mut max = vec![f64::NEG_INFINITY; d];
        for &i in idx {
            for (k, &v) in points.row(i).iter().enumerate() {
                min[k] = min[k].min(v);
                max[k] = max[k].max(v);
            }
        }
        Self { min, max }
    }

    pub fn diameter(&self) -> f64 {
        libm::sqrt(self.min.iter().zip(&self.max).map(|(a, b)| (b - a) * (b - a)).sum())
    }

    /// Euclidean distance between the boxes, zero when they touch.
    pub fn distance(&self, other: &Self) -> f64 {
        let mut s = 0.0;
        for k in 0..self.min.len() {
            let gap = (other.min[k] - self.max[k]).max(self.min[k] - other.max[k]).max(0.0);
            s += gap * gap;
        }
        libm::sqrt(s)
    }

    fn longest_axis(&self) -> usize {
        let mut best = (0, -1.0);
        for (k, (a, b)) in self.min.iter().zip(&self.max).enumerate() {
            if b - a > best.1 {
                best = (k, b - a);
            }
        }
        best.0
    }
}

/// Strong admissibility: `min(diam a, diam b) ≤ η · dist(a, b)` with
/// strictly separated boxes.
pub fn is_admissible(a: &BoundingBox, b: &BoundingBox, eta: f64) -> bool {
    let dist = a.distance(b);
    dist > 0.0 && a.diameter().min(b.diameter()) <= eta * dist
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterNode {
    /// Range `start..end` into the tree permutation.
    pub start: usize,
    pub end: usize,
    pub bbox: BoundingBox,
    pub children: Option<[usize; 2]>,
}

impl ClusterNode {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterTree {
    perm: Vec<usize>,
    nodes: Vec<ClusterNode>,
    leaf_size: usize,
}

/// Binary cluster tree with leaves of at most `n_min` points.
pub fn build_cluster_tree(points: &DenseMatrix, n_min: usize) -> Result<ClusterTree, HMatrixError> {
    if points.rows() == 0 {
        return Err(HMatrixError::InvalidConfig("need at least one point"));
    }
    if n_min == 0 {
        return Err(HMatrixError::InvalidConfig("leaf size must be at least 1"));
    }
    let mut tree = ClusterTree {
        perm: (0..points.rows()).collect(),
        nodes: Vec::new(),
        leaf_size: n_min,
    };
    tree.split(points, 0, points.rows());
    Ok(tree)
}

impl ClusterTree {
    fn split(&mut self, points: &DenseMatrix, start: usize, end: usize) -> usize {
        let bbox = BoundingBox::of_points(points, &self.perm[start..end]);
        let id = self.nodes.len();
        let axis = bbox.longest_axis();
        self.nodes.push(ClusterNode {
            start,
            end,
            bbox,
            children: None,
        });
        if end - start > self.leaf_size {
            let mid = (end - start) / 2;
            self.perm[start..end].select_nth_unstable_by(mid, |&a, &b| {
                points[(a, axis)].total_cmp(&points[(b, axis)]).then(a.cmp(&b))
            });
            let left = self.split(points, start, start + mid);
            let right = self.split(points, start + mid, end);
            self.nodes[id].children = Some([left, right]);
        }
        id
    }

    /// `perm[k]` is the original index of the point at tree position `k`.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn nodes(&self) -> &[ClusterNode] {
        &self.nodes
    }

    pub fn root(&self) -> &ClusterNode {
        &self.nodes[0]
    }

    pub fn leaf_size(&self) -> usize {
        self.leaf_size
    }

    pub fn leaves(&self) -> impl Iterator<Item = &ClusterNode> {
        self.nodes.iter().filter(|n| n.is_leaf())
    }

    pub fn depth(&self) -> usize {
        fn go(t: &ClusterTree, id: usize) -> usize {
            match t.nodes[id].children {
                None => 1,
                Some([a, b]) => 1 + go(t, a).max(go(t, b)),
            }
        }
        go(self, 0)
    }
}

// ── adaptive cross approximation ────────────────────────────────────

#[derive(Debug, Clone, PartialEq)]
pub enum AcaOutcome {
    Converged(LowRankFactor),
    /// The accuracy target was not met; the factor holds `k_max` crosses.
    RankCapReached {
        k_max: usize,
        partial: LowRankFactor,
    },
}

impl AcaOutcome {
    pub fn factor(&self) -> &LowRankFactor {
        match self {
            Self::Converged(f) | Self::RankCapReached { partial: f, .. } => f,
        }
    }

    pub fn into_result(self) -> Result<LowRankFactor, HMatrixError> {
        match self {
            Self::Converged(f) => Ok(f),
            Self::RankCapReached { k_max, .. } => Err(HMatrixError::RankCapReached { k_max }),
        }
    }
}

/// Partially pivoted ACA of the `rows × cols` block with entries
/// `entry(i, j)`.
///
/// A cross `u vᵀ` is appended while `‖u‖ ‖v‖ > ε ‖S‖_F`, where `S` is the
/// approximant including the new cross. The first pivot row is row 0, later
/// ones are the largest entry of the last column; a row whose residual
/// vanishes is skipped in favor of the next unused row.
pub fn aca_approximate(
    rows: usize,
    cols: usize,
    entry: impl Fn(usize, usize) -> f64,
    eps: f64,
    k_max: usize,
) -> Result<AcaOutcome, HMatrixError> {
    if eps.is_nan() || eps <= 0.0 || k_max == 0 {
        return Err(HMatrixError::InvalidConfig("ACA needs eps > 0 and k_max >= 1"));
    }
    let mut us: Vec<Vec<f64>> = Vec::new();
    let mut vs: Vec<Vec<f64>> = Vec::new();
    if rows == 0 || cols == 0 {
        return Ok(AcaOutcome::Converged(LowRankFactor::empty(rows, cols)));
    }
    let mut used = vec![false; rows];
    let mut frob2 = 0.0;
    let mut pivot_row = 0;

    loop {
        // Residual row at the pivot, skipping rows that are already exact.
        let (v, j_star, pivot) = loop {
            used[pivot_row] = true;
            let mut r: Vec<f64> = (0..cols).map(|j| entry(pivot_row, j)).collect();
            for (u, v) in us.iter().zip(&vs) {
                let c = u[pivot_row];
                for (rj, vj) in r.iter_mut().zip(v) {
                    *rj -= c * vj;
                }
            }
            let (j_star, pivot) = r
                .iter()
                .enumerate()
                .fold((0, 0.0f64), |b, (j, &x)| if x.abs() > b.1.abs() { (j, x) } else { b });
            if pivot != 0.0 {
                break (r, j_star, pivot);
            }
            match used.iter().position(|&u| !u) {
                Some(next) => pivot_row = next,
                None => return Ok(AcaOutcome::Converged(LowRankFactor::from_crosses(rows, cols, &us, &vs))),
            }
        };
        let v: Vec<f64> = v.iter().map(|x| x / pivot).collect();
        let mut u: Vec<f64> = (0..rows).map(|i| entry(i, j_star)).collect();
        for (uk, vk) in us.iter().zip(&vs) {
            let c = vk[j_star];
            for (ui, uki) in u.iter_mut().zip(uk) {
                *ui -= c * uki;
            }
        }

        let nu2: f64 = u.iter().map(|x| x * x).sum();
        let nv2: f64 = v.iter().map(|x| x * x).sum();
        let mut cross = 0.0;
        for (uk, vk) in us.iter().zip(&vs) {
            cross += crate::numerics::dot(uk, &u) * crate::numerics::dot(vk, &v);
        }
        let next_frob2 = (frob2 + 2.0 * cross + nu2 * nv2).max(0.0);
        if libm::sqrt(nu2 * nv2) <= eps * libm::sqrt(next_frob2) {
            return Ok(AcaOutcome::Converged(LowRankFactor::from_crosses(rows, cols, &us, &vs)));
        }
        if us.len() == k_max {
            let partial = LowRankFactor::from_crosses(rows, cols, &us, &vs);
            return Ok(AcaOutcome::RankCapReached { k_max, partial });
        }
        frob2 = next_frob2;

        let mut best = None;
        let mut best_abs = -1.0;
        for (i, &ui) in u.iter().enumerate() {
            if !used[i] && ui.abs() > best_abs {
                best_abs = ui.abs();
                best = Some(i);
            }
        }
        us.push(u);
        vs.push(v);
        match best {
            Some(i) => pivot_row = i,
            None => return Ok(AcaOutcome::Converged(LowRankFactor::from_crosses(rows, cols, &us, &vs))),
        }
    }
}

// ── block tree ──────────────────────────────────────────────────────

/// What to do with an admissible block whose ACA hits the rank cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum RankCapPolicy {
    /// Keep the truncated factor.
    Accept,
    /// Store the block densely.
    #[default]
    Densify,
    /// Abort the build with [`HMatrixError::RankCapReached`].
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HMatrixConfig {
    pub leaf_size: usize,
    pub eta: f64,
    /// Relative ACA accuracy per block.
    pub eps: f64,
    /// Upper bound on the rank of any low-rank block.
    pub max_rank: usize,
    pub on_rank_cap: RankCapPolicy,
}

impl Default for HMatrixConfig {
    fn default() -> Self {
        Self {
            leaf_size: 64,
            eta: 2.0,
            eps: 1e-7,
            max_rank: usize::MAX,
            on_rank_cap: RankCapPolicy::Densify,
        }
    }
}

impl HMatrixConfig {
    pub fn validate(&self) -> Result<(), HMatrixError> {
        if self.leaf_size == 0 {
            return Err(HMatrixError::InvalidConfig("leaf size must be at least 1"));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(HMatrixError::InvalidConfig("eta must be positive"));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(HMatrixError::InvalidConfig("eps must lie in (0, 1)"));
        }
        if self.max_rank == 0 {
            return Err(HMatrixError::InvalidConfig("max rank must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BlockKind {
    Dense(DenseMatrix),
    LowRank(LowRankFactor),
    /// Children in the order `(s0,t0), (s0,t1), (s1,t0), (s1,t1)`.
    Subdivided(Box<[BlockNode; 4]>),
}

/// Block of the permuted matrix covering rows `row_start..row_end` and
/// columns `col_start..col_end` (tree positions, not original indices).
#[derive(Debug, Clone, PartialEq)]
pub struct BlockNode {
    pub row_start: usize,
    pub row_end: usize,
    pub col_start: usize,
    pub col_end: usize,
    pub kind: BlockKind,
}

impl BlockNode {
    fn transpose(&self) -> Self {
        let kind = match &self.kind {
            BlockKind::Dense(d) => BlockKind::Dense(d.transpose()),
            BlockKind::LowRank(f) => BlockKind::LowRank(f.transpose()),
            BlockKind::Subdivided(c) => BlockKind::Subdivided(Box::new([
                c[0].transpose(),
                c[2].transpose(),
                c[1].transpose(),
                c[3].transpose(),
            ])),
        };
        Self {
            row_start: self.col_start,
            row_end: self.col_end,
            col_start: self.row_start,
            col_end: self.row_end,
            kind,
        }
    }

    fn apply_add(&self, x: &[f64], y: &mut [f64]) {
        let xs = &x[self.col_start..self.col_end];
        let ys = &mut y[self.row_start..self.row_end];
        match &self.kind {
            BlockKind::Dense(d) => d.matvec_add(xs, ys),
            BlockKind::LowRank(f) => f.matvec_add(xs, ys),
            BlockKind::Subdivided(c) => c.iter().for_each(|b| b.apply_add(x, y)),
        }
    }

    fn apply_transpose_add(&self, x: &[f64], y: &mut [f64]) {
        let xs = &x[self.row_start..self.row_end];
        let ys = &mut y[self.col_start..self.col_end];
        match &self.kind {
            BlockKind::Dense(d) => d.matvec_transpose_add(xs, ys),
            BlockKind::LowRank(f) => f.matvec_transpose_add(xs, ys),
            BlockKind::Subdivided(c) => c.iter().for_each(|b| b.apply_transpose_add(x, y)),
        }
    }

    fn visit_leaves<'a>(&'a self, out: &mut Vec<&'a BlockNode>) {
        match &self.kind {
            BlockKind::Subdivided(c) => c.iter().for_each(|b| b.visit_leaves(out)),
            _ => out.push(self),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum LeafKind {
    Dense,
    LowRank,
}

/// Summary of one leaf block, for structure dumps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LeafBlockInfo {
    pub row_start: usize,
    pub row_end: usize,
    pub col_start: usize,
    pub col_end: usize,
    pub kind: LeafKind,
    /// ACA rank for low-rank blocks, `min(rows, cols)` for dense ones.
    pub rank: usize,
    /// Stored reals.
    pub storage: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HMatrix {
    tree: ClusterTree,
    root: BlockNode,
    config: HMatrixConfig,
}

struct Builder<'a> {
    tree: &'a ClusterTree,
    kernel: KernelMatrix<'a>,
    cfg: HMatrixConfig,
}

impl Builder<'_> {
    fn entry(&self, row: usize, col: usize) -> f64 {
        let p = self.tree.perm();
        self.kernel.entry(p[row], p[col])
    }

    fn dense(&self, s: &ClusterNode, t: &ClusterNode) -> BlockKind {
        BlockKind::Dense(DenseMatrix::from_fn(s.len(), t.len(), |i, j| {
            self.entry(s.start + i, t.start + j)
        }))
    }

    fn block(&self, si: usize, ti: usize) -> Result<BlockNode, HMatrixError> {
        let nodes = self.tree.nodes();
        let (s, t) = (&nodes[si], &nodes[ti]);
        let kind = if si != ti && is_admissible(&s.bbox, &t.bbox, self.cfg.eta) {
            self.low_rank(s, t)?
        } else {
            match (s.children, t.children) {
                (Some([s0, s1]), Some([t0, t1])) => {
                    let children = if si == ti {
                        let upper = self.block(s0, s1)?;
                        let lower = upper.transpose();
                        [self.block(s0, s0)?, upper, lower, self.block(s1, s1)?]
                    } else {
                        [
                            self.block(s0, t0)?,
                            self.block(s0, t1)?,
                            self.block(s1, t0)?,
                            self.block(s1, t1)?,
                        ]
                    };
                    BlockKind::Subdivided(Box::new(children))
                }
                _ => self.dense(s, t),
            }
        };
        Ok(BlockNode {
            row_start: s.start,
            row_end: s.end,
            col_start: t.start,
            col_end: t.end,
            kind,
        })
    }

    fn low_rank(&self, s: &ClusterNode, t: &ClusterNode) -> Result<BlockKind, HMatrixError> {
        let natural = s.len().min(t.len());
        let k_max = self.cfg.max_rank.min(natural);
        let outcome = aca_approximate(
            s.len(),
            t.len(),
            |i, j| self.entry(s.start + i, t.start + j),
            self.cfg.eps,
            k_max,
        )?;
        Ok(match outcome {
            AcaOutcome::Converged(f) => BlockKind::LowRank(f),
            // Full rank reached: the dense block is exact and no larger.
            AcaOutcome::RankCapReached { .. } if k_max == natural => self.dense(s, t),
            AcaOutcome::RankCapReached { k_max, partial } => match self.cfg.on_rank_cap {
                RankCapPolicy::Accept => BlockKind::LowRank(partial),
                RankCapPolicy::Densify => self.dense(s, t),
                RankCapPolicy::Fail => return Err(HMatrixError::RankCapReached { k_max }),
            },
        })
    }
}

/// Hierarchical approximation of the kernel matrix over `points`.
pub fn build_hmatrix(
    points: &DenseMatrix,
    params: &KernelParams,
    cfg: &HMatrixConfig,
) -> Result<HMatrix, HMatrixError> {
    cfg.validate()?;
    params
        .validate()
        .map_err(|_| HMatrixError::InvalidConfig("invalid kernel parameters"))?;
    let tree = build_cluster_tree(points, cfg.leaf_size)?;
    let builder = Builder {
        tree: &tree,
        kernel: KernelMatrix::new(points, *params),
        cfg: *cfg,
    };
    let root = builder.block(0, 0)?;
    Ok(HMatrix {
        tree,
        root,
        config: *cfg,
    })
}

/// `W̃ x` in the original point ordering.
pub fn h_matvec(h: &HMatrix, x: &[f64]) -> Result<Vec<f64>, HMatrixError> {
    if x.len() != h.n() {
        return Err(HMatrixError::DimensionMismatch {
            expected: h.n(),
            found: x.len(),
        });
    }
    Ok(h.apply(x))
}

impl HMatrix {
    pub fn n(&self) -> usize {
        self.tree.perm().len()
    }

    pub fn tree(&self) -> &ClusterTree {
        &self.tree
    }

    pub fn root(&self) -> &BlockNode {
        &self.root
    }

    pub fn config(&self) -> &HMatrixConfig {
        &self.config
    }

    fn permuted_apply(&self, x: &[f64], y: &mut [f64], transpose: bool) {
        let perm = self.tree.perm();
        let xp: Vec<f64> = perm.iter().map(|&i| x[i]).collect();
        let mut yp = vec![0.0; xp.len()];
        if transpose {
            self.root.apply_transpose_add(&xp, &mut yp);
        } else {
            self.root.apply_add(&xp, &mut yp);
        }
        for (k, &i) in perm.iter().enumerate() {
            y[i] = yp[k];
        }
    }

    pub fn leaf_blocks(&self) -> Vec<LeafBlockInfo> {
        let mut leaves = Vec::new();
        self.root.visit_leaves(&mut leaves);
        leaves
            .into_iter()
            .map(|b| {
                let (rows, cols) = (b.row_end - b.row_start, b.col_end - b.col_start);
                let (kind, rank, storage) = match &b.kind {
                    BlockKind::Dense(_) => (LeafKind::Dense, rows.min(cols), rows * cols),
                    BlockKind::LowRank(f) => (LeafKind::LowRank, f.rank(), f.storage()),
                    BlockKind::Subdivided(_) => unreachable!("leaves are never subdivided"),
                };
                LeafBlockInfo {
                    row_start: b.row_start,
                    row_end: b.row_end,
                    col_start: b.col_start,
                    col_end: b.col_end,
                    kind,
                    rank,
                    storage,
                }
            })
            .collect()
    }

    /// Total stored reals over all leaf blocks.
    pub fn storage(&self) -> usize {
        self.leaf_blocks().iter().map(|b| b.storage).sum()
    }

    /// Largest rank among the low-rank blocks.
    pub fn max_rank(&self) -> usize {
        self.leaf_blocks()
            .iter()
            .filter(|b| b.kind == LeafKind::LowRank)
            .map(|b| b.rank)
            .max()
            .unwrap_or(0)
    }

    /// Explicit `W̃` in the original ordering; for tests on small `n`.
    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.n();
        let mut out = DenseMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            self.apply_into(&e, &mut col);
            for i in 0..n {
                out[(i, j)] = col[i];
            }
            e[j] = 0.0;
        }
        out
    }
}

impl LinearOperator for HMatrix {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        self.permuted_apply(x, y, false);
    }

    fn apply_transpose_into(&self, x: &[f64], y: &mut [f64]) {
        self.permuted_apply(x, y, true);
    }

    /// Diagonal blocks are never admissible, so every diagonal entry sits
    /// in a dense leaf.
    fn diagonal(&self) -> Option<Vec<f64>> {
        let mut leaves = Vec::new();
        self.root.visit_leaves(&mut leaves);
        let perm = self.tree.perm();
        let mut d = vec![0.0; self.n()];
        for b in leaves {
            if let BlockKind::Dense(m) = &b.kind {
                for k in b.row_start.max(b.col_start)..b.row_end.min(b.col_end) {
                    d[perm[k]] = m[(k - b.row_start, k - b.col_start)];
                }
            }
        }
        Some(d)
    }
}

/// Power-iteration estimate of `‖W − W̃‖₂`.
pub fn approx_error_norm<W: LinearOperator>(w: &W, h: &HMatrix, iters: usize, seed: u64) -> f64 {
    power_iteration_norm(&Difference { a: w, b: h }, iters, seed)
}

// ── Laplacian operators and the CG solve ────────────────────────────

/// `x ↦ D x − W x` with `D = diag(W 𝟙)`.
pub struct LaplacianOperator<W> {
    w: W,
    degrees: Vec<f64>,
}

impl<W: LinearOperator> LaplacianOperator<W> {
    pub fn new(w: W) -> Self {
        let degrees = w.apply(&vec![1.0; w.dim()]);
        Self { w, degrees }
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }
}

impl<W: LinearOperator> LinearOperator for LaplacianOperator<W> {
    fn dim(&self) -> usize {
        self.w.dim()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        self.w.apply_into(x, y);
        for ((yi, xi), di) in y.iter_mut().zip(x).zip(&self.degrees) {
            *yi = di * xi - *yi;
        }
    }

    fn apply_transpose_into(&self, x: &[f64], y: &mut [f64]) {
        self.w.apply_transpose_into(x, y);
        for ((yi, xi), di) in y.iter_mut().zip(x).zip(&self.degrees) {
            *yi = di * xi - *yi;
        }
    }

    fn diagonal(&self) -> Option<Vec<f64>> {
        let wd = self.w.diagonal()?;
        Some(self.degrees.iter().zip(&wd).map(|(d, w)| d - w).collect())
    }
}

/// `x ↦ G x + α L x`.
pub struct RegularizedLaplacian<W> {
    laplacian: LaplacianOperator<W>,
    g: Vec<f64>,
    alpha: f64,
}

impl<W: LinearOperator> RegularizedLaplacian<W> {
    pub fn new(w: W, prob: &LabeledProblem, cfg: &SolverConfig) -> Self {
        let g = build_g_diagonal(prob.n(), prob.n_labeled(), cfg.beta);
        Self {
            laplacian: LaplacianOperator::new(w),
            g,
            alpha: cfg.alpha,
        }
    }
}

impl<W: LinearOperator> LinearOperator for RegularizedLaplacian<W> {
    fn dim(&self) -> usize {
        self.g.len()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        if self.alpha == 0.0 {
            y.iter_mut()
                .zip(x)
                .zip(&self.g)
                .for_each(|((yi, xi), gi)| *yi = gi * xi);
            return;
        }
        self.laplacian.apply_into(x, y);
        for ((yi, xi), gi) in y.iter_mut().zip(x).zip(&self.g) {
            *yi = gi * xi + self.alpha * *yi;
        }
    }

    fn diagonal(&self) -> Option<Vec<f64>> {
        if self.alpha == 0.0 {
            return Some(self.g.clone());
        }
        let ld = self.laplacian.diagonal()?;
        Some(self.g.iter().zip(&ld).map(|(g, l)| g + self.alpha * l).collect())
    }
}

/// `f̃* = (G + α(D̃ − W̃))⁻¹ Y₁,₀` by conjugate gradient, for any symmetric
/// operator `W̃` (an [`HMatrix`], a dense matrix, an ensemble factor, …).
pub fn solve_ssr_hmatrix<W: LinearOperator>(
    w: W,
    prob: &LabeledProblem,
    cfg: &SolverConfig,
    cg: &CgOptions,
) -> Result<Prediction, SolveError> {
    cfg.validate()?;
    if w.dim() != prob.n() {
        return Err(SolveError::DimensionMismatch {
            expected: prob.n(),
            found: w.dim(),
        });
    }
    let op = RegularizedLaplacian::new(w, prob, cfg);
    let sol = conjugate_gradient(&op, prob.y_padded(), cg)?;
    Ok(Prediction::new(sol.x, SolverPath::HMatrixCg))
}
