//! K-means cluster ensembles and the factored co-association matrix.
//!
//! For partitions `P_1..P_r` with weights `w_l`, the weighted co-association
//! matrix is `H(i, j) = Σ_l w_l · 𝕀[c_l(i) = c_l(j)]`. It factors exactly as
//! `H = B Bᵀ` with `B = [√w_1 A_1, …, √w_r A_r]`, where `A_l` is the one-hot
//! `n × K_l` assignment matrix of partition `l`. [`EnsembleFactor`] stores
//! only the cluster labels, so `H x` costs `O(n r)` and the row sums of `H`
//! (the Laplacian degrees) are `D'_i = Σ_l w_l N_l(i)`, with `N_l(i)` the
//! size of the cluster holding point `i` in partition `l`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::index;
use rand::Rng;

use crate::numerics::{squared_distance, DenseMatrix, LinearOperator};
use crate::seeding::{derive_seed, rng_from_seed, STREAM_CENTROIDS, STREAM_CLUSTER_COUNT};

/// Largest `n` accepted by [`dense_coassociation`].
pub const DENSE_COASSOCIATION_CAP: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub enum EnsembleError {
    /// More clusters requested than points.
    KTooLarge {
        k: usize,
        n: usize,
    },
    InvalidConfig(&'static str),
    /// Partitions or vectors disagree in length.
    DimensionMismatch {
        expected: usize,
        found: usize,
    },
    /// Weights are negative or do not sum to one.
    InvalidWeights,
    /// Dense oracle refused `n` above [`DENSE_COASSOCIATION_CAP`].
    TooLarge {
        n: usize,
        cap: usize,
    },
}

impl fmt::Display for EnsembleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::KTooLarge { k, n } => write!(f, "cannot form {k} clusters from {n} points"),
            Self::InvalidConfig(why) => write!(f, "invalid ensemble configuration: {why}"),
            Self::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Self::InvalidWeights => write!(f, "weights must be nonnegative and sum to 1"),
            Self::TooLarge { n, cap } => {
                write!(f, "dense co-association limited to n <= {cap}, got {n}")
            }
        }
    }
}

impl core::error::Error for EnsembleError {}

/// One base clustering.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    /// Cluster index of every point, in `0..k`.
    pub labels: Vec<usize>,
    pub k: usize,
    /// Within-cluster sum of squared distances to the centroids.
    pub inertia: f64,
}

impl Partition {
    /// Builds a partition from labels; `inertia` is left at zero.
    pub fn from_labels(labels: Vec<usize>, k: usize) -> Result<Self, EnsembleError> {
        if labels.iter().any(|&c| c >= k) {
            return Err(EnsembleError::InvalidConfig("label out of range"));
        }
        Ok(Self {
            labels,
            k,
            inertia: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.k];
        for &c in &self.labels {
            sizes[c] += 1;
        }
        sizes
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Weighting {
    /// `w_l = 1/r`.
    #[default]
    Uniform,
    /// `γ_l = 1 / (1 + inertia_l)`, normalized to sum to one.
    ValidityIndex,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnsembleConfig {
    /// Number of base partitions `r`.
    pub size: usize,
    /// Admissible cluster counts; each member draws one uniformly.
    pub cluster_counts: Vec<usize>,
    pub max_iter: usize,
    pub seed: u64,
    pub weighting: Weighting,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            size: 10,
            cluster_counts: vec![2],
            max_iter: 100,
            seed: 0,
            weighting: Weighting::Uniform,
        }
    }
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<(), EnsembleError> {
        if self.size == 0 {
            return Err(EnsembleError::InvalidConfig("ensemble size must be at least 1"));
        }
        if self.cluster_counts.is_empty() || self.cluster_counts.contains(&0) {
            return Err(EnsembleError::InvalidConfig("cluster counts must be nonempty and >= 1"));
        }
        if self.max_iter == 0 {
            return Err(EnsembleError::InvalidConfig("max_iter must be at least 1"));
        }
        Ok(())
    }
}

// ── K-means ─────────────────────────────────────────────────────────

/// Lloyd's algorithm seeded with `k` distinct data points drawn uniformly
/// without replacement.
///
/// Stops when an assignment pass changes nothing or after `max_iter`
/// passes. A cluster that empties is reseeded with the point farthest from
/// its current centroid, so the result always has exactly `k` nonempty
/// clusters.
pub fn kmeans(x: &DenseMatrix, k: usize, seed: u64, max_iter: usize) -> Result<Partition, EnsembleError> {
    kmeans_with_history(x, k, seed, max_iter).map(|(p, _)| p)
}

/// [`kmeans`] that also returns the inertia after every centroid update.
pub fn kmeans_with_history(
    x: &DenseMatrix,
    k: usize,
    seed: u64,
    max_iter: usize,
) -> Result<(Partition, Vec<f64>), EnsembleError> {
    let n = x.rows();
    let d = x.cols();
    if k == 0 {
        return Err(EnsembleError::InvalidConfig("k must be at least 1"));
    }
    if k > n {
        return Err(EnsembleError::KTooLarge { k, n });
    }
    if max_iter == 0 {
        return Err(EnsembleError::InvalidConfig("max_iter must be at least 1"));
    }

    let mut rng = rng_from_seed(seed);
    let init = index::sample(&mut rng, n, k);
    let mut centroids = vec![0.0; k * d];
    for (c, i) in init.iter().enumerate() {
        centroids[c * d..(c + 1) * d].copy_from_slice(x.row(i));
    }

    let mut labels = vec![usize::MAX; n];
    let mut history = Vec::new();
    for _ in 0..max_iter {
        let changed = assign(x, &centroids, k, &mut labels);
        update_centroids(x, &mut labels, &mut centroids, k);
        history.push(inertia(x, &labels, &centroids));
        if !changed {
            break;
        }
    }
    let inertia = *history.last().expect("at least one iteration");
    Ok((Partition { labels, k, inertia }, history))
}

fn nearest(point: &[f64], centroids: &[f64], k: usize) -> (usize, f64) {
    let d = point.len();
    let mut best = (0, f64::INFINITY);
    for c in 0..k {
        let dist = squared_distance(point, &centroids[c * d..(c + 1) * d]);
        if dist < best.1 {
            best = (c, dist);
        }
    }
    best
}

fn assign(x: &DenseMatrix, centroids: &[f64], k: usize, labels: &mut [usize]) -> bool {
    let mut changed = false;
    for (i, label) in labels.iter_mut().enumerate() {
        let (c, _) = nearest(x.row(i), centroids, k);
        if *label != c {
            *label = c;
            changed = true;
        }
    }
    changed
}

fn recompute_means(x: &DenseMatrix, labels: &[usize], centroids: &mut [f64], k: usize) -> Vec<usize> {
    let d = x.cols();
    let mut counts = vec![0usize; k];
    let mut sums = vec![0.0; k * d];
    for (i, &c) in labels.iter().enumerate() {
        counts[c] += 1;
        for (s, v) in sums[c * d..(c + 1) * d].iter_mut().zip(x.row(i)) {
            *s += v;
        }
    }
    for c in 0..k {
        if counts[c] > 0 {
            let inv = 1.0 / counts[c] as f64;
            for (dst, s) in centroids[c * d..(c + 1) * d].iter_mut().zip(&sums[c * d..(c + 1) * d]) {
                *dst = s * inv;
            }
        }
    }
    counts
}

fn update_centroids(x: &DenseMatrix, labels: &mut [usize], centroids: &mut [f64], k: usize) {
    let d = x.cols();
    let mut counts = recompute_means(x, labels, centroids, k);
    let mut repaired = false;
    while let Some(empty) = counts.iter().position(|&c| c == 0) {
        // Farthest point among clusters that can spare one.
        let mut far = None;
        let mut far_dist = -1.0;
        for (i, &c) in labels.iter().enumerate() {
            if counts[c] > 1 {
                let dist = squared_distance(x.row(i), &centroids[c * d..(c + 1) * d]);
                if dist > far_dist {
                    far_dist = dist;
                    far = Some(i);
                }
            }
        }
        let i = far.expect("k <= n guarantees a donor cluster");
        counts[labels[i]] -= 1;
        counts[empty] += 1;
        labels[i] = empty;
        centroids[empty * d..(empty + 1) * d].copy_from_slice(x.row(i));
        repaired = true;
    }
    if repaired {
        recompute_means(x, labels, centroids, k);
    }
}

fn inertia(x: &DenseMatrix, labels: &[usize], centroids: &[f64]) -> f64 {
    let d = x.cols();
    labels
        .iter()
        .enumerate()
        .map(|(i, &c)| squared_distance(x.row(i), &centroids[c * d..(c + 1) * d]))
        .sum()
}

// ── ensemble generation ─────────────────────────────────────────────

/// Member `index` of the ensemble described by `cfg`.
///
/// The cluster count and the centroid initialization draw from separate
/// generators derived from `(cfg.seed, index)`, so members can be built in
/// any order or in parallel with identical results.
pub fn generate_member(x: &DenseMatrix, cfg: &EnsembleConfig, index: usize) -> Result<Partition, EnsembleError> {
    cfg.validate()?;
    let k = if cfg.cluster_counts.len() == 1 {
        cfg.cluster_counts[0]
    } else {
        let mut k_rng = rng_from_seed(derive_seed(cfg.seed, index as u64, STREAM_CLUSTER_COUNT));
        cfg.cluster_counts[k_rng.random_range(0..cfg.cluster_counts.len())]
    };
    kmeans(
        x,
        k,
        derive_seed(cfg.seed, index as u64, STREAM_CENTROIDS),
        cfg.max_iter,
    )
}

/// `cfg.size` independent seeded K-means partitions.
pub fn generate_ensemble(x: &DenseMatrix, cfg: &EnsembleConfig) -> Result<Vec<Partition>, EnsembleError> {
    (0..cfg.size).map(|l| generate_member(x, cfg, l)).collect()
}

/// Normalized member weights.
pub fn compute_weights(partitions: &[Partition], weighting: Weighting) -> Result<Vec<f64>, EnsembleError> {
    if partitions.is_empty() {
        return Err(EnsembleError::InvalidConfig("at least one partition is required"));
    }
    let gamma: Vec<f64> = match weighting {
        Weighting::Uniform => vec![1.0; partitions.len()],
        Weighting::ValidityIndex => partitions.iter().map(|p| 1.0 / (1.0 + p.inertia)).collect(),
    };
    let total: f64 = gamma.iter().sum();
    Ok(gamma.into_iter().map(|g| g / total).collect())
}

// ── factored co-association matrix ──────────────────────────────────

/// One block `B_l = √w_l · A_l` of the factor, stored as labels.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentBlock {
    pub labels: Vec<usize>,
    pub clusters: usize,
    /// `√w_l`
    pub scale: f64,
    /// First column of this block in `B`.
    pub offset: usize,
}

/// `H = B Bᵀ` together with the degree vector `D'`, in `O(n r)` storage.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleFactor {
    n: usize,
    blocks: Vec<AssignmentBlock>,
    weights: Vec<f64>,
    degrees: Vec<f64>,
    total_columns: usize,
}

/// Assembles the factor `B` and degrees `D'` without forming `H`.
pub fn build_factor(partitions: &[Partition], weights: &[f64]) -> Result<EnsembleFactor, EnsembleError> {
    if partitions.is_empty() {
        return Err(EnsembleError::InvalidConfig("at least one partition is required"));
    }
    if weights.len() != partitions.len() {
        return Err(EnsembleError::DimensionMismatch {
            expected: partitions.len(),
            found: weights.len(),
        });
    }
    let total: f64 = weights.iter().sum();
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || (total - 1.0).abs() > 1e-10 {
        return Err(EnsembleError::InvalidWeights);
    }
    let n = partitions[0].len();
    let mut degrees = vec![0.0; n];
    let mut blocks = Vec::with_capacity(partitions.len());
    let mut offset = 0;
    for (p, &w) in partitions.iter().zip(weights) {
        if p.len() != n {
            return Err(EnsembleError::DimensionMismatch {
                expected: n,
                found: p.len(),
            });
        }
        let sizes = p.cluster_sizes();
        for (d, &c) in degrees.iter_mut().zip(&p.labels) {
            *d += w * sizes[c] as f64;
        }
        blocks.push(AssignmentBlock {
            labels: p.labels.clone(),
            clusters: p.k,
            scale: libm::sqrt(w),
            offset,
        });
        offset += p.k;
    }
    Ok(EnsembleFactor {
        n,
        blocks,
        weights: weights.to_vec(),
        degrees,
        total_columns: offset,
    })
}

impl EnsembleFactor {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `m = Σ K_l`, the number of columns of `B`.
    pub fn total_columns(&self) -> usize {
        self.total_columns
    }

    pub fn blocks(&self) -> &[AssignmentBlock] {
        &self.blocks
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `D'_i = Σ_j H(i, j)`.
    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// `Bᵀ x`, length `m`.
    pub fn bt_apply(&self, x: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; self.total_columns];
        for b in &self.blocks {
            for (&c, &xi) in b.labels.iter().zip(x) {
                z[b.offset + c] += b.scale * xi;
            }
        }
        z
    }

    /// `B z`, length `n`.
    pub fn b_apply(&self, z: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for b in &self.blocks {
            for (yi, &c) in y.iter_mut().zip(&b.labels) {
                *yi += b.scale * z[b.offset + c];
            }
        }
        y
    }

    /// Explicit `n × m` factor, for tests and small problems.
    pub fn to_dense_b(&self) -> DenseMatrix {
        let mut b = DenseMatrix::zeros(self.n, self.total_columns);
        for blk in &self.blocks {
            for (i, &c) in blk.labels.iter().enumerate() {
                b[(i, blk.offset + c)] = blk.scale;
            }
        }
        b
    }

    /// Same factor with rows reordered: row `i` of the result is row
    /// `order[i]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self, EnsembleError> {
        if order.len() != self.n {
            return Err(EnsembleError::DimensionMismatch {
                expected: self.n,
                found: order.len(),
            });
        }
        let blocks = self
            .blocks
            .iter()
            .map(|b| AssignmentBlock {
                labels: order.iter().map(|&i| b.labels[i]).collect(),
                ..b.clone()
            })
            .collect();
        let degrees = order.iter().map(|&i| self.degrees[i]).collect();
        Ok(Self {
            blocks,
            degrees,
            ..self.clone()
        })
    }
}

/// `H x = B (Bᵀ x)` in `O(n m)`.
pub fn factor_gram_apply(f: &EnsembleFactor, x: &[f64]) -> Result<Vec<f64>, EnsembleError> {
    if x.len() != f.n {
        return Err(EnsembleError::DimensionMismatch {
            expected: f.n,
            found: x.len(),
        });
    }
    Ok(f.b_apply(&f.bt_apply(x)))
}

impl LinearOperator for EnsembleFactor {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(&self.b_apply(&self.bt_apply(x)));
    }

    fn diagonal(&self) -> Option<Vec<f64>> {
        let s: f64 = self.weights.iter().sum();
        Some(vec![s; self.n])
    }
}

/// Full `n × n` co-association matrix by direct indicator evaluation.
/// Test oracle; refuses `n > DENSE_COASSOCIATION_CAP`.
pub fn dense_coassociation(partitions: &[Partition], weights: &[f64]) -> Result<DenseMatrix, EnsembleError> {
    if weights.len() != partitions.len() {
        return Err(EnsembleError::DimensionMismatch {
            expected: partitions.len(),
            found: weights.len(),
        });
    }
    let n = partitions.first().map_or(0, |p| p.len());
    if n > DENSE_COASSOCIATION_CAP {
        return Err(EnsembleError::TooLarge {
            n,
            cap: DENSE_COASSOCIATION_CAP,
        });
    }
    if let Some(p) = partitions.iter().find(|p| p.len() != n) {
        return Err(EnsembleError::DimensionMismatch {
            expected: n,
            found: p.len(),
        });
    }
    Ok(DenseMatrix::from_fn(n, n, |i, j| {
        partitions
            .iter()
            .zip(weights)
            .map(|(p, &w)| if p.labels[i] == p.labels[j] { w } else { 0.0 })
            .sum()
    }))
}
