//! Datasets, the two-component Gaussian mixture, labeled/unlabeled splits
//! and response transforms.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::numerics::DenseMatrix;
use crate::seeding::rng_from_seed;
use crate::solver::LabeledProblem;

#[derive(Debug, Clone, PartialEq)]
pub enum DataError {
    DimensionMismatch {
        expected: usize,
        found: usize,
    },
    NonFinite,
    InvalidSpec(&'static str),
    /// Split fraction outside `(0, 1)`.
    InvalidFraction(f64),
    EmptyLabeledSet,
    Empty,
    /// `log(1 + y)` is undefined for `y ≤ −1`.
    OutOfDomain(f64),
}

impl fmt::Display for DataError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Self::NonFinite => f.write_str("dataset contains non-finite values"),
            Self::InvalidSpec(why) => write!(f, "invalid mixture specification: {why}"),
            Self::InvalidFraction(v) => write!(f, "labeled fraction must lie in (0, 1), got {v}"),
            Self::EmptyLabeledSet => f.write_str("split produced no labeled points"),
            Self::Empty => f.write_str("input is empty"),
            Self::OutOfDomain(v) => write!(f, "value {v} is outside the domain of log(1 + y)"),
        }
    }
}

impl core::error::Error for DataError {}

/// Points, responses and optional mixture component ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: DenseMatrix,
    /// Ground truth for synthetic data, observed responses for real data.
    pub y: Vec<f64>,
    /// Component id (1 or 2) of each point, synthetic data only.
    pub component: Option<Vec<u32>>,
    pub feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        features: DenseMatrix,
        y: Vec<f64>,
        component: Option<Vec<u32>>,
        feature_names: Vec<String>,
    ) -> Result<Self, DataError> {
        let n = features.rows();
        if y.len() != n {
            return Err(DataError::DimensionMismatch {
                expected: n,
                found: y.len(),
            });
        }
        if let Some(c) = &component {
            if c.len() != n {
                return Err(DataError::DimensionMismatch {
                    expected: n,
                    found: c.len(),
                });
            }
        }
        if feature_names.len() != features.cols() {
            return Err(DataError::DimensionMismatch {
                expected: features.cols(),
                found: feature_names.len(),
            });
        }
        if y.iter().any(|v| !v.is_finite()) || features.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(DataError::NonFinite);
        }
        Ok(Self {
            features,
            y,
            component,
            feature_names,
        })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    /// Rows reordered so that row `i` of the result is row `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let d = self.dim();
        let features = DenseMatrix::from_fn(order.len(), d, |i, j| self.features[(order[i], j)]);
        Self {
            features,
            y: order.iter().map(|&i| self.y[i]).collect(),
            component: self.component.as_ref().map(|c| order.iter().map(|&i| c[i]).collect()),
            feature_names: self.feature_names.clone(),
        }
    }

    /// Copy with responses replaced, e.g. by [`quartile_transform`].
    pub fn with_response(&self, y: Vec<f64>) -> Result<Self, DataError> {
        Self::new(
            self.features.clone(),
            y,
            self.component.clone(),
            self.feature_names.clone(),
        )
    }
}

/// Two equally likely Gaussian components `𝒩(a_c 𝟙, σ_X² I)` in `d`
/// dimensions, two extra `U(0, σ_X)` noise features, and response
/// `y = c + ε` with `ε ~ 𝒩(0, σ_ε²)` for component `c ∈ {1, 2}`.
///
/// `sigma_x` is a standard deviation, not a variance.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MixtureSpec {
    pub n: usize,
    pub d: usize,
    pub sigma_x: f64,
    pub sigma_eps: f64,
    /// Every coordinate of the first component mean.
    pub mean_1: f64,
    /// Every coordinate of the second component mean.
    pub mean_2: f64,
}

impl Default for MixtureSpec {
    fn default() -> Self {
        Self {
            n: 1000,
            d: 8,
            sigma_x: 5.0,
            sigma_eps: 0.01,
            mean_1: 0.0,
            mean_2: 10.0,
        }
    }
}

impl MixtureSpec {
    pub fn validate(&self) -> Result<(), DataError> {
        if self.n < 2 {
            return Err(DataError::InvalidSpec("n must be at least 2"));
        }
        if self.d == 0 {
            return Err(DataError::InvalidSpec("d must be at least 1"));
        }
        if !(self.sigma_x > 0.0 && self.sigma_x.is_finite()) {
            return Err(DataError::InvalidSpec("sigma_x must be positive"));
        }
        if !(self.sigma_eps >= 0.0 && self.sigma_eps.is_finite()) {
            return Err(DataError::InvalidSpec("sigma_eps must be nonnegative"));
        }
        if !(self.mean_1.is_finite() && self.mean_2.is_finite()) {
            return Err(DataError::InvalidSpec("component means must be finite"));
        }
        Ok(())
    }
}

/// Draws a mixture sample; columns are the `d` Gaussian features followed
/// by the two noise features.
pub fn generate_mixture(spec: &MixtureSpec, seed: u64) -> Result<Dataset, DataError> {
    spec.validate()?;
    let mut rng = rng_from_seed(seed);
    let cols = spec.d + 2;
    let mut data = Vec::with_capacity(spec.n * cols);
    let mut y = Vec::with_capacity(spec.n);
    let mut component = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let c: u32 = if rng.random_bool(0.5) { 2 } else { 1 };
        let mean = if c == 1 { spec.mean_1 } else { spec.mean_2 };
        for _ in 0..spec.d {
            let z: f64 = StandardNormal.sample(&mut rng);
            data.push(mean + spec.sigma_x * z);
        }
        for _ in 0..2 {
            data.push(rng.random_range(0.0..spec.sigma_x));
        }
        let eps: f64 = StandardNormal.sample(&mut rng);
        y.push(c as f64 + spec.sigma_eps * eps);
        component.push(c);
    }
    let features = DenseMatrix::from_vec(spec.n, cols, data).map_err(|_| DataError::NonFinite)?;
    let mut names: Vec<String> = (1..=spec.d).map(|k| format!("x{k}")).collect();
    names.push(String::from("noise1"));
    names.push(String::from("noise2"));
    Dataset::new(features, y, Some(component), names)
}

/// Dataset reordered labeled-first, with the padded label vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitProblem {
    pub dataset: Dataset,
    pub n_labeled: usize,
    /// `permutation[i]` is the original index of row `i`.
    pub permutation: Vec<usize>,
    pub problem: LabeledProblem,
}

impl SplitProblem {
    pub fn n(&self) -> usize {
        self.dataset.len()
    }

    /// Responses of all points in split order, used for scoring.
    pub fn y_true(&self) -> &[f64] {
        &self.dataset.y
    }
}

/// `⌈x⌉`, ignoring excess from floating-point noise such as
/// `0.1 · 1000 = 100.00000000000001`.
fn ceil_guarded(x: f64) -> usize {
    libm::ceil(x - 1e-9 * x.max(1.0)).max(0.0) as usize
}

/// Labels `⌈fraction · n_c⌉` randomly chosen points of every component
/// (or of the whole set when there are no component ids).
///
/// Labeled points come first; within each part the original order is
/// kept.
pub fn split_labeled(ds: &Dataset, fraction: f64, seed: u64) -> Result<SplitProblem, DataError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(DataError::InvalidFraction(fraction));
    }
    let n = ds.len();
    let mut groups: Vec<(u32, Vec<usize>)> = Vec::new();
    match &ds.component {
        Some(comp) => {
            let mut ids: Vec<u32> = comp.clone();
            ids.sort_unstable();
            ids.dedup();
            for id in ids {
                groups.push((id, (0..n).filter(|&i| comp[i] == id).collect()));
            }
        }
        None => groups.push((0, (0..n).collect())),
    }

    let mut rng = rng_from_seed(seed);
    let mut is_labeled = vec![false; n];
    for (_, members) in groups.iter_mut() {
        let take = ceil_guarded(fraction * members.len() as f64).min(members.len());
        members.shuffle(&mut rng);
        for &i in &members[..take] {
            is_labeled[i] = true;
        }
    }
    let mut permutation: Vec<usize> = (0..n).filter(|&i| is_labeled[i]).collect();
    let n_labeled = permutation.len();
    if n_labeled == 0 {
        return Err(DataError::EmptyLabeledSet);
    }
    permutation.extend((0..n).filter(|&i| !is_labeled[i]));
    let dataset = ds.permuted(&permutation);
    let problem = LabeledProblem::new(&dataset.y[..n_labeled], n).map_err(|_| DataError::NonFinite)?;
    Ok(SplitProblem {
        dataset,
        n_labeled,
        permutation,
        problem,
    })
}

/// Type-7 (linear interpolation) sample quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Replaces each `y_i` by the index `q ∈ {1, 2, 3, 4}` of the quartile of
/// `log(1 + y_i)`; a value equal to a quartile boundary goes to the lower
/// quartile.
pub fn quartile_transform(y: &[f64]) -> Result<Vec<f64>, DataError> {
    if y.is_empty() {
        return Err(DataError::Empty);
    }
    if let Some(&bad) = y.iter().find(|&&v| !v.is_finite() || v <= -1.0) {
        return Err(DataError::OutOfDomain(bad));
    }
    let z: Vec<f64> = y.iter().map(|&v| libm::log1p(v)).collect();
    let mut sorted = z.clone();
    sorted.sort_by(f64::total_cmp);
    let q = [0.25, 0.5, 0.75].map(|p| quantile_sorted(&sorted, p));
    Ok(z.iter()
        .map(|&v| {
            if v <= q[0] {
                1.0
            } else if v <= q[1] {
                2.0
            } else if v <= q[2] {
                3.0
            } else {
                4.0
            }
        })
        .collect())
}

/// Scales every column to `[0, 1]`; constant columns become zero.
pub fn min_max_scale(x: &DenseMatrix) -> DenseMatrix {
    let (n, d) = (x.rows(), x.cols());
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for i in 0..n {
        for (j, &v) in x.row(i).iter().enumerate() {
            lo[j] = lo[j].min(v);
            hi[j] = hi[j].max(v);
        }
    }
    DenseMatrix::from_fn(n, d, |i, j| {
        let span = hi[j] - lo[j];
        if span > 0.0 {
            (x[(i, j)] - lo[j]) / span
        } else {
            0.0
        }
    })
}
