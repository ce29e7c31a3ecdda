//! Distance-based similarity functions and dense similarity assembly.
//!
//! The Matérn family is normalized as
//!
//! ```text
//! W(h) = σ² / (2^(ν−1) Γ(ν)) · (h/ℓ)^ν · K_ν(h/ℓ)
//! ```
//!
//! i.e. the argument is `h/ℓ` without the `√(2ν)` factor used by many
//! Gaussian-process libraries. A lengthscale taken from such a library must
//! be divided by `√(2ν)` to describe the same kernel here. Only the
//! half-integer orders with closed forms are provided:
//!
//! | family        | `W(h)` with `z = h/ℓ`          |
//! |---------------|--------------------------------|
//! | `Exponential` | `σ² e^(−z)`                    |
//! | `Matern32`    | `σ² (1 + z) e^(−z)`            |
//! | `Matern52`    | `σ² (1 + z + z²/3) e^(−z)`     |
//! | `Gaussian`    | `σ² e^(−z²/2)`                 |
//! | `Rbf`         | `e^(−z²/2)` (variance fixed 1) |

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::numerics::{squared_distance, DenseMatrix, LinearOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum KernelFamily {
    /// Matérn ν = 1/2.
    Exponential,
    /// Matérn ν = 3/2.
    Matern32,
    /// Matérn ν = 5/2.
    Matern52,
    /// Matérn ν → ∞.
    Gaussian,
    Rbf,
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelError {
    InvalidLengthscale(f64),
    InvalidVariance(f64),
}

impl fmt::Display for KernelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidLengthscale(v) => write!(f, "lengthscale must be positive, got {v}"),
            Self::InvalidVariance(v) => write!(f, "variance must be positive, got {v}"),
        }
    }
}

impl core::error::Error for KernelError {}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KernelParams {
    pub family: KernelFamily,
    pub lengthscale: f64,
    pub variance: f64,
}

impl KernelParams {
    /// Validated constructor. RBF ignores `variance` and stores 1.
    pub fn new(family: KernelFamily, lengthscale: f64, variance: f64) -> Result<Self, KernelError> {
        if !(lengthscale > 0.0 && lengthscale.is_finite()) {
            return Err(KernelError::InvalidLengthscale(lengthscale));
        }
        let variance = if family == KernelFamily::Rbf { 1.0 } else { variance };
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(KernelError::InvalidVariance(variance));
        }
        Ok(Self {
            family,
            lengthscale,
            variance,
        })
    }

    pub fn rbf(lengthscale: f64) -> Result<Self, KernelError> {
        Self::new(KernelFamily::Rbf, lengthscale, 1.0)
    }

    pub fn matern32(lengthscale: f64, variance: f64) -> Result<Self, KernelError> {
        Self::new(KernelFamily::Matern32, lengthscale, variance)
    }

    pub fn validate(&self) -> Result<(), KernelError> {
        Self::new(self.family, self.lengthscale, self.variance).map(|_| ())
    }

    /// Value at zero distance.
    pub fn peak(&self) -> f64 {
        match self.family {
            KernelFamily::Rbf => 1.0,
            _ => self.variance,
        }
    }

    #[inline]
    pub fn value(&self, h: f64) -> f64 {
        kernel_value(h, self)
    }

    /// Kernel value from a squared distance, skipping the square root for
    /// the Gaussian-type families.
    #[inline]
    pub fn value_sq(&self, h2: f64) -> f64 {
        let inv = 1.0 / (self.lengthscale * self.lengthscale);
        match self.family {
            KernelFamily::Gaussian => self.variance * libm::exp(-0.5 * h2 * inv),
            KernelFamily::Rbf => libm::exp(-0.5 * h2 * inv),
            _ => kernel_value(libm::sqrt(h2), self),
        }
    }
}

/// Similarity at distance `h ≥ 0`.
pub fn kernel_value(h: f64, p: &KernelParams) -> f64 {
    debug_assert!(h >= 0.0);
    let z = h / p.lengthscale;
    match p.family {
        KernelFamily::Exponential => p.variance * libm::exp(-z),
        KernelFamily::Matern32 => p.variance * (1.0 + z) * libm::exp(-z),
        KernelFamily::Matern52 => p.variance * (1.0 + z + z * z / 3.0) * libm::exp(-z),
        KernelFamily::Gaussian => p.variance * libm::exp(-0.5 * z * z),
        KernelFamily::Rbf => libm::exp(-0.5 * z * z),
    }
}

/// Dense `n × n` similarity matrix over the rows of `points`.
///
/// Each unordered pair is evaluated once and mirrored, so the result is
/// exactly symmetric.
pub fn similarity_matrix(points: &DenseMatrix, p: &KernelParams) -> DenseMatrix {
    let n = points.rows();
    let mut w = DenseMatrix::zeros(n, n);
    let peak = p.peak();
    for i in 0..n {
        w[(i, i)] = peak;
        let xi = points.row(i);
        for j in (i + 1)..n {
            let v = p.value_sq(squared_distance(xi, points.row(j)));
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
    }
    w
}

/// Matrix-free view of the similarity matrix: entries are evaluated on
/// demand and never stored.
#[derive(Debug, Clone, Copy)]
pub struct KernelMatrix<'a> {
    points: &'a DenseMatrix,
    params: KernelParams,
}

impl<'a> KernelMatrix<'a> {
    pub fn new(points: &'a DenseMatrix, params: KernelParams) -> Self {
        Self { points, params }
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.params.peak();
        }
        self.params
            .value_sq(squared_distance(self.points.row(i), self.points.row(j)))
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn points(&self) -> &DenseMatrix {
        self.points
    }
}

impl LinearOperator for KernelMatrix<'_> {
    fn dim(&self) -> usize {
        self.points.rows()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = (0..x.len()).map(|j| self.entry(i, j) * x[j]).sum();
        }
    }

    fn diagonal(&self) -> Option<Vec<f64>> {
        Some(vec![self.params.peak(); self.dim()])
    }
}
