//! Graph-Laplacian regularized transductive regression.
//!
//! With the labeled points stored first, the minimizer of
//!
//! ```text
//! Σ_{i ≤ n₁} (f_i − y_i)² + α Σ_{i,j} w_ij (f_i − f_j)² / 2 + β ‖f‖²
//! ```
//!
//! is `f* = (G + αL)⁻¹ Y₁,₀`, where `G = diag(β+1, …, β+1, β, …, β)`,
//! `L = D − W` and `Y₁,₀` is the label vector padded with zeros.
//!
//! When `W = H = B Bᵀ` is a co-association matrix, `G + αL = S − αBBᵀ`
//! with diagonal `S = G + αD'`, and the Woodbury identity gives
//!
//! ```text
//! f** = S⁻¹Y + α S⁻¹B (I − α BᵀS⁻¹B)⁻¹ BᵀS⁻¹Y
//! ```
//!
//! which only needs an `m × m` solve, `m = Σ K_l`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::time::Duration;

use crate::ensemble::EnsembleFactor;
use crate::numerics::{dot, DenseMatrix, Lu, NumericsError, SYMMETRY_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SolverPath {
    /// Cholesky on `G + αL` with a kernel similarity matrix.
    DenseRbf,
    /// Cholesky on `G + αL` with the dense co-association matrix.
    DenseEnsemble,
    Woodbury,
    /// Conjugate gradient with a matrix-free (usually hierarchical) `W`.
    HMatrixCg,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolverConfig {
    pub alpha: f64,
    pub beta: f64,
    pub path: SolverPath,
}

impl SolverConfig {
    pub fn new(alpha: f64, beta: f64, path: SolverPath) -> Result<Self, SolveError> {
        let cfg = Self { alpha, beta, path };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `α ≥ 0` (zero gives the decoupled diagonal solve) and `β > 0`.
    pub fn validate(&self) -> Result<(), SolveError> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(SolveError::InvalidConfig("alpha must be finite and nonnegative"));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(SolveError::InvalidConfig("beta must be finite and positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveError {
    DimensionMismatch {
        expected: usize,
        found: usize,
    },
    AsymmetricInput,
    /// `G + αL` lost definiteness; only possible with a corrupted `W`.
    NotPositiveDefinite,
    /// The `m × m` Woodbury core is numerically singular.
    SingularCore {
        alpha: f64,
    },
    NotConverged {
        iterations: usize,
        residual: f64,
    },
    InvalidConfig(&'static str),
    InvalidProblem(&'static str),
    Numerics(NumericsError),
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Self::AsymmetricInput => f.write_str("similarity matrix is not symmetric"),
            Self::NotPositiveDefinite => f.write_str("G + alpha*L is not positive definite"),
            Self::SingularCore { alpha } => {
                write!(
                    f,
                    "Woodbury core matrix is singular (alpha = {alpha} is the likely cause)"
                )
            }
            Self::NotConverged { iterations, residual } => {
                write!(
                    f,
                    "CG did not converge in {iterations} iterations (relative residual {residual:e})"
                )
            }
            Self::InvalidConfig(why) => write!(f, "invalid solver configuration: {why}"),
            Self::InvalidProblem(why) => write!(f, "invalid problem: {why}"),
            Self::Numerics(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for SolveError {}

impl From<NumericsError> for SolveError {
    fn from(e: NumericsError) -> Self {
        match e {
            NumericsError::DimensionMismatch { expected, found } => Self::DimensionMismatch { expected, found },
            NumericsError::NotSymmetric => Self::AsymmetricInput,
            NumericsError::NotPositiveDefinite { .. } => Self::NotPositiveDefinite,
            NumericsError::NotConverged { iterations, residual } => Self::NotConverged { iterations, residual },
            other => Self::Numerics(other),
        }
    }
}

/// Labels padded to length `n`: `Y₁,₀ = (y_1, …, y_{n₁}, 0, …, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledProblem {
    n_labeled: usize,
    y_padded: Vec<f64>,
}

impl LabeledProblem {
    /// Labels for the first `labels.len()` of `n` points.
    pub fn new(labels: &[f64], n: usize) -> Result<Self, SolveError> {
        if labels.is_empty() || labels.len() > n {
            return Err(SolveError::InvalidProblem("need 1 <= n1 <= n labeled points"));
        }
        if labels.iter().any(|v| !v.is_finite()) {
            return Err(SolveError::InvalidProblem("labels must be finite"));
        }
        let mut y_padded = vec![0.0; n];
        y_padded[..labels.len()].copy_from_slice(labels);
        Ok(Self {
            n_labeled: labels.len(),
            y_padded,
        })
    }

    pub fn n(&self) -> usize {
        self.y_padded.len()
    }

    pub fn n_labeled(&self) -> usize {
        self.n_labeled
    }

    pub fn y_padded(&self) -> &[f64] {
        &self.y_padded
    }

    pub fn labels(&self) -> &[f64] {
        &self.y_padded[..self.n_labeled]
    }

    /// Same problem with every label multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            n_labeled: self.n_labeled,
            y_padded: self.y_padded.iter().map(|v| c * v).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// Predictions for all `n` points, labeled ones included.
    pub f: Vec<f64>,
    pub path: SolverPath,
    /// Wall-clock solve time, filled in by callers that have a clock.
    pub solve_time: Option<Duration>,
}

impl Prediction {
    pub fn new(f: Vec<f64>, path: SolverPath) -> Self {
        Self {
            f,
            path,
            solve_time: None,
        }
    }
}

/// Diagonal of `G`: `β + 1` on the first `n₁` entries, `β` after.
pub fn build_g_diagonal(n: usize, n_labeled: usize, beta: f64) -> Vec<f64> {
    (0..n).map(|i| if i < n_labeled { beta + 1.0 } else { beta }).collect()
}

/// `L = D − W` with `D_ii = Σ_j w_ij`.
pub fn graph_laplacian(w: &DenseMatrix) -> Result<DenseMatrix, SolveError> {
    if !w.is_square() {
        return Err(SolveError::DimensionMismatch {
            expected: w.rows(),
            found: w.cols(),
        });
    }
    if !w.is_symmetric(SYMMETRY_TOL) {
        return Err(SolveError::AsymmetricInput);
    }
    let n = w.rows();
    let mut l = DenseMatrix::zeros(n, n);
    for i in 0..n {
        let row = w.row(i);
        let degree: f64 = row.iter().sum();
        for (dst, &wij) in l.row_mut(i).iter_mut().zip(row) {
            *dst = -wij;
        }
        l[(i, i)] += degree;
    }
    Ok(l)
}

/// `Σ_{i,j} w_ij (f_i − f_j)²`, evaluated directly from `W`.
pub fn laplacian_quadform(w: &DenseMatrix, f: &[f64]) -> f64 {
    let mut total = 0.0;
    for (i, &fi) in f.iter().enumerate() {
        total += w
            .row(i)
            .iter()
            .zip(f)
            .map(|(wij, fj)| wij * (fi - fj) * (fi - fj))
            .sum::<f64>();
    }
    total
}

/// `G + αL`, assembled densely.
pub fn system_matrix(w: &DenseMatrix, prob: &LabeledProblem, cfg: &SolverConfig) -> Result<DenseMatrix, SolveError> {
    cfg.validate()?;
    if w.rows() != prob.n() {
        return Err(SolveError::DimensionMismatch {
            expected: prob.n(),
            found: w.rows(),
        });
    }
    let mut a = graph_laplacian(w)?;
    let g = build_g_diagonal(prob.n(), prob.n_labeled(), cfg.beta);
    for (i, gi) in g.iter().enumerate() {
        for v in a.row_mut(i) {
            *v *= cfg.alpha;
        }
        a[(i, i)] += gi;
    }
    Ok(a)
}

/// `f* = (G + αL)⁻¹ Y₁,₀` by dense Cholesky, for any symmetric `W`.
///
/// The returned path is `cfg.path` when it names a dense variant and
/// [`SolverPath::DenseRbf`] otherwise.
pub fn solve_dense(w: &DenseMatrix, prob: &LabeledProblem, cfg: &SolverConfig) -> Result<Prediction, SolveError> {
    let a = system_matrix(w, prob, cfg)?;
    let f = crate::numerics::cholesky_solve(&a, prob.y_padded())?;
    let path = match cfg.path {
        SolverPath::DenseEnsemble => SolverPath::DenseEnsemble,
        _ => SolverPath::DenseRbf,
    };
    Ok(Prediction::new(f, path))
}

/// `f**` through the Woodbury identity on the ensemble factor.
///
/// Storage is `O(n r + m²)` and time `O(n r² + m³)`; no `n × n` matrix is
/// formed.
pub fn solve_woodbury(
    factor: &EnsembleFactor,
    prob: &LabeledProblem,
    cfg: &SolverConfig,
) -> Result<Prediction, SolveError> {
    cfg.validate()?;
    let n = prob.n();
    if factor.n() != n {
        return Err(SolveError::DimensionMismatch {
            expected: n,
            found: factor.n(),
        });
    }
    let alpha = cfg.alpha;
    let g = build_g_diagonal(n, prob.n_labeled(), cfg.beta);
    let s_inv: Vec<f64> = g
        .iter()
        .zip(factor.degrees())
        .map(|(gi, di)| 1.0 / (gi + alpha * di))
        .collect();

    // u = S⁻¹ y
    let u: Vec<f64> = prob.y_padded().iter().zip(&s_inv).map(|(y, s)| y * s).collect();
    if alpha == 0.0 {
        return Ok(Prediction::new(u, SolverPath::Woodbury));
    }

    // M = I − α BᵀS⁻¹B. Row i of B has one nonzero per block.
    let m = factor.total_columns();
    let blocks = factor.blocks();
    let mut core = DenseMatrix::identity(m);
    for (i, &si) in s_inv.iter().enumerate() {
        for a in blocks {
            let p = a.offset + a.labels[i];
            let ca = alpha * a.scale * si;
            for b in blocks {
                let q = b.offset + b.labels[i];
                core[(p, q)] -= ca * b.scale;
            }
        }
    }

    let t = factor.bt_apply(&u);
    let z = Lu::new(&core).and_then(|lu| lu.solve(&t)).map_err(|e| match e {
        NumericsError::SingularMatrix { .. } => SolveError::SingularCore { alpha },
        other => other.into(),
    })?;
    let bz = factor.b_apply(&z);
    let f: Vec<f64> = u
        .iter()
        .zip(&bz)
        .zip(&s_inv)
        .map(|((ui, bi), si)| ui + alpha * si * bi)
        .collect();
    if f.iter().any(|v| !v.is_finite()) {
        return Err(SolveError::SingularCore { alpha });
    }
    Ok(Prediction::new(f, SolverPath::Woodbury))
}

/// Value of the regularized objective at `f`, with the smoothness term
/// written as `α fᵀ L f`.
pub fn objective(w: &DenseMatrix, prob: &LabeledProblem, cfg: &SolverConfig, f: &[f64]) -> f64 {
    let fit: f64 = prob.labels().iter().zip(f).map(|(y, fi)| (fi - y) * (fi - y)).sum();
    fit + cfg.alpha * 0.5 * laplacian_quadform(w, f) + cfg.beta * dot(f, f)
}
