//! Cross-validated choice of `α` and `β`.
//!
//! The ensemble is built once on all points (it never sees labels). Each
//! fold then hides a fifth of the labeled points, reorders the factor so the
//! remaining labels come first, solves, and scores the hidden ones.

use serde::{Deserialize, Serialize};

use lrcm_core::data::SplitProblem;
use lrcm_core::ensemble::EnsembleFactor;
use lrcm_core::seeding::derive_seed;
use lrcm_core::solver::{solve_woodbury, LabeledProblem, SolverConfig, SolverPath};

use crate::experiment::{
    build_ensemble_factor, load_base_dataset, repetition_split, ExperimentConfig, STREAM_ENSEMBLE,
};
use crate::stats::{mean, rmse};
use crate::Error;

pub const DEFAULT_FOLDS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub alpha: f64,
    pub beta: f64,
    /// Mean held-out RMSE over folds; `None` if a solve failed.
    pub cv_rmse: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub best_alpha: f64,
    pub best_beta: f64,
    pub best_rmse: f64,
    pub folds: usize,
    pub cells: Vec<GridCell>,
}

/// Held-out RMSE of one `(α, β)` cell, averaged over `folds` strided folds
/// of the labeled points.
pub fn cross_validate(
    split: &SplitProblem,
    factor: &EnsembleFactor,
    alpha: f64,
    beta: f64,
    folds: usize,
) -> Result<f64, Error> {
    let nl = split.n_labeled;
    let n = split.n();
    let y = split.y_true();
    let mut scores = Vec::with_capacity(folds);
    for fold in 0..folds {
        let (held, kept): (Vec<usize>, Vec<usize>) = (0..nl).partition(|i| i % folds == fold);
        let order: Vec<usize> = kept.iter().chain(&held).copied().chain(nl..n).collect();
        let f = factor.permuted(&order)?;
        let labels: Vec<f64> = kept.iter().map(|&i| y[i]).collect();
        let prob = LabeledProblem::new(&labels, n)?;
        let cfg = SolverConfig::new(alpha, beta, SolverPath::Woodbury)?;
        let pred = solve_woodbury(&f, &prob, &cfg)?;
        let truth: Vec<f64> = held.iter().map(|&i| y[i]).collect();
        scores.push(rmse(&pred.f[kept.len()..nl], &truth)?);
    }
    Ok(mean(&scores))
}

/// Lowest CV error, preferring the larger `β` on ties.
pub fn best_cell(cells: &[GridCell]) -> Option<(GridCell, f64)> {
    cells
        .iter()
        .filter_map(|c| c.cv_rmse.map(|r| (*c, r)))
        .min_by(|(a, ra), (b, rb)| ra.total_cmp(rb).then(b.beta.total_cmp(&a.beta)))
}

/// Scores every cell of `alphas × betas` on the split of repetition 0 and
/// returns the smallest CV error; ties go to the larger `β`.
pub fn grid_search(cfg: &ExperimentConfig, alphas: &[f64], betas: &[f64]) -> Result<GridResult, Error> {
    if alphas.is_empty() || betas.is_empty() {
        return Err(Error::Config("grid lists must be nonempty".into()));
    }
    if alphas.iter().chain(betas).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Config("grid values must be positive".into()));
    }
    let base = load_base_dataset(cfg)?;
    let split = repetition_split(cfg, base.as_ref(), 0)?;
    let folds = DEFAULT_FOLDS.min(split.n_labeled);
    if folds < 2 {
        return Err(Error::Config(
            "cross-validation needs at least two labeled points".into(),
        ));
    }
    let ens = cfg.ensemble.with_seed(derive_seed(cfg.seed, 0, STREAM_ENSEMBLE));
    let factor = build_ensemble_factor(&split, &ens)?;

    let mut cells = Vec::with_capacity(alphas.len() * betas.len());
    for &alpha in alphas {
        for &beta in betas {
            let cv_rmse = cross_validate(&split, &factor, alpha, beta, folds)
                .ok()
                .filter(|v| v.is_finite());
            cells.push(GridCell { alpha, beta, cv_rmse });
        }
    }
    let Some((best, best_rmse)) = best_cell(&cells) else {
        return Err(Error::Config("every grid cell failed to solve".into()));
    };
    Ok(GridResult {
        best_alpha: best.alpha,
        best_beta: best.beta,
        best_rmse,
        folds,
        cells,
    })
}
