//! Monte Carlo comparison of the ensemble method with the RBF baseline.
//!
//! Each repetition draws (or reuses) a dataset, splits it into labeled and
//! unlabeled parts, and solves the same split twice:
//!
//! - LRCM: K-means ensemble, factored co-association matrix, Woodbury
//!   solve. Timed as `t_ens` (ensemble and factor) and `t_matr` (solve).
//! - RBF: dense kernel matrix and Cholesky solve, skipped with a
//!   `dense_infeasible` marker above `dense_cap` points.
//!
//! Repetitions run in parallel; every random choice is seeded from
//! `(seed, repetition, stream)`, so reports are reproducible up to
//! wall-clock timings.

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use lrcm_core::data::{
    generate_mixture, min_max_scale, quartile_transform, split_labeled, Dataset, MixtureSpec, SplitProblem,
};
use lrcm_core::ensemble::{build_factor, compute_weights, generate_member, EnsembleConfig, EnsembleFactor, Weighting};
use lrcm_core::kernels::{similarity_matrix, KernelParams};
use lrcm_core::seeding::{derive_seed, STREAM_DATA, STREAM_SPLIT};
use lrcm_core::solver::{solve_dense, solve_woodbury, SolverConfig, SolverPath};

use crate::stats::{mean, paired_t_test, rmse};
use crate::Error;

/// Seed stream for ensemble members, next to the ones in
/// [`lrcm_core::seeding`].
pub const STREAM_ENSEMBLE: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    SyntheticMixture,
    ForestFires,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleSettings {
    pub size: usize,
    pub cluster_counts: Vec<usize>,
    pub max_iter: usize,
    pub weighting: Weighting,
}

impl Default for EnsembleSettings {
    fn default() -> Self {
        Self {
            size: 10,
            cluster_counts: vec![2],
            max_iter: 100,
            weighting: Weighting::Uniform,
        }
    }
}

impl EnsembleSettings {
    pub fn with_seed(&self, seed: u64) -> EnsembleConfig {
        EnsembleConfig {
            size: self.size,
            cluster_counts: self.cluster_counts.clone(),
            max_iter: self.max_iter,
            seed,
            weighting: self.weighting,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
}

/// Everything needed to reproduce a report. Missing JSON fields take the
/// values of [`ExperimentConfig::default`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    /// Sample size (synthetic only; real data uses every row).
    pub n: usize,
    pub sigma_eps: f64,
    pub repetitions: usize,
    pub labeled_fraction: f64,
    pub seed: u64,
    /// Gaussian dimension of the mixture, before the two noise features.
    pub d: usize,
    /// Standard deviation of each Gaussian feature.
    pub sigma_x: f64,
    pub mean_1: f64,
    pub mean_2: f64,
    pub ensemble: EnsembleSettings,
    pub alpha: f64,
    pub beta: f64,
    pub baseline: KernelParams,
    /// Largest `n` for which the dense baseline is attempted.
    pub dense_cap: usize,
    pub data_path: Option<PathBuf>,
    pub grid: Option<GridSpec>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let mix = MixtureSpec::default();
        Self {
            scenario: Scenario::SyntheticMixture,
            n: mix.n,
            sigma_eps: mix.sigma_eps,
            repetitions: 40,
            labeled_fraction: 0.1,
            seed: 0,
            d: mix.d,
            sigma_x: mix.sigma_x,
            mean_1: mix.mean_1,
            mean_2: mix.mean_2,
            ensemble: EnsembleSettings::default(),
            alpha: 1.0,
            beta: 0.001,
            baseline: KernelParams::rbf(4.47).expect("valid lengthscale"),
            dense_cap: 20_000,
            data_path: None,
            grid: None,
        }
    }
}

impl ExperimentConfig {
    /// Settings for the Forest Fires table at `path`: 10 clusters per
    /// member and RBF lengthscale 0.1 on min-max scaled features.
    pub fn forest_fires(path: impl Into<PathBuf>) -> Self {
        Self {
            scenario: Scenario::ForestFires,
            ensemble: EnsembleSettings {
                cluster_counts: vec![10],
                ..Default::default()
            },
            baseline: KernelParams::rbf(0.1).expect("valid lengthscale"),
            data_path: Some(path.into()),
            ..Default::default()
        }
    }

    pub fn mixture_spec(&self) -> MixtureSpec {
        MixtureSpec {
            n: self.n,
            d: self.d,
            sigma_x: self.sigma_x,
            sigma_eps: self.sigma_eps,
            mean_1: self.mean_1,
            mean_2: self.mean_2,
        }
    }

    pub fn solver_config(&self, path: SolverPath) -> SolverConfig {
        SolverConfig {
            alpha: self.alpha,
            beta: self.beta,
            path,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1");
        }
        if !(self.labeled_fraction > 0.0 && self.labeled_fraction < 1.0) {
            return bad("labeled fraction must lie in (0, 1)");
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad("alpha must be positive");
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad("beta must be positive");
        }
        if let Err(e) = self.ensemble.with_seed(0).validate() {
            return Err(Error::Config(e.to_string()));
        }
        if let Err(e) = self.baseline.validate() {
            return Err(Error::Config(e.to_string()));
        }
        match self.scenario {
            Scenario::SyntheticMixture => {
                if let Err(e) = self.mixture_spec().validate() {
                    return Err(Error::Config(e.to_string()));
                }
            }
            Scenario::ForestFires => {
                if self.data_path.is_none() {
                    return bad("the forest fires scenario needs a data path");
                }
            }
        }
        if let Some(g) = &self.grid {
            if g.alphas.is_empty() || g.betas.is_empty() {
                return bad("grid lists must be nonempty");
            }
            if g.alphas.iter().chain(&g.betas).any(|v| v.is_nan() || *v <= 0.0) {
                return bad("grid values must be positive");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum LrcmOutcome {
    Completed { rmse: f64, t_ens: f64, t_matr: f64 },
    Failed { error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RbfOutcome {
    Completed {
        rmse: f64,
        time: f64,
    },
    /// `n` exceeded the dense cap; no attempt was made.
    DenseInfeasible,
    Failed {
        error: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionResult {
    pub repetition: usize,
    pub n: usize,
    pub n_labeled: usize,
    pub sigma_eps: f64,
    pub lrcm: LrcmOutcome,
    pub rbf: RbfOutcome,
}

impl RepetitionResult {
    pub fn lrcm_rmse(&self) -> Option<f64> {
        match self.lrcm {
            LrcmOutcome::Completed { rmse, .. } => Some(rmse),
            LrcmOutcome::Failed { .. } => None,
        }
    }

    pub fn rbf_rmse(&self) -> Option<f64> {
        match self.rbf {
            RbfOutcome::Completed { rmse, .. } => Some(rmse),
            _ => None,
        }
    }
}

/// Averages over completed repetitions; the t-test uses repetitions where
/// both methods completed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub lrcm_completed: usize,
    pub rbf_completed: usize,
    pub rbf_dense_infeasible: bool,
    pub mean_rmse_lrcm: Option<f64>,
    pub mean_t_ens: Option<f64>,
    pub mean_t_matr: Option<f64>,
    pub mean_rmse_rbf: Option<f64>,
    pub mean_time_rbf: Option<f64>,
    pub t_statistic: Option<f64>,
    pub p_value: Option<f64>,
}

fn mean_opt(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| mean(v))
}

impl Summary {
    pub fn from_repetitions(reps: &[RepetitionResult]) -> Self {
        let mut sorted: Vec<&RepetitionResult> = reps.iter().collect();
        sorted.sort_by_key(|r| r.repetition);
        let mut lrcm = (Vec::new(), Vec::new(), Vec::new());
        let mut rbf = (Vec::new(), Vec::new());
        let (mut paired_a, mut paired_b) = (Vec::new(), Vec::new());
        for r in &sorted {
            if let LrcmOutcome::Completed { rmse, t_ens, t_matr } = r.lrcm {
                lrcm.0.push(rmse);
                lrcm.1.push(t_ens);
                lrcm.2.push(t_matr);
            }
            if let RbfOutcome::Completed { rmse, time } = r.rbf {
                rbf.0.push(rmse);
                rbf.1.push(time);
            }
            if let (Some(a), Some(b)) = (r.lrcm_rmse(), r.rbf_rmse()) {
                paired_a.push(a);
                paired_b.push(b);
            }
        }
        let test = paired_t_test(&paired_a, &paired_b).ok();
        Self {
            lrcm_completed: lrcm.0.len(),
            rbf_completed: rbf.0.len(),
            rbf_dense_infeasible: sorted.iter().any(|r| r.rbf == RbfOutcome::DenseInfeasible),
            mean_rmse_lrcm: mean_opt(&lrcm.0),
            mean_t_ens: mean_opt(&lrcm.1),
            mean_t_matr: mean_opt(&lrcm.2),
            mean_rmse_rbf: mean_opt(&rbf.0),
            mean_time_rbf: mean_opt(&rbf.1),
            t_statistic: test.map(|t| t.t),
            p_value: test.map(|t| t.p),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub scenario: Scenario,
    pub n: usize,
    pub sigma_eps: f64,
    pub repetitions: Vec<RepetitionResult>,
    pub summary: Summary,
    /// Rough upper bound on the memory one repetition needs, in bytes.
    pub peak_memory_estimate: u64,
    pub config: ExperimentConfig,
}

impl ExperimentReport {
    pub fn new(
        cfg: &ExperimentConfig,
        n: usize,
        repetitions: Vec<RepetitionResult>,
        peak_memory_estimate: u64,
    ) -> Self {
        let sigma_eps = match cfg.scenario {
            Scenario::SyntheticMixture => cfg.sigma_eps,
            Scenario::ForestFires => 0.0,
        };
        Self {
            scenario: cfg.scenario,
            n,
            sigma_eps,
            summary: Summary::from_repetitions(&repetitions),
            repetitions,
            peak_memory_estimate,
            config: cfg.clone(),
        }
    }
}

/// Bytes held at once by one repetition: data, labels of every member, the
/// Woodbury core, a handful of length-`n` vectors, and, when the baseline
/// runs, three dense `n × n` matrices (kernel, system, Cholesky factor).
pub fn estimate_peak_memory(n: usize, dim: usize, cfg: &ExperimentConfig) -> u64 {
    let (n, dim) = (n as u64, dim as u64);
    let r = cfg.ensemble.size as u64;
    let m = r * cfg.ensemble.cluster_counts.iter().copied().max().unwrap_or(1) as u64;
    let mut bytes = 8 * (2 * n * dim + n * r + m * m + 8 * n);
    if n as usize <= cfg.dense_cap {
        bytes += 3 * 8 * n * n;
    }
    bytes
}

/// Min-max scaled predictors and quartile-indexed response.
pub fn prepare_forest_fires(raw: &Dataset) -> Result<Dataset, Error> {
    let y = quartile_transform(&raw.y)?;
    Ok(Dataset::new(
        min_max_scale(&raw.features),
        y,
        None,
        raw.feature_names.clone(),
    )?)
}

/// Draws the ensemble for `split` and assembles the factor.
pub fn build_ensemble_factor(split: &SplitProblem, cfg: &EnsembleConfig) -> Result<EnsembleFactor, Error> {
    let x = &split.dataset.features;
    let parts = (0..cfg.size)
        .into_par_iter()
        .map(|l| generate_member(x, cfg, l))
        .collect::<Result<Vec<_>, _>>()?;
    let w = compute_weights(&parts, cfg.weighting)?;
    Ok(build_factor(&parts, &w)?)
}

/// Values predictions are scored against. For the mixture this is the
/// noise-free response fixed by the component; the learner only ever sees
/// the noisy labels. Real data is scored against its observed response.
pub fn scoring_target(split: &SplitProblem, scenario: Scenario) -> Vec<f64> {
    match (scenario, &split.dataset.component) {
        (Scenario::SyntheticMixture, Some(c)) => c.iter().map(|&k| k as f64).collect(),
        _ => split.y_true().to_vec(),
    }
}

fn run_lrcm(split: &SplitProblem, target: &[f64], cfg: &ExperimentConfig, rep: usize) -> Result<LrcmOutcome, Error> {
    let t0 = Instant::now();
    let ens = cfg
        .ensemble
        .with_seed(derive_seed(cfg.seed, rep as u64, STREAM_ENSEMBLE));
    let factor = build_ensemble_factor(split, &ens)?;
    let t_ens = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let pred = solve_woodbury(&factor, &split.problem, &cfg.solver_config(SolverPath::Woodbury))?;
    let t_matr = t1.elapsed().as_secs_f64();
    Ok(LrcmOutcome::Completed {
        rmse: rmse(&pred.f, target)?,
        t_ens,
        t_matr,
    })
}

fn run_rbf(split: &SplitProblem, target: &[f64], cfg: &ExperimentConfig) -> Result<RbfOutcome, Error> {
    if split.n() > cfg.dense_cap {
        return Ok(RbfOutcome::DenseInfeasible);
    }
    let t0 = Instant::now();
    let w = similarity_matrix(&split.dataset.features, &cfg.baseline);
    let pred = solve_dense(&w, &split.problem, &cfg.solver_config(SolverPath::DenseRbf))?;
    let time = t0.elapsed().as_secs_f64();
    Ok(RbfOutcome::Completed {
        rmse: rmse(&pred.f, target)?,
        time,
    })
}

/// Dataset and labeled split of repetition `rep`. Real data is passed in
/// already prepared and only re-split.
pub fn repetition_split(cfg: &ExperimentConfig, base: Option<&Dataset>, rep: usize) -> Result<SplitProblem, Error> {
    let owned;
    let ds = match base {
        Some(ds) => ds,
        None => {
            owned = generate_mixture(&cfg.mixture_spec(), derive_seed(cfg.seed, rep as u64, STREAM_DATA))?;
            &owned
        }
    };
    Ok(split_labeled(
        ds,
        cfg.labeled_fraction,
        derive_seed(cfg.seed, rep as u64, STREAM_SPLIT),
    )?)
}

/// One repetition; solver failures are recorded, not raised.
pub fn run_repetition(cfg: &ExperimentConfig, base: Option<&Dataset>, rep: usize) -> Result<RepetitionResult, Error> {
    let split = repetition_split(cfg, base, rep)?;
    let target = scoring_target(&split, cfg.scenario);
    let lrcm = run_lrcm(&split, &target, cfg, rep).unwrap_or_else(|e| LrcmOutcome::Failed { error: e.to_string() });
    let rbf = run_rbf(&split, &target, cfg).unwrap_or_else(|e| RbfOutcome::Failed { error: e.to_string() });
    Ok(RepetitionResult {
        repetition: rep,
        n: split.n(),
        n_labeled: split.n_labeled,
        sigma_eps: if cfg.scenario == Scenario::SyntheticMixture {
            cfg.sigma_eps
        } else {
            0.0
        },
        lrcm,
        rbf,
    })
}

/// Loads and prepares the real dataset for the Forest Fires scenario.
pub fn load_base_dataset(cfg: &ExperimentConfig) -> Result<Option<Dataset>, Error> {
    match cfg.scenario {
        Scenario::SyntheticMixture => Ok(None),
        Scenario::ForestFires => {
            let path = cfg
                .data_path
                .as_ref()
                .ok_or_else(|| Error::Config("missing data path".into()))?;
            let raw = crate::io::load_forest_fires(path)?;
            Ok(Some(prepare_forest_fires(&raw)?))
        }
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, Error> {
    cfg.validate()?;
    let base = load_base_dataset(cfg)?;
    let (n, dim) = match &base {
        Some(ds) => (ds.len(), ds.dim()),
        None => (cfg.n, cfg.d + 2),
    };
    let reps = (0..cfg.repetitions)
        .into_par_iter()
        .map(|rep| run_repetition(cfg, base.as_ref(), rep))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ExperimentReport::new(cfg, n, reps, estimate_peak_memory(n, dim, cfg)))
}
