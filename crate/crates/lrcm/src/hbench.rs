//! Accuracy and storage of hierarchical kernel matrices against rank.
//!
//! Builds the Matérn matrix of a regular grid on `[0, 1]²` once per rank
//! cap (truncated blocks are kept, not densified) and once uncapped, then
//! estimates `‖W − W̃‖₂` by power iteration.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use lrcm_core::hmatrix::{approx_error_norm, build_hmatrix, HMatrix, HMatrixConfig, LeafBlockInfo, RankCapPolicy};
use lrcm_core::kernels::{similarity_matrix, KernelFamily, KernelParams};
use lrcm_core::numerics::{power_iteration_norm, DenseMatrix};

use crate::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HBenchConfig {
    /// Points per axis; `n = side²`.
    pub side: usize,
    pub kernel: KernelParams,
    pub leaf_size: usize,
    pub eta: f64,
    pub eps: f64,
    pub rank_caps: Vec<usize>,
    pub power_iters: usize,
    pub seed: u64,
}

impl Default for HBenchConfig {
    fn default() -> Self {
        Self {
            side: 32,
            kernel: KernelParams::new(KernelFamily::Matern32, 0.25, 1.0).expect("valid kernel"),
            leaf_size: 32,
            eta: 2.0,
            eps: 1e-7,
            rank_caps: vec![5, 10, 20, 30],
            power_iters: 100,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HBenchRow {
    /// `None` for the uncapped build.
    pub rank_cap: Option<usize>,
    pub error: f64,
    pub relative_error: f64,
    pub max_rank: usize,
    /// Stored reals, and the same as a fraction of `n²`.
    pub storage: usize,
    pub compression: f64,
    pub build_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HBenchReport {
    pub n: usize,
    pub w_norm: f64,
    pub rows: Vec<HBenchRow>,
    /// Leaf blocks of the uncapped build, when requested.
    pub blocks: Option<Vec<LeafBlockInfo>>,
}

/// `side × side` grid with spacing `1 / (side − 1)`.
pub fn grid_points(side: usize) -> DenseMatrix {
    let h = if side > 1 { 1.0 / (side - 1) as f64 } else { 0.0 };
    DenseMatrix::from_fn(side * side, 2, |i, c| {
        if c == 0 {
            (i % side) as f64 * h
        } else {
            (i / side) as f64 * h
        }
    })
}

fn measure(
    points: &DenseMatrix,
    w: &DenseMatrix,
    w_norm: f64,
    cfg: &HBenchConfig,
    cap: Option<usize>,
) -> Result<(HBenchRow, HMatrix), Error> {
    let hcfg = HMatrixConfig {
        leaf_size: cfg.leaf_size,
        eta: cfg.eta,
        eps: cfg.eps,
        max_rank: cap.unwrap_or(usize::MAX),
        on_rank_cap: RankCapPolicy::Accept,
    };
    let t0 = Instant::now();
    let h = build_hmatrix(points, &cfg.kernel, &hcfg)?;
    let build_seconds = t0.elapsed().as_secs_f64();
    let error = approx_error_norm(w, &h, cfg.power_iters, cfg.seed);
    let n = w.rows();
    let row = HBenchRow {
        rank_cap: cap,
        error,
        relative_error: error / w_norm,
        max_rank: h.max_rank(),
        storage: h.storage(),
        compression: h.storage() as f64 / (n * n) as f64,
        build_seconds,
    };
    Ok((row, h))
}

pub fn run_hbench(cfg: &HBenchConfig, dump_blocks: bool) -> Result<HBenchReport, Error> {
    if cfg.side < 2 {
        return Err(Error::Config("grid side must be at least 2".into()));
    }
    if cfg.power_iters == 0 {
        return Err(Error::Config("power iterations must be at least 1".into()));
    }
    cfg.kernel.validate().map_err(|e| Error::Config(e.to_string()))?;
    let probe = HMatrixConfig {
        leaf_size: cfg.leaf_size,
        eta: cfg.eta,
        eps: cfg.eps,
        ..Default::default()
    };
    probe.validate().map_err(|e| Error::Config(e.to_string()))?;
    let points = grid_points(cfg.side);
    let w = similarity_matrix(&points, &cfg.kernel);
    let w_norm = power_iteration_norm(&w, cfg.power_iters, cfg.seed);
    let mut rows = Vec::with_capacity(cfg.rank_caps.len() + 1);
    for &cap in &cfg.rank_caps {
        rows.push(measure(&points, &w, w_norm, cfg, Some(cap))?.0);
    }
    let (row, h) = measure(&points, &w, w_norm, cfg, None)?;
    rows.push(row);
    Ok(HBenchReport {
        n: points.rows(),
        w_norm,
        rows,
        blocks: dump_blocks.then(|| h.leaf_blocks()),
    })
}

pub fn render_hbench_table(rep: &HBenchReport) -> String {
    let mut out = format!("n = {}, ||W||_2 = {:.6e}\n", rep.n, rep.w_norm);
    out.push_str(&format!(
        "{:>8}  {:>12}  {:>12}  {:>8}  {:>10}  {:>11}  {:>9}\n",
        "k_max", "||W-W~||_2", "relative", "rank", "storage", "compression", "build_s"
    ));
    for r in &rep.rows {
        let cap = r.rank_cap.map_or("none".to_string(), |k| k.to_string());
        out.push_str(&format!(
            "{:>8}  {:>12.4e}  {:>12.4e}  {:>8}  {:>10}  {:>11.4}  {:>9.3}\n",
            cap, r.error, r.relative_error, r.max_rank, r.storage, r.compression, r.build_seconds
        ));
    }
    out
}
