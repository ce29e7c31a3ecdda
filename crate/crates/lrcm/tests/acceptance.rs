//! Acceptance criteria, one line each.
//!
//! Runs sequentially (timings and the memory high-water mark are read from
//! this process) and exits non-zero if any criterion fails.

use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lrcm::experiment::{run_experiment, ExperimentConfig, RbfOutcome};
use lrcm::hbench::{run_hbench, HBenchConfig};
use lrcm::lrcm_core::ensemble::{build_factor, dense_coassociation, EnsembleFactor, Partition};
use lrcm::lrcm_core::hmatrix::{build_hmatrix, solve_ssr_hmatrix, HMatrixConfig, LaplacianOperator, RankCapPolicy};
use lrcm::lrcm_core::kernels::{similarity_matrix, KernelParams};
use lrcm::lrcm_core::numerics::{
    dot, norm2, norm_inf, power_iteration_norm, CgOptions, DenseMatrix, Difference, LinearOperator, Preconditioner,
};
use lrcm::lrcm_core::solver::{
    graph_laplacian, laplacian_quadform, objective, solve_dense, solve_woodbury, LabeledProblem, SolverConfig,
    SolverPath,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_partitions(rng: &mut ChaCha8Rng, n: usize, r: usize, k_max: usize) -> Vec<Partition> {
    (0..r)
        .map(|_| {
            let k = rng.random_range(1..=k_max);
            Partition::from_labels((0..n).map(|_| rng.random_range(0..k)).collect(), k).unwrap()
        })
        .collect()
}

fn random_weights(rng: &mut ChaCha8Rng, r: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..r).map(|_| rng.random_range(0.1..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|v| v / s).collect()
}

fn random_points(rng: &mut ChaCha8Rng, n: usize, d: usize) -> DenseMatrix {
    DenseMatrix::from_fn(n, d, |_, _| rng.random_range(0.0..1.0))
}

fn woodbury_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(20..=500);
        let r = rng.random_range(1..=10);
        let parts = random_partitions(&mut rng, n, r, 8);
        let w = random_weights(&mut rng, r);
        let factor = build_factor(&parts, &w).map_err(|e| e.to_string())?;
        let h = dense_coassociation(&parts, &w).map_err(|e| e.to_string())?;
        let nl = rng.random_range(1..n);
        let labels: Vec<f64> = (0..nl).map(|_| rng.random_range(-2.0..2.0)).collect();
        let prob = LabeledProblem::new(&labels, n).unwrap();
        let alpha = rng.random_range(0.1..5.0);
        let beta = 10f64.powf(rng.random_range(-3.0..0.0));
        let cfg = SolverConfig::new(alpha, beta, SolverPath::Woodbury).unwrap();
        let fw = solve_woodbury(&factor, &prob, &cfg).map_err(|e| e.to_string())?.f;
        let fd = solve_dense(&h, &prob, &cfg).map_err(|e| e.to_string())?.f;
        let diff: Vec<f64> = fw.iter().zip(&fd).map(|(a, b)| a - b).collect();
        worst = worst.max(norm_inf(&diff) / (1.0 + norm_inf(&fd)));
    }
    let secs = t0.elapsed().as_secs_f64();
    check(
        worst <= 1e-8 && secs < 30.0,
        format!("max scaled deviation {worst:.3e} (tol 1e-8), {secs:.2} s (limit 30 s)"),
    )
}

/// 50 random ensembles shared by the exactness and degree criteria.
fn ensembles() -> Vec<(Vec<Partition>, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    (0..50)
        .map(|_| {
            let n = rng.random_range(2..=500);
            let r = rng.random_range(1..=10);
            let parts = random_partitions(&mut rng, n, r, 8);
            let w = random_weights(&mut rng, r);
            (parts, w)
        })
        .collect()
}

fn coassociation_exactness() -> Outcome {
    let mut worst = 0.0f64;
    for (parts, w) in ensembles() {
        let h = dense_coassociation(&parts, &w).map_err(|e| e.to_string())?;
        let b = build_factor(&parts, &w).map_err(|e| e.to_string())?.to_dense_b();
        let bbt = b.matmul(&b.transpose()).unwrap();
        for i in 0..h.rows() {
            for j in 0..h.cols() {
                worst = worst.max((h[(i, j)] - bbt[(i, j)]).abs());
            }
        }
    }
    check(
        worst <= 1e-12,
        format!("max |H - B B^T| = {worst:.3e} over 50 ensembles (tol 1e-12)"),
    )
}

fn laplacian_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(2..=60);
        let upper: Vec<f64> = (0..n * n).map(|_| rng.random_range(0.0..1.0)).collect();
        let w = DenseMatrix::from_fn(n, n, |i, j| if i <= j { upper[i * n + j] } else { upper[j * n + i] });
        let f: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let direct = laplacian_quadform(&w, &f);
        let l = graph_laplacian(&w).map_err(|e| e.to_string())?;
        let two_ftlf = 2.0 * dot(&f, &l.apply(&f));
        worst = worst.max((direct - two_ftlf).abs() / direct.abs().max(f64::MIN_POSITIVE));
    }
    check(
        worst <= 1e-10,
        format!("max relative gap {worst:.3e} over 100 (W, f) (tol 1e-10)"),
    )
}

fn factor_degrees() -> Outcome {
    let mut worst = 0.0f64;
    for (parts, w) in ensembles() {
        let h = dense_coassociation(&parts, &w).map_err(|e| e.to_string())?;
        let f: EnsembleFactor = build_factor(&parts, &w).map_err(|e| e.to_string())?;
        for i in 0..h.rows() {
            let row: f64 = h.row(i).iter().sum();
            worst = worst.max((row - f.degrees()[i]).abs());
        }
    }
    check(
        worst <= 1e-12,
        format!("max |rowsum(H) - D'| = {worst:.3e} over 50 ensembles (tol 1e-12)"),
    )
}

fn synthetic_row() -> Outcome {
    let t0 = Instant::now();
    let rep = run_experiment(&ExperimentConfig::default()).map_err(|e| e.to_string())?;
    let secs = t0.elapsed().as_secs_f64();
    let s = &rep.summary;
    let (Some(lrcm), Some(rbf), Some(p)) = (s.mean_rmse_lrcm, s.mean_rmse_rbf, s.p_value) else {
        return Err(format!("incomplete summary: {s:?}"));
    };
    check(
        lrcm <= 0.10 && lrcm < rbf && p < 0.05 && secs <= 120.0,
        format!("RMSE LRCM {lrcm:.4} (<= 0.10), RBF {rbf:.4}, p = {p:.3e} (< 0.05), {secs:.1} s (limit 120 s)"),
    )
}

fn noise_robustness() -> Outcome {
    let mut means = Vec::new();
    for sigma_eps in [0.01, 0.1, 0.25] {
        let cfg = ExperimentConfig {
            sigma_eps,
            ..Default::default()
        };
        let rep = run_experiment(&cfg).map_err(|e| e.to_string())?;
        means.push(rep.summary.mean_rmse_lrcm.ok_or("LRCM failed")?);
    }
    let spread = means.iter().cloned().fold(f64::MIN, f64::max) - means.iter().cloned().fold(f64::MAX, f64::min);
    check(
        spread <= 0.03,
        format!(
            "LRCM RMSE {:.4} / {:.4} / {:.4} for sigma_eps 0.01 / 0.1 / 0.25, spread {spread:.4} (<= 0.03)",
            means[0], means[1], means[2]
        ),
    )
}

/// Peak resident set of this process in bytes (Linux only).
fn peak_rss() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

fn scalability() -> Outcome {
    let cfg = ExperimentConfig {
        n: 100_000,
        repetitions: 1,
        ..Default::default()
    };
    let t0 = Instant::now();
    let rep = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let secs = t0.elapsed().as_secs_f64();
    let r = &rep.repetitions[0];
    let rmse = r.lrcm_rmse().ok_or_else(|| format!("LRCM failed: {:?}", r.lrcm))?;
    let rss = peak_rss();
    let rss_ok = rss.is_some_and(|b| b < 2 << 30);
    let infeasible = r.rbf == RbfOutcome::DenseInfeasible;
    check(
        secs <= 60.0 && rss_ok && infeasible,
        format!(
            "n = 1e5 in {secs:.2} s (limit 60 s), RMSE {rmse:.4}, peak RSS {} (limit 2 GiB), RBF {}",
            rss.map_or("unavailable".to_string(), |b| format!(
                "{:.0} MiB",
                b as f64 / (1 << 20) as f64
            )),
            if infeasible { "dense_infeasible" } else { "not flagged" }
        ),
    )
}

fn hmatrix_convergence() -> Outcome {
    let t0 = Instant::now();
    let rep = run_hbench(&HBenchConfig::default(), false).map_err(|e| e.to_string())?;
    let secs = t0.elapsed().as_secs_f64();
    let capped: Vec<f64> = rep
        .rows
        .iter()
        .filter(|r| r.rank_cap.is_some())
        .map(|r| r.error)
        .collect();
    let decreasing = capped.windows(2).all(|p| p[1] < p[0]);
    let free = rep
        .rows
        .iter()
        .find(|r| r.rank_cap.is_none())
        .ok_or("missing uncapped row")?;
    let rel = free.error / rep.w_norm;
    let listed: Vec<String> = capped.iter().map(|e| format!("{e:.3e}")).collect();
    check(
        decreasing && rel <= 1e-5 && secs <= 120.0,
        format!(
            "errors k = 5/10/20/30: {} (strictly decreasing), eps = 1e-7: {rel:.3e} * ||W|| (<= 1e-5), {secs:.1} s",
            listed.join(" / ")
        ),
    )
}

fn hsolve_fidelity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let n = 500;
    let pts = random_points(&mut rng, n, 2);
    let kernel = KernelParams::matern32(0.25, 1.0).unwrap();
    let labels: Vec<f64> = (0..n / 10).map(|i| (4.0 * pts[(i, 0)]).sin() + pts[(i, 1)]).collect();
    let prob = LabeledProblem::new(&labels, n).unwrap();
    let cfg = SolverConfig::new(1.0, 0.001, SolverPath::HMatrixCg).unwrap();
    let w = similarity_matrix(&pts, &kernel);
    let exact = solve_dense(&w, &prob, &cfg).map_err(|e| e.to_string())?.f;
    let hcfg = HMatrixConfig {
        leaf_size: 32,
        eps: 1e-8,
        ..Default::default()
    };
    let h = build_hmatrix(&pts, &kernel, &hcfg).map_err(|e| e.to_string())?;
    let cg = CgOptions {
        tol: 1e-10,
        max_iter: 20_000,
        preconditioner: Preconditioner::Jacobi,
    };
    let approx = solve_ssr_hmatrix(&h, &prob, &cfg, &cg).map_err(|e| e.to_string())?.f;
    let diff: Vec<f64> = approx.iter().zip(&exact).map(|(a, b)| a - b).collect();
    let rel = norm2(&diff) / norm2(&exact);
    check(
        rel <= 1e-4,
        format!("||f~ - f*|| / ||f*|| = {rel:.3e} (tol 1e-4), n = 500, ACA eps 1e-8, CG tol 1e-10"),
    )
}

fn objective_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst_excess = f64::MIN;
    let mut nontrivial = 0;
    for _ in 0..20 {
        let n = rng.random_range(100..=500);
        let pts = random_points(&mut rng, n, 2);
        let kernel = KernelParams::matern32(rng.random_range(0.1..0.5), 1.0).unwrap();
        let w = similarity_matrix(&pts, &kernel);
        let hcfg = HMatrixConfig {
            leaf_size: 16,
            eps: 1e-6,
            max_rank: rng.random_range(2..=8),
            on_rank_cap: RankCapPolicy::Accept,
            ..Default::default()
        };
        let h = build_hmatrix(&pts, &kernel, &hcfg).map_err(|e| e.to_string())?;
        let ht = h.to_dense();
        let (l, lt) = (LaplacianOperator::new(&w), LaplacianOperator::new(&h));
        let eps_l = power_iteration_norm(&Difference { a: &lt, b: &l }, 200, 7);
        let mut f: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let nf = norm2(&f);
        f.iter_mut().for_each(|v| *v /= nf);
        let alpha = rng.random_range(0.1..3.0);
        let nl = n / 10;
        let labels: Vec<f64> = (0..nl).map(|_| rng.random_range(0.0..2.0)).collect();
        let prob = LabeledProblem::new(&labels, n).unwrap();
        let cfg = SolverConfig::new(alpha, 0.001, SolverPath::DenseRbf).unwrap();
        let gap = (objective(&ht, &prob, &cfg, &f) - objective(&w, &prob, &cfg, &f)).abs();
        if gap > 0.0 {
            nontrivial += 1;
        }
        worst_excess = worst_excess.max(gap - alpha * eps_l);
    }
    check(
        worst_excess <= 1e-6 && nontrivial > 0,
        format!("max |Q~ - Q| - alpha * ||L~ - L|| = {worst_excess:.3e} over 20 instances (slack 1e-6)"),
    )
}

fn forest_fires_path() -> PathBuf {
    std::env::var_os("LRCM_FOREST_FIRES")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/forestfires.csv"))
}

fn forest_fires() -> Outcome {
    let path = forest_fires_path();
    if !path.exists() {
        return Err(format!(
            "dataset not found at {} (set LRCM_FOREST_FIRES)",
            path.display()
        ));
    }
    let rep = run_experiment(&ExperimentConfig::forest_fires(&path)).map_err(|e| e.to_string())?;
    let s = &rep.summary;
    let (Some(lrcm), Some(rbf), Some(p)) = (s.mean_rmse_lrcm, s.mean_rmse_rbf, s.p_value) else {
        return Err(format!("incomplete summary: {s:?}"));
    };
    check(
        rep.n == 517 && lrcm <= rbf && p < 0.2,
        format!(
            "n = {}, RMSE LRCM {lrcm:.4} <= RBF {rbf:.4}, p = {p:.3e} (< 0.2)",
            rep.n
        ),
    )
}

fn alpha_zero_closed_form() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let n = 120;
    let beta = 0.001;
    let labels: Vec<f64> = (0..15).map(|_| rng.random_range(-3.0..3.0)).collect();
    let prob = LabeledProblem::new(&labels, n).unwrap();
    let expect: Vec<f64> = (0..n)
        .map(|i| {
            if i < labels.len() {
                labels[i] / (beta + 1.0)
            } else {
                0.0
            }
        })
        .collect();
    let pts = random_points(&mut rng, n, 3);
    let kernel = KernelParams::rbf(0.5).unwrap();
    let w = similarity_matrix(&pts, &kernel);
    let parts = random_partitions(&mut rng, n, 5, 4);
    let factor = build_factor(&parts, &[0.2; 5]).unwrap();
    let h = dense_coassociation(&parts, &[0.2; 5]).unwrap();
    let hm = build_hmatrix(
        &pts,
        &kernel,
        &HMatrixConfig {
            leaf_size: 16,
            ..Default::default()
        },
    )
    .unwrap();

    let cfg = |path| SolverConfig { alpha: 0.0, beta, path };
    let results = [
        ("dense_rbf", solve_dense(&w, &prob, &cfg(SolverPath::DenseRbf))),
        (
            "dense_ensemble",
            solve_dense(&h, &prob, &cfg(SolverPath::DenseEnsemble)),
        ),
        ("woodbury", solve_woodbury(&factor, &prob, &cfg(SolverPath::Woodbury))),
        (
            "hmatrix_cg",
            solve_ssr_hmatrix(&hm, &prob, &cfg(SolverPath::HMatrixCg), &CgOptions::default()),
        ),
    ];
    let mut parts_out = Vec::new();
    let mut ok = true;
    for (name, res) in results {
        let f = res.map_err(|e| format!("{name}: {e}"))?.f;
        let dev = f.iter().zip(&expect).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        ok &= dev <= 1e-14;
        parts_out.push(format!("{name} {dev:.1e}"));
    }
    check(
        ok,
        format!("max deviation from y/(beta+1): {} (tol 1e-14)", parts_out.join(", ")),
    )
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("woodbury equivalence", woodbury_equivalence),
        ("co-association exactness", coassociation_exactness),
        ("laplacian quadratic form identity", laplacian_identity),
        ("factor degrees", factor_degrees),
        ("synthetic n=1000 row", synthetic_row),
        ("noise robustness", noise_robustness),
        ("scalability n=1e5", scalability),
        ("h-matrix convergence", hmatrix_convergence),
        ("h-solve fidelity", hsolve_fidelity),
        ("objective error bound", objective_bound),
        ("forest fires", forest_fires),
        ("alpha = 0 closed form", alpha_zero_closed_form),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
