use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lrcm::experiment::{run_experiment, ExperimentConfig, GridSpec, Scenario};
use lrcm::grid::grid_search;
use lrcm::hbench::{render_hbench_table, run_hbench, HBenchConfig};
use lrcm::lrcm_core::kernels::KernelParams;
use lrcm::report::{emit_report, ReportFormat};
use lrcm::Error;

/// Semi-supervised regression with low-rank co-association matrices.
#[derive(Parser, Debug)]
#[command(name = "lrcm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monte Carlo runs on the two-component Gaussian mixture.
    Synthetic(ExperimentArgs),
    /// Repeated labeled splits of the UCI Forest Fires table.
    Forestfires(ExperimentArgs),
    /// Cross-validated search over alpha and beta.
    Gridsearch(GridArgs),
    /// Hierarchical matrix error and storage against rank.
    HmatrixBench(HBenchArgs),
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// JSON config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    sigma_eps: Option<f64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    ensemble_size: Option<usize>,
    /// Cluster counts to draw from, comma separated.
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<usize>>,
    /// RBF lengthscale of the baseline.
    #[arg(long)]
    ell: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Table)]
    format: ReportFormat,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Largest n for which the dense baseline is attempted.
    #[arg(long)]
    dense_cap: Option<usize>,
    /// Forest Fires CSV.
    #[arg(long)]
    data: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScenarioArg {
    Synthetic,
    Forestfires,
}

#[derive(Args, Debug)]
struct GridArgs {
    #[command(flatten)]
    common: ExperimentArgs,
    #[arg(long, value_enum, default_value_t = ScenarioArg::Synthetic)]
    scenario: ScenarioArg,
    #[arg(long, value_delimiter = ',')]
    alphas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    betas: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
struct HBenchArgs {
    /// Points per axis of the unit-square grid.
    #[arg(long, default_value_t = 32)]
    side: usize,
    #[arg(long, default_value_t = 0.25)]
    ell: f64,
    #[arg(long, default_value_t = 1e-7)]
    eps: f64,
    /// Leaf size of the cluster tree.
    #[arg(long, default_value_t = 32)]
    nmin: usize,
    #[arg(long, default_value_t = 2.0)]
    eta: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [5usize, 10, 20, 30])]
    ranks: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Include the leaf blocks of the uncapped build in the JSON output.
    #[arg(long)]
    dump_blocks: bool,
    #[arg(long, value_enum, default_value_t = ReportFormat::Table)]
    format: ReportFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Overlays `patch` onto `base`, recursing into objects.
fn merge_json(base: &mut serde_json::Value, patch: serde_json::Value) {
    match (base, patch) {
        (serde_json::Value::Object(b), serde_json::Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge_json(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn load_config(defaults: ExperimentConfig, path: Option<&Path>) -> Result<ExperimentConfig, Error> {
    let Some(path) = path else { return Ok(defaults) };
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let patch: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut merged = serde_json::to_value(&defaults)?;
    merge_json(&mut merged, patch);
    serde_json::from_value(merged).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn build_config(args: &ExperimentArgs, scenario: Scenario) -> Result<ExperimentConfig, Error> {
    let defaults = match scenario {
        Scenario::SyntheticMixture => ExperimentConfig::default(),
        Scenario::ForestFires => ExperimentConfig::forest_fires(PathBuf::new()),
    };
    let mut cfg = load_config(defaults, args.config.as_deref())?;
    cfg.scenario = scenario;
    if let Some(v) = args.n {
        cfg.n = v;
    }
    if let Some(v) = args.sigma_eps {
        cfg.sigma_eps = v;
    }
    if let Some(v) = args.reps {
        cfg.repetitions = v;
    }
    if let Some(v) = args.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = args.beta {
        cfg.beta = v;
    }
    if let Some(v) = args.ensemble_size {
        cfg.ensemble.size = v;
    }
    if let Some(v) = &args.k {
        cfg.ensemble.cluster_counts = v.clone();
    }
    if let Some(v) = args.ell {
        cfg.baseline = KernelParams::rbf(v).map_err(|e| Error::Config(e.to_string()))?;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.dense_cap {
        cfg.dense_cap = v;
    }
    if let Some(v) = &args.data {
        cfg.data_path = Some(v.clone());
    }
    if cfg.scenario == Scenario::ForestFires && cfg.data_path.as_ref().is_none_or(|p| p.as_os_str().is_empty()) {
        return Err(Error::Config("forestfires needs --data <csv>".into()));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_output(text: &str, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Synthetic(args) => {
            let cfg = build_config(&args, Scenario::SyntheticMixture)?;
            let rep = run_experiment(&cfg)?;
            write_output(&emit_report(&rep, args.format)?, args.out.as_deref())
        }
        Command::Forestfires(args) => {
            let cfg = build_config(&args, Scenario::ForestFires)?;
            let rep = run_experiment(&cfg)?;
            write_output(&emit_report(&rep, args.format)?, args.out.as_deref())
        }
        Command::Gridsearch(args) => {
            let scenario = match args.scenario {
                ScenarioArg::Synthetic => Scenario::SyntheticMixture,
                ScenarioArg::Forestfires => Scenario::ForestFires,
            };
            let cfg = build_config(&args.common, scenario)?;
            let spec = cfg.grid.clone().unwrap_or(GridSpec {
                alphas: vec![0.1, 0.5, 1.0, 2.0],
                betas: vec![1e-4, 1e-3, 1e-2],
            });
            let alphas = args.alphas.unwrap_or(spec.alphas);
            let betas = args.betas.unwrap_or(spec.betas);
            let res = grid_search(&cfg, &alphas, &betas)?;
            let text = match args.common.format {
                ReportFormat::Json => serde_json::to_string_pretty(&res)? + "\n",
                ReportFormat::Csv => {
                    let mut s = String::from("alpha,beta,cv_rmse\n");
                    for c in &res.cells {
                        s += &format!(
                            "{},{},{}\n",
                            c.alpha,
                            c.beta,
                            c.cv_rmse.map_or("NA".into(), |v| v.to_string())
                        );
                    }
                    s
                }
                ReportFormat::Table => {
                    let mut s = format!("{:>10}  {:>10}  {:>12}\n", "alpha", "beta", "cv_rmse");
                    for c in &res.cells {
                        let v = c.cv_rmse.map_or("NA".into(), |v| format!("{v:.6}"));
                        s += &format!("{:>10}  {:>10}  {:>12}\n", c.alpha, c.beta, v);
                    }
                    s += &format!(
                        "best: alpha = {}, beta = {} ({}-fold cv rmse {:.6})\n",
                        res.best_alpha, res.best_beta, res.folds, res.best_rmse
                    );
                    s
                }
            };
            write_output(&text, args.common.out.as_deref())
        }
        Command::HmatrixBench(args) => {
            let kernel = KernelParams::matern32(args.ell, 1.0).map_err(|e| Error::Config(e.to_string()))?;
            let cfg = HBenchConfig {
                side: args.side,
                kernel,
                leaf_size: args.nmin,
                eta: args.eta,
                eps: args.eps,
                rank_caps: args.ranks,
                power_iters: args.iters,
                seed: args.seed,
            };
            let rep = run_hbench(&cfg, args.dump_blocks)?;
            let text = match args.format {
                ReportFormat::Table => render_hbench_table(&rep),
                ReportFormat::Json => serde_json::to_string_pretty(&rep)? + "\n",
                ReportFormat::Csv => {
                    let mut s = String::from("rank_cap,error,relative_error,max_rank,storage,build_seconds\n");
                    for r in &rep.rows {
                        let cap = r.rank_cap.map_or(String::new(), |k| k.to_string());
                        s += &format!(
                            "{cap},{},{},{},{},{}\n",
                            r.error, r.relative_error, r.max_rank, r.storage, r.build_seconds
                        );
                    }
                    s
                }
            };
            write_output(&text, args.out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 1 } else { 2 })
        }
    }
}
