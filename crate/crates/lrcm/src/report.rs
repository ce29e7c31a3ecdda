//! Rendering of experiment reports.
//!
//! - `table`: one summary row in the layout `n, σ_ε, RMSE_LRCM, t_ens,
//!   t_matr, RMSE_RBF, time_RBF, p-value`, means over repetitions.
//! - `csv`: one row per repetition, eight fields.
//! - `json`: the whole [`ExperimentReport`], stable field names.

use std::fmt::Write as _;

use crate::experiment::{ExperimentReport, LrcmOutcome, RbfOutcome};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Table,
    Json,
    Csv,
}

pub const CSV_HEADER: [&str; 8] = [
    "repetition",
    "n",
    "sigma_eps",
    "rmse_lrcm",
    "t_ens",
    "t_matr",
    "rmse_rbf",
    "time_rbf",
];

/// Marker in the RBF columns when `n` exceeded the dense cap.
pub const DENSE_INFEASIBLE: &str = "dense_infeasible";
/// Marker for a solve that failed or a statistic that is undefined.
pub const MISSING: &str = "NA";

fn opt(v: Option<f64>, digits: usize) -> String {
    match v {
        Some(x) if x.abs() < 1e-3 && x != 0.0 => format!("{x:.3e}"),
        Some(x) => format!("{x:.digits$}"),
        None => MISSING.to_string(),
    }
}

fn render_table(rep: &ExperimentReport) -> String {
    let s = &rep.summary;
    let rbf_rmse = if s.rbf_completed == 0 && s.rbf_dense_infeasible {
        DENSE_INFEASIBLE.to_string()
    } else {
        opt(s.mean_rmse_rbf, 4)
    };
    let rbf_time = if s.rbf_completed == 0 && s.rbf_dense_infeasible {
        DENSE_INFEASIBLE.to_string()
    } else {
        opt(s.mean_time_rbf, 3)
    };
    let header = [
        "n",
        "sigma_eps",
        "RMSE_LRCM",
        "t_ens",
        "t_matr",
        "RMSE_RBF",
        "time_RBF",
        "p-value",
    ];
    let row = [
        rep.n.to_string(),
        format!("{}", rep.sigma_eps),
        opt(s.mean_rmse_lrcm, 4),
        opt(s.mean_t_ens, 3),
        opt(s.mean_t_matr, 3),
        rbf_rmse,
        rbf_time,
        s.p_value.map_or(MISSING.to_string(), |p| format!("{p:.3e}")),
    ];
    let widths: Vec<usize> = header.iter().zip(&row).map(|(h, r)| h.len().max(r.len())).collect();
    let mut out = String::new();
    for (cells, last) in [(header.map(String::from), false), (row, true)] {
        let line: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
        let _ = writeln!(out, "{}", line.join("  "));
        if !last {
            let _ = writeln!(
                out,
                "{}",
                widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  ")
            );
        }
    }
    let _ = writeln!(
        out,
        "repetitions: {}  lrcm completed: {}  rbf completed: {}",
        rep.repetitions.len(),
        s.lrcm_completed,
        s.rbf_completed
    );
    out
}

fn render_csv(rep: &ExperimentReport) -> Result<String, Error> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(CSV_HEADER)?;
    let mut rows: Vec<_> = rep.repetitions.iter().collect();
    rows.sort_by_key(|r| r.repetition);
    for r in rows {
        let (rmse_lrcm, t_ens, t_matr) = match &r.lrcm {
            LrcmOutcome::Completed { rmse, t_ens, t_matr } => (rmse.to_string(), t_ens.to_string(), t_matr.to_string()),
            LrcmOutcome::Failed { .. } => (MISSING.into(), MISSING.into(), MISSING.into()),
        };
        let (rmse_rbf, time_rbf) = match &r.rbf {
            RbfOutcome::Completed { rmse, time } => (rmse.to_string(), time.to_string()),
            RbfOutcome::DenseInfeasible => (DENSE_INFEASIBLE.into(), DENSE_INFEASIBLE.into()),
            RbfOutcome::Failed { .. } => (MISSING.into(), MISSING.into()),
        };
        wtr.write_record([
            r.repetition.to_string(),
            r.n.to_string(),
            r.sigma_eps.to_string(),
            rmse_lrcm,
            t_ens,
            t_matr,
            rmse_rbf,
            time_rbf,
        ])?;
    }
    let bytes = wtr
        .into_inner()
        .map_err(|e| Error::io("<csv buffer>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn emit_report(rep: &ExperimentReport, format: ReportFormat) -> Result<String, Error> {
    match format {
        ReportFormat::Table => Ok(render_table(rep)),
        ReportFormat::Csv => render_csv(rep),
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(rep)?;
            s.push('\n');
            Ok(s)
        }
    }
}
