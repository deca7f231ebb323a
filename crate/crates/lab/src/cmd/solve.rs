use std::path::PathBuf;

use precilab_core::{BoxMesh, RunReport};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::LabResult;
use crate::metrics::{metrics, MetricBlock};
use crate::output::{write_csv, Artifact};
use crate::run::{run, Outcome, RunSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub outcome: Outcome,
    pub report: RunReport,
    /// Residual norms of the all-fp64 run of the same problem.
    #[serde(with = "precilab_core::solver::nonfinite::vec")]
    pub baseline_residuals: Vec<f64>,
    /// This run against the fp64 baseline.
    pub metrics: MetricBlock,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub iter: usize,
    pub rtr: f64,
    pub beta: Option<f64>,
    pub pap: Option<f64>,
}

pub fn solve(cfg: &ExperimentConfig) -> LabResult<SolveResult> {
    let mesh = BoxMesh::new(cfg.mesh)?;
    let spec = RunSpec::from_config(cfg);
    let report = run(&mesh, &spec)?;
    let baseline = if spec.is_fp64_baseline() {
        report.clone()
    } else {
        run(&mesh, &spec.fp64_baseline())?
    };
    let baseline_residuals = baseline.residual_norms();
    let metrics = metrics(
        &report.residual_norms(),
        &baseline_residuals,
        cfg.timings.map(|t| (t.t_double, t.t_mixed)),
    )?;
    Ok(SolveResult {
        outcome: Outcome::of(&report),
        report,
        baseline_residuals,
        metrics,
    })
}

pub fn history_rows(report: &RunReport) -> Vec<HistoryRow> {
    report
        .residual_history
        .iter()
        .enumerate()
        .map(|(k, &rtr)| HistoryRow {
            iter: k,
            rtr,
            beta: k
                .checked_sub(1)
                .and_then(|i| report.beta_history.get(i).copied()),
            pap: k
                .checked_sub(1)
                .and_then(|i| report.pap_history.get(i).copied()),
        })
        .collect()
}

/// Writes `solve_report.json` and `solve_history.csv`.
pub fn cmd_solve(cfg: &ExperimentConfig) -> LabResult<(SolveResult, Vec<PathBuf>)> {
    let res = solve(cfg)?;
    let dir = &cfg.output.dir;
    let (json, csv) = (dir.join("solve_report.json"), dir.join("solve_history.csv"));
    Artifact::new("solve", cfg, res.clone()).write(&json)?;
    write_csv(&csv, &history_rows(&res.report))?;
    Ok((res, vec![json, csv]))
}
