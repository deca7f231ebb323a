use std::path::PathBuf;

use precilab_core::{Backend, BoxMesh, PrecisionFormat};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::LabResult;
use crate::output::{write_csv, Artifact};
use crate::run::{run, Outcome, RunSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub t: u32,
    #[serde(with = "precilab_core::solver::nonfinite")]
    pub final_residual: f64,
    pub iterations: usize,
    pub outcome: Option<Outcome>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub exponent_bits: u32,
    /// The same solve under native arithmetic.
    pub reference: SweepRow,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCsvRow {
    pub t: u32,
    pub final_residual: f64,
    pub iterations: usize,
}

/// One solve per pseudo-mantissa width with `Vprec(t, r)` on the configured
/// scope. The iteration budget is `cg.max_iter`; failures are recorded per
/// row.
pub fn vprec_sweep(cfg: &ExperimentConfig) -> LabResult<SweepResult> {
    let mesh = BoxMesh::new(cfg.mesh)?;
    let base = RunSpec::from_config(cfg);
    let solve = |t: u32, backend: Backend| {
        let spec = RunSpec {
            backends: cfg.sweep.scope.map(backend),
            ..base.clone()
        };
        match run(&mesh, &spec) {
            Ok(r) => SweepRow {
                t,
                final_residual: r.final_residual,
                iterations: r.iterations,
                outcome: Some(Outcome::of(&r)),
                error: None,
            },
            Err(e) => SweepRow {
                t,
                final_residual: f64::NAN,
                iterations: 0,
                outcome: None,
                error: Some(e.to_string()),
            },
        }
    };
    let r = cfg.sweep.exponent_bits;
    let reference = solve(52, Backend::IeeeExact);
    let rows = (cfg.sweep.t_min..=cfg.sweep.t_max)
        .map(|t| match PrecisionFormat::new(t, r) {
            Ok(fmt) => solve(t, Backend::Vprec(fmt)),
            Err(e) => SweepRow {
                t,
                final_residual: f64::NAN,
                iterations: 0,
                outcome: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    Ok(SweepResult {
        exponent_bits: r,
        reference,
        rows,
    })
}

/// Writes `sweep.csv` and `sweep.json`.
pub fn cmd_vprec_sweep(cfg: &ExperimentConfig) -> LabResult<(SweepResult, Vec<PathBuf>)> {
    let res = vprec_sweep(cfg)?;
    let dir = &cfg.output.dir;
    let (json, csv) = (dir.join("sweep.json"), dir.join("sweep.csv"));
    let rows: Vec<SweepCsvRow> = res
        .rows
        .iter()
        .map(|r| SweepCsvRow {
            t: r.t,
            final_residual: r.final_residual,
            iterations: r.iterations,
        })
        .collect();
    write_csv(&csv, &rows)?;
    Artifact::new("vprec-sweep", cfg, res.clone()).write(&json)?;
    Ok((res, vec![csv, json]))
}
