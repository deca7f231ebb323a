use std::path::PathBuf;

use precilab_core::{
    BoxMesh, DotMode, GsMode, PrecisionPolicy, PreconditionerKind, ReducePrecision,
};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, MatrixRow};
use crate::error::LabResult;
use crate::output::{write_csv, Artifact};
use crate::run::{run, Outcome, RunSpec};

/// One classified strategy; the first seven fields are the CSV columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyRow {
    /// Precision of the CG vector kernels.
    pub ops: String,
    /// Gather-scatter precision and dot-product scheme, e.g. `fp32+dot2`.
    pub gso_precision: String,
    pub gso_mode: GsMode,
    pub ranks: usize,
    pub preconditioner: PreconditionerKind,
    /// `None` when the row failed before solving, see `error`.
    pub outcome: Option<Outcome>,
    pub iterations: usize,
    #[serde(with = "precilab_core::solver::nonfinite")]
    pub final_residual: f64,
    pub policy: PrecisionPolicy,
    pub error: Option<String>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    ops: &'a str,
    gso_precision: &'a str,
    gso_mode: GsMode,
    ranks: usize,
    preconditioner: PreconditionerKind,
    outcome: &'a str,
    iterations: usize,
}

/// `fp64`, `fp32` or `dot2`: how dot products are accumulated and reduced.
pub fn dot_label(p: &PrecisionPolicy) -> &'static str {
    match (p.local_dot, p.global_reduce) {
        (DotMode::Dot2, _) => "dot2",
        (DotMode::WideAccumulate, _) | (DotMode::Plain, ReducePrecision::Fp64) => "fp64",
        (DotMode::Plain, _) => "fp32",
    }
}

pub fn strategy_matrix(cfg: &ExperimentConfig) -> LabResult<Vec<StrategyRow>> {
    let mesh = BoxMesh::new(cfg.mesh)?;
    let rows = if cfg.matrix.is_empty() {
        MatrixRow::defaults()
    } else {
        cfg.matrix.clone()
    };
    let base = RunSpec::from_config(cfg);
    let out = rows
        .iter()
        .map(|row| {
            let spec = RunSpec {
                policy: row.policy.resolve(),
                ranks: row.ranks.unwrap_or(base.ranks),
                gs_mode: row.gs_mode.unwrap_or(base.gs_mode),
                preconditioner: row.preconditioner.unwrap_or(base.preconditioner),
                ..base.clone()
            };
            let r = run(&mesh, &spec);
            StrategyRow {
                ops: spec.policy.solver_ops.to_string(),
                gso_precision: format!(
                    "{}+{}",
                    spec.policy.gs_field_precision,
                    dot_label(&spec.policy)
                ),
                gso_mode: spec.gs_mode,
                ranks: spec.ranks,
                preconditioner: spec.preconditioner,
                outcome: r.as_ref().ok().map(Outcome::of),
                iterations: r.as_ref().map_or(0, |r| r.iterations),
                final_residual: r.as_ref().map_or(f64::NAN, |r| r.final_residual),
                policy: spec.policy,
                error: r.err().map(|e| e.to_string()),
            }
        })
        .collect();
    Ok(out)
}

/// Writes `strategy.csv` and `strategy.json`.
pub fn cmd_strategy_matrix(cfg: &ExperimentConfig) -> LabResult<(Vec<StrategyRow>, Vec<PathBuf>)> {
    let rows = strategy_matrix(cfg)?;
    let dir = &cfg.output.dir;
    let (csv, json) = (dir.join("strategy.csv"), dir.join("strategy.json"));
    let table: Vec<CsvRow> = rows
        .iter()
        .map(|r| CsvRow {
            ops: &r.ops,
            gso_precision: &r.gso_precision,
            gso_mode: r.gso_mode,
            ranks: r.ranks,
            preconditioner: r.preconditioner,
            outcome: r.outcome.map_or("error", Outcome::as_str),
            iterations: r.iterations,
        })
        .collect();
    write_csv(&csv, &table)?;
    Artifact::new("strategy-matrix", cfg, rows.clone()).write(&json)?;
    Ok((rows, vec![csv, json]))
}
