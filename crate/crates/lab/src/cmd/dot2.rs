use std::path::PathBuf;

use precilab_core::eft::{dot, dot2, dot_wide};
use precilab_core::gendot::{gen_dot, max_reachable_cond};
use precilab_core::{Precision, Real};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::LabResult;
use crate::output::{write_csv, Artifact};

/// Median relative errors at one target condition number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dot2Row {
    pub cond: f64,
    pub relerr_plain: f64,
    pub relerr_dot2: f64,
    pub relerr_wide: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dot2Result {
    pub precision: Precision,
    pub n: usize,
    pub trials: usize,
    pub rows: Vec<Dot2Row>,
    /// Grid points the generator cannot reach in this precision.
    pub skipped: Vec<String>,
}

impl Dot2Result {
    /// First grid condition at which dot2 loses more than `limit`.
    pub fn breakdown_cond(&self, limit: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| !(r.relerr_dot2 <= limit))
            .map(|r| r.cond)
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[(v.len() - 1) / 2]
}

fn trial_seed(seed: u64, grid_index: usize, trial: usize) -> u64 {
    seed ^ ((grid_index as u64) << 32 | trial as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

fn bench<T: Real>(cfg: &ExperimentConfig) -> LabResult<Dot2Result> {
    let d = &cfg.dot2;
    let limit = max_reachable_cond::<T>();
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for (gi, cond) in d.grid().into_iter().enumerate() {
        if cond > limit {
            skipped.push(format!(
                "cond {cond:e} exceeds the reachable limit {limit:e}"
            ));
            continue;
        }
        let (mut plain, mut comp, mut wide) = (Vec::new(), Vec::new(), Vec::new());
        for trial in 0..d.trials {
            let p = gen_dot::<T>(d.n, cond, trial_seed(cfg.seed, gi, trial))?;
            plain.push(p.relative_error(dot(&p.x, &p.y)?.widen()));
            comp.push(p.relative_error(dot2(&p.x, &p.y)?.widen()));
            wide.push(p.relative_error(dot_wide(&p.x, &p.y)?));
        }
        rows.push(Dot2Row {
            cond,
            relerr_plain: median(plain),
            relerr_dot2: median(comp),
            relerr_wide: median(wide),
        });
    }
    Ok(Dot2Result {
        precision: d.precision,
        n: d.n,
        trials: d.trials,
        rows,
        skipped,
    })
}

/// Plain, compensated and binary64-accumulated dot products over a grid of
/// condition numbers, median relative error over the trials.
pub fn dot2_bench(cfg: &ExperimentConfig) -> LabResult<Dot2Result> {
    match cfg.dot2.precision {
        Precision::Fp32 => bench::<f32>(cfg),
        Precision::Fp64 => bench::<f64>(cfg),
    }
}

/// Writes `dot2.csv` and `dot2.json`.
pub fn cmd_dot2_bench(cfg: &ExperimentConfig) -> LabResult<(Dot2Result, Vec<PathBuf>)> {
    let res = dot2_bench(cfg)?;
    let dir = &cfg.output.dir;
    let (csv, json) = (dir.join("dot2.csv"), dir.join("dot2.json"));
    write_csv(&csv, &res.rows)?;
    Artifact::new("dot2-bench", cfg, res.clone()).write(&json)?;
    Ok((res, vec![csv, json]))
}
