use std::path::PathBuf;

use precilab_core::solver::nonfinite;
use precilab_core::BoxMesh;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::LabResult;
use crate::output::{write_csv, Artifact};
use crate::run::{run, Outcome, RunSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRun {
    pub sample_index: u64,
    pub outcome: Option<Outcome>,
    pub iterations: usize,
    #[serde(with = "nonfinite")]
    pub final_residual: f64,
    /// Residual norms, `history[0]` being the initial residual.
    #[serde(with = "nonfinite::vec")]
    pub history: Vec<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRow {
    pub iter: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl EnvelopeRow {
    pub fn width(&self) -> f64 {
        self.max - self.min
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McaResult {
    pub samples: Vec<SampleRun>,
    /// Common length every history was truncated to.
    pub aligned_len: usize,
    pub envelope: Vec<EnvelopeRow>,
}

impl McaResult {
    /// `max/min` of the final residuals over all samples.
    pub fn final_ratio(&self) -> f64 {
        let (lo, hi) = self
            .samples
            .iter()
            .map(|s| s.final_residual)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                (lo.min(r), hi.max(r))
            });
        hi / lo
    }

    pub fn all_converged(&self) -> bool {
        self.samples
            .iter()
            .all(|s| s.outcome == Some(Outcome::Converges))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub sample: u64,
    pub iter: usize,
    pub residual: f64,
}

/// Per-iteration mean, min and max over histories truncated to the shortest.
pub fn envelope(histories: &[&[f64]]) -> Vec<EnvelopeRow> {
    let n = histories.iter().map(|h| h.len()).min().unwrap_or(0);
    (0..n)
        .map(|k| {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for h in histories {
                lo = lo.min(h[k]);
                hi = hi.max(h[k]);
            }
            // offset from the minimum, so equal samples give mean == min exactly
            let excess: f64 = histories.iter().map(|h| h[k] - lo).sum();
            EnvelopeRow {
                iter: k,
                mean: lo + excess / histories.len() as f64,
                min: lo,
                max: hi,
            }
        })
        .collect()
}

/// `samples` solves under the configured MCA mode and scope, one per sample
/// index.
pub fn mca_sample(cfg: &ExperimentConfig) -> LabResult<McaResult> {
    let mesh = BoxMesh::new(cfg.mesh)?;
    let base = RunSpec {
        backends: cfg.mca.scope.map(cfg.mca.mode.backend(cfg.mca.t)),
        ..RunSpec::from_config(cfg)
    };
    let samples: Vec<SampleRun> = (0..cfg.samples as u64)
        .map(|s| {
            let sample_index = if cfg.mca.force_equal_samples { 0 } else { s };
            let spec = RunSpec {
                sample_index,
                ..base.clone()
            };
            match run(&mesh, &spec) {
                Ok(r) => SampleRun {
                    sample_index,
                    outcome: Some(Outcome::of(&r)),
                    iterations: r.iterations,
                    final_residual: r.final_residual,
                    history: r.residual_norms(),
                    error: None,
                },
                Err(e) => SampleRun {
                    sample_index,
                    outcome: None,
                    iterations: 0,
                    final_residual: f64::NAN,
                    history: Vec::new(),
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let ok: Vec<&[f64]> = samples
        .iter()
        .filter(|s| !s.history.is_empty())
        .map(|s| s.history.as_slice())
        .collect();
    let envelope = envelope(&ok);
    Ok(McaResult {
        aligned_len: envelope.len(),
        samples,
        envelope,
    })
}

/// Writes `mca_envelope.csv`, `mca_histories.csv` and `mca.json`.
pub fn cmd_mca_sample(cfg: &ExperimentConfig) -> LabResult<(McaResult, Vec<PathBuf>)> {
    let res = mca_sample(cfg)?;
    let dir = &cfg.output.dir;
    let env = dir.join("mca_envelope.csv");
    let hist = dir.join("mca_histories.csv");
    let json = dir.join("mca.json");
    write_csv(&env, &res.envelope)?;
    let rows: Vec<HistoryRow> = res
        .samples
        .iter()
        .enumerate()
        .flat_map(|(i, s)| {
            s.history.iter().enumerate().map(move |(k, &r)| HistoryRow {
                sample: i as u64,
                iter: k,
                residual: r,
            })
        })
        .collect();
    write_csv(&hist, &rows)?;
    Artifact::new("mca-sample", cfg, res.clone()).write(&json)?;
    Ok((res, vec![env, hist, json]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_truncates_and_summarizes() {
        let a = [4.0, 2.0, 1.0];
        let b = [2.0, 4.0];
        let e = envelope(&[&a, &b]);
        assert_eq!(e.len(), 2);
        assert_eq!((e[0].mean, e[0].min, e[0].max), (3.0, 2.0, 4.0));
        assert_eq!(e[1].width(), 2.0);
    }

    #[test]
    fn identical_histories_collapse() {
        let a = [1.0, 0.5, 0.1, 0.3];
        let e = envelope(&[&a[..]; 20]);
        assert!(e.iter().all(|r| r.mean == r.min && r.min == r.max));
    }
}
