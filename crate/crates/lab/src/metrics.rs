//! Accuracy metrics of a mixed-precision run against a binary64 reference.

use precilab_core::solver::nonfinite;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};

/// Per-iteration absolute error between two residual histories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricBlock {
    #[serde(with = "nonfinite::vec")]
    pub ae_history: Vec<f64>,
    #[serde(with = "nonfinite")]
    pub mae: f64,
    /// Lengths of the mixed and double histories before alignment.
    pub lengths: [usize; 2],
    pub truncated: bool,
    /// `(t_double - t_mixed) / t_double * 100`, when timings were supplied.
    pub gain_percent: Option<f64>,
}

pub fn gain(t_double: f64, t_mixed: f64) -> f64 {
    (t_double - t_mixed) / t_double * 100.0
}

/// AE and MAE of `mixed` against `double`, aligned on the shorter history.
pub fn metrics(
    mixed: &[f64],
    double: &[f64],
    timings: Option<(f64, f64)>,
) -> LabResult<MetricBlock> {
    if mixed.is_empty() || double.is_empty() {
        return Err(LabError::Core(precilab_core::Error::Contract(
            "metrics need non-empty residual histories".into(),
        )));
    }
    let n = mixed.len().min(double.len());
    let ae_history: Vec<f64> = mixed[..n]
        .iter()
        .zip(&double[..n])
        .map(|(m, d)| (m - d).abs())
        .collect();
    let mae = ae_history.iter().sum::<f64>() / n as f64;
    Ok(MetricBlock {
        ae_history,
        mae,
        lengths: [mixed.len(), double.len()],
        truncated: mixed.len() != double.len(),
        gain_percent: timings.map(|(td, tm)| gain(td, tm)),
    })
}
