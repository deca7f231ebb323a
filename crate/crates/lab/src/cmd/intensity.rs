use std::path::PathBuf;

use precilab_core::Precision;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, KernelName};
use crate::error::LabResult;
use crate::output::Artifact;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intensity {
    pub kernel: KernelName,
    pub dims: [usize; 3],
    pub precision: Precision,
    pub flops: u64,
    pub bytes: u64,
    /// FLOP per byte.
    pub intensity: f64,
}

/// `(flops, bytes)` of an `m x k` by `k x n` product.
pub fn mxm_counts(m: usize, n: usize, k: usize, s: usize) -> (u64, u64) {
    let (m, n, k, s) = (m as u64, n as u64, k as u64, s as u64);
    (2 * m * n * k, s * (m * k + k * n + m * n))
}

/// Counts of the three tensor contractions of one element with `p` points
/// per axis: `D u` as one `p x p^2` product, `p` slab products, `u D^T` as one
/// `p^2 x p` product.
pub fn local_grad3_counts(p: usize, s: usize) -> (u64, u64) {
    let (f1, b1) = mxm_counts(p, p * p, p, s);
    let (f2, b2) = mxm_counts(p, p, p, s);
    let (f3, b3) = mxm_counts(p * p, p, p, s);
    let p = p as u64;
    (f1 + p * f2 + f3, b1 + p * b2 + b3)
}

pub fn intensity(kernel: KernelName, dims: [usize; 3], precision: Precision) -> Intensity {
    let s = precision.bytes();
    let su = s as u64;
    let (flops, bytes) = match kernel {
        KernelName::Mxm => mxm_counts(dims[0], dims[1], dims[2], s),
        KernelName::Glsc3 => (3 * dims[0] as u64, 3 * su * dims[0] as u64),
        KernelName::Add2s => (2 * dims[0] as u64, 3 * su * dims[0] as u64),
        KernelName::LocalGrad3 => local_grad3_counts(dims[0], s),
        // gradient and transposed gradient
        KernelName::Ax => {
            let (f, b) = local_grad3_counts(dims[0], s);
            (2 * f, 2 * b)
        }
    };
    Intensity {
        kernel,
        dims,
        precision,
        flops,
        bytes,
        intensity: flops as f64 / bytes as f64,
    }
}

/// Writes `intensity.json`.
pub fn cmd_intensity(cfg: &ExperimentConfig) -> LabResult<(Intensity, Vec<PathBuf>)> {
    let i = &cfg.intensity;
    let res = intensity(i.kernel, i.dims, i.precision);
    let json = cfg.output.dir.join("intensity.json");
    Artifact::new("intensity", cfg, res).write(&json)?;
    Ok((res, vec![json]))
}
