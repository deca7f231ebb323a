//! Experiment configuration, parsed from JSON.
//!
//! Every field has a default, so `{}` is a valid configuration (E=8, N=4,
//! all-fp64, native arithmetic). The published schema lives in
//! `schema/experiment-config.schema.json`.

use std::path::{Path, PathBuf};

use precilab_core::solver::nonfinite;
use precilab_core::{
    Backend, CgConfig, GsMode, MeshSpec, Precision, PrecisionPolicy, PreconditionerKind, SectionMap,
};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mesh: MeshSpec,
    pub ranks: usize,
    pub gs_mode: GsMode,
    pub preconditioner: PreconditionerKind,
    pub policy: PolicySpec,
    pub cg: CgConfig,
    /// Arithmetic backend per instrumented section.
    pub backends: SectionMap,
    /// Evaluate the load through the cancellation-prone `1e9 cos x` form.
    pub sensitive_init: bool,
    /// Perturb square roots under MCA backends.
    pub perturb_sqrt: bool,
    pub seed: u64,
    pub samples: usize,
    pub output: OutputConfig,
    /// User-supplied wall-clock times for the gain metric.
    pub timings: Option<Timings>,
    pub sweep: SweepConfig,
    pub mca: McaConfig,
    /// Rows of the strategy matrix; empty means the built-in table.
    pub matrix: Vec<MatrixRow>,
    pub dot2: Dot2Config,
    pub prune: PruneConfig,
    pub intensity: IntensityConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mesh: MeshSpec::cube(2, 4),
            ranks: 1,
            gs_mode: GsMode::Sequential,
            preconditioner: PreconditionerKind::Jacobi,
            policy: PolicySpec::Named(NamedPolicy::AllFp64),
            cg: CgConfig::default(),
            backends: SectionMap::default(),
            sensitive_init: false,
            perturb_sqrt: true,
            seed: 0,
            samples: 20,
            output: OutputConfig::default(),
            timings: None,
            sweep: SweepConfig::default(),
            mca: McaConfig::default(),
            matrix: Vec::new(),
            dot2: Dot2Config::default(),
            prune: PruneConfig::default(),
            intensity: IntensityConfig::default(),
        }
    }
}

/// A precision policy given either by preset name or field by field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolicySpec {
    Named(NamedPolicy),
    Explicit(PrecisionPolicy),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedPolicy {
    AllFp64,
    AllFp32,
    Fp32OpsFp64Comm,
    Fp32Dot2,
}

impl PolicySpec {
    pub fn resolve(&self) -> PrecisionPolicy {
        match *self {
            PolicySpec::Named(NamedPolicy::AllFp64) => PrecisionPolicy::all_fp64(),
            PolicySpec::Named(NamedPolicy::AllFp32) => PrecisionPolicy::all_fp32(),
            PolicySpec::Named(NamedPolicy::Fp32OpsFp64Comm) => {
                PrecisionPolicy::fp32_ops_fp64_comm()
            }
            PolicySpec::Named(NamedPolicy::Fp32Dot2) => PrecisionPolicy::fp32_dot2(),
            PolicySpec::Explicit(p) => p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Timings {
    pub t_double: f64,
    pub t_mixed: f64,
}

/// Which sections an emulated backend instruments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    /// Every section, initialization included.
    Whole,
    #[default]
    CgOnly,
}

impl Scope {
    pub fn map(self, backend: Backend) -> SectionMap {
        match self {
            Scope::Whole => SectionMap::uniform(backend),
            Scope::CgOnly => SectionMap::cg_only(backend),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub t_min: u32,
    pub t_max: u32,
    pub exponent_bits: u32,
    pub scope: Scope,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            t_min: 3,
            t_max: 52,
            exponent_bits: 11,
            scope: Scope::CgOnly,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum McaMode {
    #[default]
    Rr,
    Mca,
}

impl McaMode {
    pub fn backend(self, t: u32) -> Backend {
        match self {
            McaMode::Rr => Backend::McaRr { t },
            McaMode::Mca => Backend::McaFull { t },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McaConfig {
    pub mode: McaMode,
    pub t: u32,
    pub scope: Scope,
    /// Run every sample with sample index 0 (a degenerate envelope).
    pub force_equal_samples: bool,
}

impl Default for McaConfig {
    fn default() -> Self {
        Self {
            mode: McaMode::Rr,
            t: 23,
            scope: Scope::CgOnly,
            force_equal_samples: false,
        }
    }
}

/// One strategy-matrix row; unset fields inherit from the base config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixRow {
    pub policy: PolicySpec,
    #[serde(default)]
    pub ranks: Option<usize>,
    #[serde(default)]
    pub gs_mode: Option<GsMode>,
    #[serde(default)]
    pub preconditioner: Option<PreconditionerKind>,
}

impl MatrixRow {
    pub fn named(policy: NamedPolicy) -> Self {
        Self {
            policy: PolicySpec::Named(policy),
            ranks: None,
            gs_mode: None,
            preconditioner: None,
        }
    }

    /// all-fp64, all-fp32, fp32 ops with fp64 communication, fp32 with dot2.
    pub fn defaults() -> Vec<Self> {
        [
            NamedPolicy::AllFp64,
            NamedPolicy::AllFp32,
            NamedPolicy::Fp32OpsFp64Comm,
            NamedPolicy::Fp32Dot2,
        ]
        .into_iter()
        .map(Self::named)
        .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Dot2Config {
    pub precision: Precision,
    pub n: usize,
    pub trials: usize,
    /// Condition grid; empty means half-decades from 1e1 to 1e16.
    pub conds: Vec<f64>,
}

impl Default for Dot2Config {
    fn default() -> Self {
        Self {
            precision: Precision::Fp32,
            n: 1000,
            trials: 5,
            conds: Vec::new(),
        }
    }
}

impl Dot2Config {
    pub fn grid(&self) -> Vec<f64> {
        if self.conds.is_empty() {
            (2..=32)
                .map(|k: i32| {
                    let decade = 10f64.powi(k / 2);
                    if k % 2 == 0 {
                        decade
                    } else {
                        decade * 10f64.sqrt()
                    }
                })
                .collect()
        } else {
            self.conds.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PruneConfig {
    /// Largest tolerated `|final residual - fp64 final residual|`.
    #[serde(with = "nonfinite")]
    pub vprec_threshold: f64,
    /// Largest tolerated envelope width ratio.
    #[serde(with = "nonfinite")]
    pub mca_width_threshold: f64,
}

impl Default for PruneConfig {
    fn default() -> Self {
        Self {
            vprec_threshold: 1e-6,
            mca_width_threshold: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KernelName {
    #[default]
    Mxm,
    Glsc3,
    Add2s,
    Ax,
    LocalGrad3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntensityConfig {
    pub kernel: KernelName,
    /// `[m, n, k]` for mxm, `[n]` for vector kernels, `[points per axis]`
    /// for ax and local_grad3.
    pub dims: [usize; 3],
    pub precision: Precision,
}

impl Default for IntensityConfig {
    fn default() -> Self {
        Self {
            kernel: KernelName::Mxm,
            dims: [12, 12, 12],
            precision: Precision::Fp64,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> LabResult<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> LabResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> LabResult<()> {
        let bad = |m: String| Err(LabError::Config(m));
        if self.mesh.elements() == 0 {
            return bad("mesh needs at least one element per axis".into());
        }
        if self.ranks == 0 || self.ranks > self.mesh.elements() {
            return bad(format!(
                "ranks must lie in [1, {}], got {}",
                self.mesh.elements(),
                self.ranks
            ));
        }
        self.policy.resolve().validate()?;
        self.cg.validate()?;
        self.backends.validate()?;
        if self.samples < 2 {
            return bad(format!("samples must be >= 2, got {}", self.samples));
        }
        let s = &self.sweep;
        if !(1 <= s.t_min && s.t_min <= s.t_max && s.t_max <= 52) {
            return bad(format!(
                "sweep range {}..={} outside [1, 52]",
                s.t_min, s.t_max
            ));
        }
        if !(2..=11).contains(&s.exponent_bits) {
            return bad(format!(
                "sweep exponent_bits {} outside [2, 11]",
                s.exponent_bits
            ));
        }
        self.mca.mode.backend(self.mca.t).validate()?;
        for row in &self.matrix {
            row.policy.resolve().validate()?;
            if let Some(r) = row.ranks {
                if r == 0 || r > self.mesh.elements() {
                    return bad(format!("matrix row ranks {r} out of range"));
                }
            }
        }
        if self.dot2.n < 2 || self.dot2.trials == 0 {
            return bad("dot2 needs n >= 2 and trials >= 1".into());
        }
        if self
            .dot2
            .conds
            .iter()
            .any(|c| !(c.is_finite() && *c >= 1.0))
        {
            return bad("dot2 conds must be finite and >= 1".into());
        }
        let p = &self.prune;
        if p.vprec_threshold.is_nan() || p.vprec_threshold < 0.0 {
            return bad("prune.vprec_threshold must be >= 0".into());
        }
        if p.mca_width_threshold.is_nan() || p.mca_width_threshold < 0.0 {
            return bad("prune.mca_width_threshold must be >= 0".into());
        }
        let dims = &self.intensity.dims;
        let used = match self.intensity.kernel {
            KernelName::Mxm => &dims[..],
            _ => &dims[..1],
        };
        if used.contains(&0) {
            return bad("intensity dims must be positive".into());
        }
        if let Some(t) = self.timings {
            if !(t.t_double > 0.0 && t.t_double.is_finite() && t.t_mixed.is_finite()) {
                return bad("timings must be finite with t_double > 0".into());
            }
        }
        Ok(())
    }
}
