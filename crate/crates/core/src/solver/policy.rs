use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gs::{GsPlan, ReducePrecision};
use crate::scalar::Precision;
use crate::sem::DotMode;

/// Where square roots inside the preconditioner are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SqrtMode {
    /// At the preconditioner precision.
    #[default]
    Native,
    /// In binary64, rounded back once.
    PromoteFp64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PreconditionerKind {
    Identity,
    #[default]
    Jacobi,
    SqrtWeightedJacobi,
}

impl PreconditionerKind {
    pub const ALL: [PreconditionerKind; 3] = [
        PreconditionerKind::Identity,
        PreconditionerKind::Jacobi,
        PreconditionerKind::SqrtWeightedJacobi,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PreconditionerKind::Identity => "identity",
            PreconditionerKind::Jacobi => "jacobi",
            PreconditionerKind::SqrtWeightedJacobi => "sqrt_weighted_jacobi",
        }
    }
}

impl fmt::Display for PreconditionerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PreconditionerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        PreconditionerKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown preconditioner '{s}'")))
    }
}

fn fp64() -> Precision {
    Precision::Fp64
}

/// Precision assignment of every part of the CG solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrecisionPolicy {
    /// Problem setup; only binary64 is accepted.
    #[serde(default = "fp64")]
    pub init: Precision,
    /// Storage and kernel arithmetic of the CG loop vectors.
    pub solver_ops: Precision,
    pub precond_ops: Precision,
    #[serde(default)]
    pub sqrt_mode: SqrtMode,
    pub local_dot: DotMode,
    pub global_reduce: ReducePrecision,
    /// Accumulation precision of the gather-scatter.
    pub gs_field_precision: Precision,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        Self::all_fp64()
    }
}

impl PrecisionPolicy {
    pub fn all_fp64() -> Self {
        Self {
            init: Precision::Fp64,
            solver_ops: Precision::Fp64,
            precond_ops: Precision::Fp64,
            sqrt_mode: SqrtMode::Native,
            local_dot: DotMode::Plain,
            global_reduce: ReducePrecision::Fp64,
            gs_field_precision: Precision::Fp64,
        }
    }

    pub fn all_fp32() -> Self {
        Self {
            init: Precision::Fp64,
            solver_ops: Precision::Fp32,
            precond_ops: Precision::Fp32,
            sqrt_mode: SqrtMode::Native,
            local_dot: DotMode::Plain,
            global_reduce: ReducePrecision::Fp32,
            gs_field_precision: Precision::Fp32,
        }
    }

    /// Binary32 vector kernels with binary64 gather-scatter and reductions.
    pub fn fp32_ops_fp64_comm() -> Self {
        Self {
            local_dot: DotMode::WideAccumulate,
            global_reduce: ReducePrecision::Fp64,
            gs_field_precision: Precision::Fp64,
            ..Self::all_fp32()
        }
    }

    /// Binary32 everywhere except compensated dot products.
    pub fn fp32_dot2() -> Self {
        Self {
            local_dot: DotMode::Dot2,
            global_reduce: ReducePrecision::Compensated,
            ..Self::all_fp32()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.init != Precision::Fp64 {
            return Err(Error::Config(
                "initialization precision must be fp64".into(),
            ));
        }
        if self.global_reduce == ReducePrecision::Compensated && self.local_dot != DotMode::Dot2 {
            return Err(Error::Config(
                "compensated global reduction requires local_dot = dot2".into(),
            ));
        }
        Ok(())
    }

    /// Checks that the plan accumulates at the policy's gather-scatter
    /// precision.
    pub fn check_plan(&self, plan: &GsPlan) -> Result<()> {
        if plan.accumulate() != self.gs_field_precision {
            return Err(Error::Config(format!(
                "gather-scatter plan accumulates in {} but the policy asks for {}",
                plan.accumulate(),
                self.gs_field_precision
            )));
        }
        Ok(())
    }
}

/// Stopping and stagnation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CgConfig {
    /// Absolute threshold on `sqrt(rtr)`.
    pub tol: f64,
    pub max_iter: usize,
    pub stagnation_window: usize,
    pub stagnation_factor: f64,
}

impl Default for CgConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 1000,
            stagnation_window: 20,
            stagnation_factor: 0.5,
        }
    }
}

impl CgConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Config(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be >= 1".into()));
        }
        if self.stagnation_window < 2 {
            return Err(Error::Config("stagnation_window must be >= 2".into()));
        }
        if !(self.stagnation_factor > 0.0 && self.stagnation_factor < 1.0) {
            return Err(Error::Config("stagnation_factor must lie in (0, 1)".into()));
        }
        Ok(())
    }
}
