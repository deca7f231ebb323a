//! Single solves assembled from an [`ExperimentConfig`].

use std::fmt;

use precilab_core::sem::build_problem;
use precilab_core::{
    pcg_trace, BoxMesh, CgConfig, GsMode, GsPlan, PrecisionPolicy, PreconditionerKind, RunReport,
    Section, SectionMap, SolveSetup,
};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::LabResult;

/// Everything that varies between the solves of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub ranks: usize,
    pub gs_mode: GsMode,
    pub preconditioner: PreconditionerKind,
    pub policy: PrecisionPolicy,
    pub cg: CgConfig,
    pub backends: SectionMap,
    pub sensitive_init: bool,
    pub perturb_sqrt: bool,
    pub seed: u64,
    pub sample_index: u64,
}

impl RunSpec {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        Self {
            ranks: cfg.ranks,
            gs_mode: cfg.gs_mode,
            preconditioner: cfg.preconditioner,
            policy: cfg.policy.resolve(),
            cg: cfg.cg,
            backends: cfg.backends.clone(),
            sensitive_init: cfg.sensitive_init,
            perturb_sqrt: cfg.perturb_sqrt,
            seed: cfg.seed,
            sample_index: 0,
        }
    }

    /// Same problem and partition, all-fp64 policy, native arithmetic.
    pub fn fp64_baseline(&self) -> Self {
        Self {
            policy: PrecisionPolicy::all_fp64(),
            backends: SectionMap::default(),
            sample_index: 0,
            ..self.clone()
        }
    }

    pub fn is_fp64_baseline(&self) -> bool {
        self.policy == PrecisionPolicy::all_fp64()
            && Section::ALL
                .iter()
                .all(|&s| self.backends.backend_for(s) == precilab_core::Backend::IeeeExact)
    }
}

/// Builds the load through the `init` context and runs PCG, keeping the
/// history when `pap <= 0` stops the solve.
pub fn run(mesh: &BoxMesh, spec: &RunSpec) -> LabResult<RunReport> {
    let mut ctxs = spec.backends.contexts(spec.seed, spec.sample_index)?;
    ctxs.set_sqrt_perturbation(spec.perturb_sqrt);
    let problem = build_problem(mesh, spec.sensitive_init, ctxs.get(Section::Init))?;
    let plan = GsPlan::build(
        mesh,
        spec.ranks,
        spec.gs_mode,
        spec.policy.gs_field_precision,
    )?;
    let setup = SolveSetup {
        mesh,
        plan: &plan,
        preconditioner: spec.preconditioner,
        policy: spec.policy,
        cg: spec.cg,
    };
    Ok(pcg_trace(&setup, &problem.rhs, &mut ctxs)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Converges,
    Stagnates,
    /// Iteration budget exhausted without convergence or stagnation.
    MaxIter,
    NotSpd,
    Breakdown,
}

impl Outcome {
    pub fn of(r: &RunReport) -> Self {
        if r.converged {
            Outcome::Converges
        } else if r.breakdown {
            Outcome::Breakdown
        } else if r.not_spd_at.is_some() {
            Outcome::NotSpd
        } else if r.stagnated {
            Outcome::Stagnates
        } else {
            Outcome::MaxIter
        }
    }

    /// 0 converged, 2 no convergence, 3 numeric breakdown.
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Converges => 0,
            Outcome::Stagnates | Outcome::MaxIter => 2,
            Outcome::NotSpd | Outcome::Breakdown => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Converges => "converges",
            Outcome::Stagnates => "stagnates",
            Outcome::MaxIter => "max_iter",
            Outcome::NotSpd => "not_spd",
            Outcome::Breakdown => "breakdown",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
