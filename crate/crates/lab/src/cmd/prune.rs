use std::path::PathBuf;

use precilab_core::solver::nonfinite;
use precilab_core::{Backend, BoxMesh, PrecisionFormat, Section, SectionMap};
use serde::{Deserialize, Serialize};

use super::mca::envelope;
use crate::config::ExperimentConfig;
use crate::error::LabResult;
use crate::output::Artifact;
use crate::run::{run, Outcome, RunSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Candidate,
    PrunedStage1,
    PrunedStage2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionVerdict {
    pub section: Section,
    pub verdict: Verdict,
    pub vprec_outcome: Option<Outcome>,
    /// `|final residual - fp64 final residual|` with `Vprec(single)` on this
    /// section only.
    #[serde(with = "nonfinite")]
    pub forward_error: f64,
    /// Envelope width ratio of the MCA-RR samples together with the fp64
    /// reference history; absent when pruned at stage 1.
    #[serde(default, with = "opt_nonfinite")]
    pub envelope_width: Option<f64>,
    /// The same ratio over the samples alone.
    #[serde(default, with = "opt_nonfinite")]
    pub sample_spread: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneResult {
    #[serde(with = "nonfinite")]
    pub baseline_final_residual: f64,
    pub sections: Vec<SectionVerdict>,
    pub candidates: Vec<Section>,
}

mod opt_nonfinite {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct W(#[serde(with = "precilab_core::solver::nonfinite")] f64);

    pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        x.map(W).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Ok(Option::<W>::deserialize(d)?.map(|w| w.0))
    }
}

/// Largest per-iteration `max/min` ratio of the aligned sample residuals.
pub fn envelope_width_ratio(histories: &[&[f64]]) -> f64 {
    envelope(histories)
        .iter()
        .map(|r| if r.max == r.min { 1.0 } else { r.max / r.min })
        .fold(1.0, |acc: f64, x| {
            if x.is_nan() {
                f64::INFINITY
            } else {
                acc.max(x)
            }
        })
}

/// Two-stage pruning of candidate sections for lower precision. Stage 1
/// runs `Vprec(single)` on one section at a time and drops sections whose
/// final residual moves more than `vprec_threshold` away from the fp64
/// baseline. Stage 2 samples MCA-RR at t=23 on each survivor and drops
/// sections whose envelope width ratio exceeds `mca_width_threshold`. The
/// envelope includes the fp64 reference history, so a section whose samples
/// agree with each other but not with binary64 is still dropped.
pub fn prune(cfg: &ExperimentConfig) -> LabResult<PruneResult> {
    let mesh = BoxMesh::new(cfg.mesh)?;
    let base = RunSpec::from_config(cfg);
    let baseline = run(&mesh, &base.fp64_baseline())?;
    let only = |s: Section, b: Backend| RunSpec {
        backends: SectionMap::only(&[s], b),
        ..base.clone()
    };
    let mut sections = Vec::new();
    for s in Section::ALL {
        let mut v = SectionVerdict {
            section: s,
            verdict: Verdict::PrunedStage1,
            vprec_outcome: None,
            forward_error: f64::INFINITY,
            envelope_width: None,
            sample_spread: None,
            error: None,
        };
        match run(&mesh, &only(s, Backend::Vprec(PrecisionFormat::SINGLE))) {
            Ok(r) => {
                let fe = (r.final_residual - baseline.final_residual).abs();
                v.forward_error = if fe.is_nan() { f64::INFINITY } else { fe };
                v.vprec_outcome = Some(Outcome::of(&r));
            }
            Err(e) => v.error = Some(e.to_string()),
        }
        if v.error.is_none() && v.forward_error <= cfg.prune.vprec_threshold {
            let mut hist = Vec::new();
            for k in 0..cfg.samples as u64 {
                let spec = RunSpec {
                    sample_index: k,
                    ..only(s, Backend::McaRr { t: 23 })
                };
                match run(&mesh, &spec) {
                    Ok(r) => hist.push(r.residual_norms()),
                    Err(e) => {
                        v.error = Some(e.to_string());
                        break;
                    }
                }
            }
            let reference = baseline.residual_norms();
            let mut refs: Vec<&[f64]> = hist.iter().map(Vec::as_slice).collect();
            v.sample_spread = Some(envelope_width_ratio(&refs));
            refs.push(&reference);
            let w = if v.error.is_some() {
                f64::INFINITY
            } else {
                envelope_width_ratio(&refs)
            };
            v.envelope_width = Some(w);
            v.verdict = if w <= cfg.prune.mca_width_threshold {
                Verdict::Candidate
            } else {
                Verdict::PrunedStage2
            };
        }
        sections.push(v);
    }
    Ok(PruneResult {
        baseline_final_residual: baseline.final_residual,
        candidates: sections
            .iter()
            .filter(|v| v.verdict == Verdict::Candidate)
            .map(|v| v.section)
            .collect(),
        sections,
    })
}

/// Writes `prune.json`.
pub fn cmd_prune(cfg: &ExperimentConfig) -> LabResult<(PruneResult, Vec<PathBuf>)> {
    let res = prune(cfg)?;
    let json = cfg.output.dir.join("prune.json");
    Artifact::new("prune", cfg, res.clone()).write(&json)?;
    Ok((res, vec![json]))
}
