use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::policy::{CgConfig, PrecisionPolicy, PreconditionerKind};
use crate::gs::GsMode;

/// Outcome and per-iteration trace of one PCG solve.
///
/// `residual_history[0]` is the initial `rtr`; entry `k` is the value after
/// iteration `k`. `rho`, `beta` and `pap` histories have one entry per
/// iteration (`beta_history[0] = 0`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub iterations: usize,
    pub converged: bool,
    pub stagnated: bool,
    /// A NaN or infinite scalar stopped the solve.
    pub breakdown: bool,
    /// Iteration at which `pap <= 0` stopped the solve.
    pub not_spd_at: Option<usize>,
    /// `sqrt` of the last recorded `rtr`.
    #[serde(with = "nonfinite")]
    pub final_residual: f64,
    #[serde(with = "nonfinite::vec")]
    pub residual_history: Vec<f64>,
    #[serde(with = "nonfinite::vec")]
    pub rho_history: Vec<f64>,
    #[serde(with = "nonfinite::vec")]
    pub beta_history: Vec<f64>,
    #[serde(with = "nonfinite::vec")]
    pub pap_history: Vec<f64>,
    /// Instrumented operation counts per section.
    pub flop_tallies: BTreeMap<String, u64>,
    pub policy: PrecisionPolicy,
    pub preconditioner: PreconditionerKind,
    pub cg: CgConfig,
    pub ranks: usize,
    pub gs_mode: GsMode,
    pub seed: u64,
    pub sample_index: u64,
    /// Final iterate in binary64 (not serialized).
    #[serde(skip)]
    pub solution: Vec<f64>,
}

impl RunReport {
    /// `sqrt(rtr)` per history entry.
    pub fn residual_norms(&self) -> Vec<f64> {
        self.residual_history.iter().map(|r| r.sqrt()).collect()
    }
}

/// Serializes non-finite floats as the strings `"NaN"`, `"inf"`, `"-inf"`
/// so reports containing a breakdown still round-trip through JSON.
pub mod nonfinite {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    fn to_repr(x: f64) -> Repr {
        if x.is_finite() {
            Repr::Num(x)
        } else if x.is_nan() {
            Repr::Text("NaN".into())
        } else if x > 0.0 {
            Repr::Text("inf".into())
        } else {
            Repr::Text("-inf".into())
        }
    }

    fn from_repr<E: serde::de::Error>(r: Repr) -> Result<f64, E> {
        match r {
            Repr::Num(x) => Ok(x),
            Repr::Text(s) => match s.as_str() {
                "NaN" => Ok(f64::NAN),
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(E::custom(format!("invalid float '{other}'"))),
            },
        }
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        to_repr(*x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        from_repr(Repr::deserialize(d)?)
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(v.iter().map(|&x| to_repr(x)))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            Vec::<Repr>::deserialize(d)?
                .into_iter()
                .map(from_repr::<D::Error>)
                .collect()
        }
    }
}
