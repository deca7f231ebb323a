use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::gather::{chain, tree, COMBINE_FLOPS};
use super::plan::GsMode;
use crate::arith::ArithmeticContext;
use crate::eft::{expansion2_combine, fast_two_sum, Expansion2};
use crate::error::{contract, Error, Result};
use crate::scalar::Real;

/// Precision of the cross-rank combination of dot-product partials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReducePrecision {
    Fp32,
    #[default]
    Fp64,
    /// Expansion-of-two combination, rounded once to the working precision.
    Compensated,
}

impl ReducePrecision {
    pub const ALL: [ReducePrecision; 3] = [
        ReducePrecision::Fp32,
        ReducePrecision::Fp64,
        ReducePrecision::Compensated,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ReducePrecision::Fp32 => "fp32",
            ReducePrecision::Fp64 => "fp64",
            ReducePrecision::Compensated => "compensated",
        }
    }
}

impl fmt::Display for ReducePrecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReducePrecision {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ReducePrecision::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown reduction precision '{s}'")))
    }
}

/// Per-rank partial sums of a distributed dot product.
#[derive(Debug, Clone, PartialEq)]
pub enum Partials<T> {
    /// Accumulated at working precision.
    Plain(Vec<T>),
    /// Accumulated in binary64.
    Wide(Vec<f64>),
    /// Compensated accumulation at working precision.
    Expansion(Vec<Expansion2<T>>),
}

impl<T: Real> Partials<T> {
    pub fn len(&self) -> usize {
        match self {
            Partials::Plain(v) => v.len(),
            Partials::Wide(v) => v.len(),
            Partials::Expansion(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn scalars<A: Real>(&self) -> Vec<A> {
        match self {
            Partials::Plain(v) => v.iter().map(|x| A::narrow(x.widen())).collect(),
            Partials::Wide(v) => v.iter().map(|&x| A::narrow(x)).collect(),
            Partials::Expansion(v) => v.iter().map(|e| A::narrow(e.value().widen())).collect(),
        }
    }

    fn expansions(&self) -> Vec<Expansion2<T>> {
        match self {
            Partials::Plain(v) => v.iter().map(|&x| Expansion2::from_scalar(x)).collect(),
            Partials::Wide(v) => v
                .iter()
                .map(|&x| {
                    let hi = T::narrow(x);
                    let (hi, lo) = fast_two_sum(hi, T::narrow(x - hi.widen()));
                    Expansion2 { hi, lo }
                })
                .collect(),
            Partials::Expansion(v) => v.clone(),
        }
    }
}

/// Combines per-rank partials into the global value.
///
/// Tree mode uses a balanced binary tree over ranks; every other mode sums
/// left to right in rank order. Compensated precision lifts every partial to
/// an expansion, combines them and rounds once to `T`.
pub fn global_sum<T: Real>(
    partials: &Partials<T>,
    mode: GsMode,
    precision: ReducePrecision,
    ctx: &mut ArithmeticContext,
) -> Result<f64> {
    contract(!partials.is_empty(), || {
        "global_sum of an empty partial list"
    })?;
    Ok(match precision {
        ReducePrecision::Fp32 => ordered_sum::<f32>(&partials.scalars(), mode, ctx).widen(),
        ReducePrecision::Fp64 => ordered_sum::<f64>(&partials.scalars(), mode, ctx),
        ReducePrecision::Compensated => {
            let exps = partials.expansions();
            let total = if mode == GsMode::Tree {
                exp_tree(&exps)
            } else {
                exp_chain(&exps)
            };
            ctx.tally(COMBINE_FLOPS * (exps.len() as u64 - 1) + 1);
            total.value().widen()
        }
    })
}

fn ordered_sum<A: Real>(vals: &[A], mode: GsMode, ctx: &mut ArithmeticContext) -> A {
    if mode == GsMode::Tree {
        tree(vals, ctx)
    } else {
        chain(vals, ctx)
    }
}

fn exp_chain<T: Real>(v: &[Expansion2<T>]) -> Expansion2<T> {
    v[1..]
        .iter()
        .fold(v[0], |acc, &e| expansion2_combine(acc, e))
}

fn exp_tree<T: Real>(v: &[Expansion2<T>]) -> Expansion2<T> {
    if v.len() == 1 {
        return v[0];
    }
    let mid = v.len().div_ceil(2);
    expansion2_combine(exp_tree(&v[..mid]), exp_tree(&v[mid..]))
}
