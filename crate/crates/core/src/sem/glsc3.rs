use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arith::ArithmeticContext;
use crate::eft::{two_prod, two_sum, Expansion2};
use crate::error::{contract, Error, Result};
use crate::gs::Partials;
use crate::scalar::Real;

/// Local accumulation scheme of the weighted dot product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DotMode {
    /// Working-precision accumulator.
    #[default]
    Plain,
    /// Binary64 accumulator.
    WideAccumulate,
    /// Compensated accumulation at working precision.
    Dot2,
}

impl DotMode {
    pub const ALL: [DotMode; 3] = [DotMode::Plain, DotMode::WideAccumulate, DotMode::Dot2];

    pub fn as_str(self) -> &'static str {
        match self {
            DotMode::Plain => "plain",
            DotMode::WideAccumulate => "wide_accumulate",
            DotMode::Dot2 => "dot2",
        }
    }
}

impl fmt::Display for DotMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DotMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        DotMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown dot mode '{s}'")))
    }
}

/// Flops per entry of the dot2 path: weight multiply, two_prod (2),
/// two_sum (6), two error-term adds.
const DOT2_FLOPS_PER_ENTRY: u64 = 11;

/// Per-rank partials of `sum a_i c_i b_i`, each rank summing its own index
/// range in increasing order.
pub fn glsc3_local<T: Real>(
    a: &[T],
    c: &[T],
    b: &[T],
    ranks: &[Range<usize>],
    mode: DotMode,
    ctx: &mut ArithmeticContext,
) -> Result<Partials<T>> {
    contract(a.len() == b.len() && a.len() == c.len(), || {
        format!(
            "glsc3 length mismatch: a={}, c={}, b={}",
            a.len(),
            c.len(),
            b.len()
        )
    })?;
    contract(
        !ranks.is_empty() && ranks.iter().all(|r| r.end <= a.len()),
        || "glsc3 rank ranges out of bounds",
    )?;
    Ok(match mode {
        DotMode::Plain => Partials::Plain(
            ranks
                .iter()
                .map(|r| {
                    let mut acc = T::zero();
                    for i in r.clone() {
                        let t = ctx.mul(a[i], c[i]);
                        let t = ctx.mul(t, b[i]);
                        acc = ctx.add(acc, t);
                    }
                    acc
                })
                .collect(),
        ),
        DotMode::WideAccumulate => Partials::Wide(
            ranks
                .iter()
                .map(|r| {
                    let mut acc = 0.0f64;
                    for i in r.clone() {
                        let t = ctx.mul(a[i].widen(), c[i].widen());
                        let t = ctx.mul(t, b[i].widen());
                        acc = ctx.add(acc, t);
                    }
                    acc
                })
                .collect(),
        ),
        DotMode::Dot2 => Partials::Expansion(
            ranks
                .iter()
                .map(|r| {
                    let (mut hi, mut lo) = (T::zero(), T::zero());
                    for i in r.clone() {
                        let (p, e) = two_prod(a[i] * c[i], b[i]);
                        let (s, q) = two_sum(hi, p);
                        hi = s;
                        lo = lo + (q + e);
                    }
                    ctx.tally(DOT2_FLOPS_PER_ENTRY * r.len() as u64);
                    let (hi, lo) = two_sum(hi, lo);
                    Expansion2 { hi, lo }
                })
                .collect(),
        ),
    })
}
