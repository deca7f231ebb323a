//! Emulated floating-point formats and round-to-nearest-even onto them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A binary floating-point format with `t` explicit fraction bits and `r`
/// exponent bits, emulated inside binary64.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrecisionFormat {
    pub pseudo_mantissa_bits: u32,
    pub exponent_bits: u32,
}

impl PrecisionFormat {
    pub const HALF: Self = Self {
        pseudo_mantissa_bits: 10,
        exponent_bits: 5,
    };
    pub const SINGLE: Self = Self {
        pseudo_mantissa_bits: 23,
        exponent_bits: 8,
    };
    pub const DOUBLE: Self = Self {
        pseudo_mantissa_bits: 52,
        exponent_bits: 11,
    };

    pub fn new(t: u32, r: u32) -> Result<Self> {
        let fmt = Self {
            pseudo_mantissa_bits: t,
            exponent_bits: r,
        };
        fmt.validate()?;
        Ok(fmt)
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.pseudo_mantissa_bits;
        let r = self.exponent_bits;
        if !(1..=52).contains(&t) {
            return Err(Error::Format(format!(
                "pseudo-mantissa bits t={t} outside [1, 52]"
            )));
        }
        if !(2..=11).contains(&r) {
            return Err(Error::Format(format!(
                "exponent bits r={r} outside [2, 11]"
            )));
        }
        Ok(())
    }

    /// Largest unbiased exponent of a finite value, `2^(r-1) - 1`.
    pub fn emax(&self) -> i32 {
        (1i32 << (self.exponent_bits - 1)) - 1
    }

    /// Exponent of the smallest normal value, `1 - emax`.
    pub fn emin(&self) -> i32 {
        1 - self.emax()
    }

    /// Rounding unit `2^-(t+1)` (half an ulp of 1).
    pub fn unit_roundoff(&self) -> f64 {
        pow2(-(self.pseudo_mantissa_bits as i32) - 1)
    }

    /// Largest finite value `(2 - 2^-t) * 2^emax`.
    pub fn max_finite(&self) -> f64 {
        let t = self.pseudo_mantissa_bits as i32;
        (2.0 - pow2(-t)) * pow2(self.emax())
    }

    pub fn min_normal(&self) -> f64 {
        pow2(self.emin())
    }

    pub fn min_subnormal(&self) -> f64 {
        ldexp(1.0, self.emin() - self.pseudo_mantissa_bits as i32)
    }
}

/// `2^k` for `k` in the binary64 normal exponent range.
#[inline]
pub(crate) fn pow2(k: i32) -> f64 {
    debug_assert!((-1022..=1023).contains(&k));
    f64::from_bits(((k + 1023) as u64) << 52)
}

/// `x * 2^k`, exact whenever the result is representable.
pub fn ldexp(mut x: f64, mut k: i32) -> f64 {
    while k > 1023 {
        x *= pow2(1023);
        k -= 1023;
    }
    while k < -1022 {
        x *= pow2(-1022);
        k += 1022;
        if x == 0.0 {
            return x;
        }
    }
    x * pow2(k)
}

/// Unbiased binary exponent `floor(log2 |x|)` of a finite nonzero value,
/// including binary64 subnormals.
#[inline]
pub fn exponent_of(x: f64) -> i32 {
    let bits = x.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i32;
    if biased != 0 {
        biased - 1023
    } else {
        let frac = bits & ((1u64 << 52) - 1);
        // value = frac * 2^-1074
        63 - frac.leading_zeros() as i32 - 1074
    }
}

/// Rounds a binary64 value to nearest-even in the emulated format.
///
/// Values beyond the emulated range overflow to a signed infinity, values
/// below the smallest normal round onto the emulated subnormal grid, and
/// anything under half the smallest subnormal becomes a signed zero. NaN and
/// infinities pass through.
pub fn round_vprec(x: f64, fmt: PrecisionFormat) -> f64 {
    debug_assert!(fmt.validate().is_ok());
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    let t = fmt.pseudo_mantissa_bits as i32;
    let emax = fmt.emax();
    let emin = fmt.emin();
    let bits = x.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i32;
    let e = biased - 1023;

    if e > emax {
        return f64::INFINITY.copysign(x);
    }

    let rounded = if biased != 0 && e >= emin {
        let drop = (52 - t) as u32;
        if drop == 0 {
            x
        } else {
            let mask = (1u64 << drop) - 1;
            let half = 1u64 << (drop - 1);
            let low = bits & mask;
            let mut r = bits & !mask;
            if low > half || (low == half && (r >> drop) & 1 == 1) {
                // carry may ripple into the exponent field
                r += 1u64 << drop;
            }
            f64::from_bits(r)
        }
    } else {
        // Emulated subnormal: quantum 2^(emin - t). |x| < 2^emin so the
        // scaled value is below 2^t and every scaling step is exact.
        let scaled = x * pow2(-emin) * pow2(t);
        let q = scaled.round_ties_even();
        let back = q * pow2(emin) * pow2(-t);
        if back == 0.0 {
            0.0f64.copysign(x)
        } else {
            back
        }
    };

    if rounded.is_infinite() || exponent_of(rounded) > emax {
        return f64::INFINITY.copysign(x);
    }
    rounded
}
