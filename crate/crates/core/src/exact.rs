//! Exact dyadic arithmetic: every finite binary float is `m * 2^e` with an
//! integer `m`, so sums and products of floats are represented exactly.

use std::cmp::Ordering;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_traits::{Signed, ToPrimitive, Zero};

use crate::arith::ldexp;

/// Exact value `mant * 2^exp`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

impl Dyadic {
    pub fn zero() -> Self {
        Self {
            mant: BigInt::zero(),
            exp: 0,
        }
    }

    /// Exact conversion. Panics on NaN or infinity.
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "Dyadic::from_f64 on non-finite value {x}");
        if x == 0.0 {
            return Self::zero();
        }
        let bits = x.to_bits();
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if biased == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        let mant = BigInt::from(m);
        let mant = if x < 0.0 { -mant } else { mant };
        Self { mant, exp: e }.normalized()
    }

    pub fn from_f32(x: f32) -> Self {
        Self::from_f64(x as f64)
    }

    fn normalized(mut self) -> Self {
        if self.mant.is_zero() {
            self.exp = 0;
            return self;
        }
        let tz = self.mant.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mant >>= tz;
            self.exp += tz as i64;
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn abs(&self) -> Self {
        Self {
            mant: self.mant.abs(),
            exp: self.exp,
        }
    }

    pub fn signum(&self) -> i32 {
        match self.mant.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    /// Nearest binary64 value (truncation to 64 significant bits, then one
    /// rounding; accurate to about one ulp, which is all error measurement
    /// needs).
    pub fn to_f64(&self) -> f64 {
        if self.mant.is_zero() {
            return 0.0;
        }
        let bits = self.mant.bits() as i64;
        let shift = (bits - 64).max(0);
        let top = (&self.mant.abs() >> shift as usize)
            .to_u64()
            .expect("fits in 64 bits");
        let v = ldexp(
            top as f64,
            (self.exp + shift).clamp(i32::MIN as i64, i32::MAX as i64) as i32,
        );
        if self.mant.is_negative() {
            -v
        } else {
            v
        }
    }

    /// Exact sum of a sequence of floats.
    pub fn sum_f64<I: IntoIterator<Item = f64>>(it: I) -> Self {
        it.into_iter()
            .fold(Self::zero(), |acc, x| acc + Self::from_f64(x))
    }

    /// Exact dot product.
    pub fn dot_f64(x: &[f64], y: &[f64]) -> Self {
        x.iter().zip(y).fold(Self::zero(), |acc, (&a, &b)| {
            acc + Self::from_f64(a) * Self::from_f64(b)
        })
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Dyadic) -> Dyadic {
        &self + &rhs
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        if self.mant.is_zero() {
            return rhs.clone();
        }
        if rhs.mant.is_zero() {
            return self.clone();
        }
        let exp = self.exp.min(rhs.exp);
        let a = &self.mant << (self.exp - exp) as usize;
        let b = &rhs.mant << (rhs.exp - exp) as usize;
        Dyadic { mant: a + b, exp }.normalized()
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            mant: -self.mant,
            exp: self.exp,
        }
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: Dyadic) -> Dyadic {
        self + (-rhs)
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: Dyadic) -> Dyadic {
        Dyadic {
            mant: self.mant * rhs.mant,
            exp: self.exp + rhs.exp,
        }
        .normalized()
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let d = self.clone() - other.clone();
        d.signum().cmp(&0)
    }
}
