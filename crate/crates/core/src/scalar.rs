//! Working-precision scalar abstraction.
//!
//! Every kernel, field and reduction is generic over [`Real`], so the same
//! code path runs in binary32 or binary64. Precision choices that are only
//! known at run time (policy files) are expressed with [`Precision`] and
//! dispatched once at the top of a solve.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumCast};
use serde::{Deserialize, Serialize};

/// Storage/arithmetic precision selectable at run time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Fp32,
    Fp64,
}

impl Precision {
    pub fn bytes(self) -> usize {
        match self {
            Precision::Fp32 => 4,
            Precision::Fp64 => 8,
        }
    }

    /// Unit roundoff `2^-p` for round-to-nearest.
    pub fn unit_roundoff(self) -> f64 {
        match self {
            Precision::Fp32 => f32::UNIT_ROUNDOFF,
            Precision::Fp64 => f64::UNIT_ROUNDOFF,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Precision::Fp32 => "fp32",
            Precision::Fp64 => "fp64",
        }
    }
}

impl Display for Precision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

mod sealed {
    pub trait Sealed {}
    impl Sealed for f32 {}
    impl Sealed for f64 {}
}

/// IEEE binary floating-point type usable as working precision.
pub trait Real:
    Float
    + FromPrimitive
    + NumCast
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
    + sealed::Sealed
{
    const PRECISION: Precision;
    /// Explicit fraction bits.
    const MANTISSA_BITS: u32;
    const UNIT_ROUNDOFF: f64;

    fn narrow(x: f64) -> Self;
    fn widen(self) -> f64;
    /// Fused multiply-add with a single rounding.
    fn fma(self, b: Self, c: Self) -> Self;
}

impl Real for f32 {
    const PRECISION: Precision = Precision::Fp32;
    const MANTISSA_BITS: u32 = 23;
    const UNIT_ROUNDOFF: f64 = 5.960_464_477_539_063e-8; // 2^-24

    #[inline(always)]
    fn narrow(x: f64) -> Self {
        x as f32
    }
    #[inline(always)]
    fn widen(self) -> f64 {
        self as f64
    }
    #[inline(always)]
    fn fma(self, b: Self, c: Self) -> Self {
        self.mul_add(b, c)
    }
}

impl Real for f64 {
    const PRECISION: Precision = Precision::Fp64;
    const MANTISSA_BITS: u32 = 52;
    const UNIT_ROUNDOFF: f64 = 1.110_223_024_625_156_5e-16; // 2^-53

    #[inline(always)]
    fn narrow(x: f64) -> Self {
        x
    }
    #[inline(always)]
    fn widen(self) -> f64 {
        self
    }
    #[inline(always)]
    fn fma(self, b: Self, c: Self) -> Self {
        self.mul_add(b, c)
    }
}

/// Converts between working precisions (rounding to nearest when narrowing).
#[inline(always)]
pub fn cast<A: Real, B: Real>(x: A) -> B {
    B::narrow(x.widen())
}
