//! Error-free transformations and compensated reductions.
//!
//! All routines run natively at the working precision `T`; none of them go
//! through an [`ArithmeticContext`](crate::arith::ArithmeticContext) because
//! their exactness depends on IEEE round-to-nearest.

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::scalar::Real;

/// `s = fl(a + b)` and the exact rounding error `e`, so `s + e == a + b`.
/// Knuth's branch-free six-operation form.
#[inline(always)]
pub fn two_sum<T: Real>(a: T, b: T) -> (T, T) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Dekker's three-operation sum; exact when `|a| >= |b|` (or `a == 0`).
#[inline(always)]
pub fn fast_two_sum<T: Real>(a: T, b: T) -> (T, T) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

/// `p = fl(a * b)` and `e = a*b - p` via one fused multiply-add.
///
/// Exact as long as the product neither overflows nor lands in the
/// subnormal range.
#[inline(always)]
pub fn two_prod<T: Real>(a: T, b: T) -> (T, T) {
    let p = a * b;
    let e = a.fma(b, -p);
    (p, e)
}

#[inline]
fn split<T: Real>(a: T) -> (T, T) {
    let p = T::MANTISSA_BITS + 1;
    let factor = T::narrow(((1u64 << p.div_ceil(2)) + 1) as f64);
    let c = factor * a;
    let hi = c - (c - a);
    (hi, a - hi)
}

/// [`two_prod`] without fused multiply-add (Veltkamp/Dekker splitting), for
/// targets lacking an exact fma.
#[inline]
pub fn two_prod_dekker<T: Real>(a: T, b: T) -> (T, T) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    let e = al * bl - (((p - ah * bh) - al * bh) - ah * bl);
    (p, e)
}

/// Plain recursive dot product at working precision.
pub fn dot<T: Real>(x: &[T], y: &[T]) -> Result<T> {
    check_lengths(x.len(), y.len())?;
    Ok(x.iter().zip(y).fold(T::zero(), |acc, (&a, &b)| acc + a * b))
}

/// Dot product accumulated in binary64 regardless of `T`.
pub fn dot_wide<T: Real>(x: &[T], y: &[T]) -> Result<f64> {
    check_lengths(x.len(), y.len())?;
    Ok(x.iter()
        .zip(y)
        .fold(0.0f64, |acc, (&a, &b)| acc + a.widen() * b.widen()))
}

fn check_lengths(nx: usize, ny: usize) -> Result<()> {
    contract(nx == ny, || format!("dot length mismatch: {nx} vs {ny}"))?;
    contract(nx > 0, || "dot of empty vectors")
}

/// Compensated dot product (Ogita–Rump–Oishi Dot2) kept as an unevaluated
/// expansion `(hi, lo)`.
pub fn dot2_expansion<T: Real>(x: &[T], y: &[T]) -> Result<Expansion2<T>> {
    check_lengths(x.len(), y.len())?;
    let (mut p, mut s) = two_prod(x[0], y[0]);
    for (&a, &b) in x.iter().zip(y).skip(1) {
        let (h, r) = two_prod(a, b);
        let (np, q) = two_sum(p, h);
        p = np;
        s = s + (q + r);
    }
    // s may exceed p after heavy cancellation, so renormalize with two_sum
    let (hi, lo) = two_sum(p, s);
    Ok(Expansion2 { hi, lo })
}

/// Compensated dot product: accurate as if computed in twice the working
/// precision, then rounded once.
pub fn dot2<T: Real>(x: &[T], y: &[T]) -> Result<T> {
    dot2_expansion(x, y).map(|e| e.hi)
}

/// Kahan compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum<T> {
    sum: T,
    comp: T,
}

impl<T: Real> KahanSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            comp: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum
    }
}

/// Floating-point expansion of size two: value `hi + lo` held exactly, with
/// `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Expansion2<T> {
    pub hi: T,
    pub lo: T,
}

impl<T: Real> Expansion2<T> {
    /// Renormalizes `(a, b)` into the nonoverlapping form. Requires
    /// `|a| >= |b|` or `a == 0`.
    pub fn new(a: T, b: T) -> Self {
        let (hi, lo) = fast_two_sum(a, b);
        Self { hi, lo }
    }

    pub fn from_scalar(x: T) -> Self {
        Self {
            hi: x,
            lo: T::zero(),
        }
    }

    pub fn zero() -> Self {
        Self::from_scalar(T::zero())
    }

    /// Rounds the expansion to one working-precision value.
    pub fn value(&self) -> T {
        self.hi + self.lo
    }

    pub fn to_f64(&self) -> f64 {
        self.hi.widen() + self.lo.widen()
    }

    /// Adds two expansions with error-free transformations and renormalizes.
    pub fn combine(self, other: Self) -> Self {
        expansion2_combine(self, other)
    }
}

/// Sum of two size-two expansions: `two_sum` on the leading parts, the
/// trailing parts folded in with a second `two_sum`, two renormalizations.
/// Commutative bit-for-bit.
pub fn expansion2_combine<T: Real>(a: Expansion2<T>, b: Expansion2<T>) -> Expansion2<T> {
    let (s, e) = two_sum(a.hi, b.hi);
    let (t, f) = two_sum(a.lo, b.lo);
    let (s, e) = fast_two_sum(s, e + t);
    let (hi, lo) = fast_two_sum(s, e + f);
    Expansion2 { hi, lo }
}
