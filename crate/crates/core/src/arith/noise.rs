//! Counter-based noise stream for Monte Carlo arithmetic.
//!
//! A draw is a pure function of `(seed, sample_index, counter)`, so any
//! fixed operation sequence replays bit-identically and independent samples
//! never share a stream.

use super::format::{exponent_of, ldexp};

#[inline(always)]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// Stream key for one `(seed, sample)` pair.
#[inline]
pub fn stream_key(seed: u64, sample_index: u64) -> u64 {
    mix64(
        seed ^ mix64(
            sample_index
                .wrapping_add(GOLDEN)
                .wrapping_mul(0xd1b5_4a32_d192_ed03),
        ),
    )
}

/// Independent sub-stream of `key` (one per instrumented section).
#[inline]
pub fn substream(key: u64, lane: u64) -> u64 {
    mix64(key ^ lane.wrapping_add(1).wrapping_mul(GOLDEN))
}

/// Uniform draw on the open interval (-1/2, 1/2).
#[inline]
pub fn noise_at(key: u64, counter: u64) -> f64 {
    let bits = mix64(key.wrapping_add(counter.wrapping_add(1).wrapping_mul(GOLDEN)));
    // 53 random bits centred in their cell: never exactly 0 or 1.
    ((bits >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0) - 0.5
}

/// Monte Carlo noise function `x + 2^(e_x - t) * xi` with
/// `e_x = floor(log2|x|) + 1`, evaluated in binary64.
///
/// Zero is returned unchanged (its exponent is undefined), as are NaN and
/// infinities.
#[inline]
pub fn inexact(x: f64, t: u32, xi: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let ex = exponent_of(x) + 1;
    x + ldexp(xi, ex - t as i32)
}
