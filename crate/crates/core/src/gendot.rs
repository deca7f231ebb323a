//! Ill-conditioned dot products with exactly known values.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{contract, Error, Result};
use crate::exact::Dyadic;
use crate::scalar::Real;

/// Vectors `x`, `y` together with their exact dot product and condition
/// number `sum|x_i y_i| / |sum x_i y_i|`.
#[derive(Debug, Clone)]
pub struct DotProblem<T> {
    pub x: Vec<T>,
    pub y: Vec<T>,
    pub exact: Dyadic,
    pub exact_value: f64,
    pub achieved_cond: f64,
}

impl<T: Real> DotProblem<T> {
    /// Relative error of `computed` against the exact value, evaluated
    /// exactly before the final division.
    pub fn relative_error(&self, computed: f64) -> f64 {
        if !computed.is_finite() {
            return f64::INFINITY;
        }
        let diff = (Dyadic::from_f64(computed) - self.exact.clone())
            .to_f64()
            .abs();
        diff / self.exact_value.abs()
    }
}

/// Largest condition number the generator can target in precision `T`
/// (`1/u^2`).
pub fn max_reachable_cond<T: Real>() -> f64 {
    1.0 / (T::UNIT_ROUNDOFF * T::UNIT_ROUNDOFF)
}

fn condition(x: &[f64], y: &[f64], exact: &Dyadic) -> f64 {
    let abs = x.iter().zip(y).fold(Dyadic::zero(), |acc, (a, b)| {
        acc + Dyadic::from_f64(a.abs()) * Dyadic::from_f64(b.abs())
    });
    abs.to_f64() / exact.to_f64().abs()
}

/// Generates a dot product with condition number near `target_cond`.
///
/// The first half of the products is drawn with exponents spread over
/// `log2(target_cond)/2`, the second half is chosen to cancel the running
/// exact sum with decreasing exponents, then the pairs are shuffled. Targets
/// up to 100 are served by same-sign vectors (condition exactly 1).
pub fn gen_dot<T: Real>(n: usize, target_cond: f64, seed: u64) -> Result<DotProblem<T>> {
    contract(n >= 2, || format!("gen_dot needs n >= 2, got {n}"))?;
    contract(target_cond.is_finite() && target_cond >= 1.0, || {
        format!("target condition must be finite and >= 1, got {target_cond}")
    })?;
    let limit = max_reachable_cond::<T>();
    if target_cond > limit {
        return Err(Error::Range {
            target: target_cond,
            limit,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![T::zero(); n];
    let mut y = vec![T::zero(); n];

    if target_cond <= 100.0 {
        for i in 0..n {
            x[i] = T::narrow(rng.random_range(0.5..1.0));
            y[i] = T::narrow(rng.random_range(0.5..1.0));
        }
    } else {
        let b = target_cond.log2();
        let n2 = n / 2;
        let mut e: Vec<i32> = (0..n2)
            .map(|_| (rng.random::<f64>() * b / 2.0).round() as i32)
            .collect();
        e[0] = (b / 2.0).round() as i32 + 1;
        if n2 > 1 {
            e[n2 - 1] = 0;
        }
        let mut partial = Dyadic::zero();
        for i in 0..n2 {
            let s = 2f64.powi(e[i]);
            x[i] = T::narrow((2.0 * rng.random::<f64>() - 1.0) * s);
            y[i] = T::narrow((2.0 * rng.random::<f64>() - 1.0) * s);
            partial = partial + Dyadic::from_f64(x[i].widen()) * Dyadic::from_f64(y[i].widen());
        }
        let m = n - n2;
        for (k, i) in (n2..n).enumerate() {
            let ek = if m > 1 {
                (b / 2.0) * (1.0 - k as f64 / (m - 1) as f64)
            } else {
                0.0
            };
            let s = 2f64.powi(ek.round() as i32);
            let mut xi = T::narrow((2.0 * rng.random::<f64>() - 1.0) * s);
            if xi == T::zero() {
                xi = T::narrow(s);
            }
            let target = (2.0 * rng.random::<f64>() - 1.0) * s;
            x[i] = xi;
            y[i] = T::narrow((target - partial.to_f64()) / xi.widen());
            partial = partial + Dyadic::from_f64(x[i].widen()) * Dyadic::from_f64(y[i].widen());
        }
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        x = idx.iter().map(|&i| x[i]).collect();
        y = idx.iter().map(|&i| y[i]).collect();
    }

    let xf: Vec<f64> = x.iter().map(|v| v.widen()).collect();
    let yf: Vec<f64> = y.iter().map(|v| v.widen()).collect();
    let exact = Dyadic::dot_f64(&xf, &yf);
    if exact.is_zero() {
        return Err(Error::Numeric(
            "generated dot product is exactly zero".into(),
        ));
    }
    let achieved_cond = condition(&xf, &yf, &exact);
    Ok(DotProblem {
        exact_value: exact.to_f64(),
        x,
        y,
        exact,
        achieved_cond,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_condition() {
        let p = gen_dot::<f64>(2, 1.0, 0).unwrap();
        assert_eq!(p.achieved_cond, 1.0);
        assert_eq!(
            condition(&[1.0, 1.0], &[1.0, 1.0], &Dyadic::from_f64(2.0)),
            1.0
        );
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(gen_dot::<f32>(1, 10.0, 0).is_err());
        assert!(gen_dot::<f32>(10, 0.5, 0).is_err());
        assert!(matches!(
            gen_dot::<f32>(10, 1e16, 0),
            Err(Error::Range { .. })
        ));
        assert!(gen_dot::<f64>(10, 1e16, 0).is_ok());
    }

    #[test]
    fn deterministic_per_seed() {
        let a = gen_dot::<f32>(50, 1e6, 11).unwrap();
        let b = gen_dot::<f32>(50, 1e6, 11).unwrap();
        assert_eq!(a.x, b.x);
        assert_eq!(a.y, b.y);
    }
}
