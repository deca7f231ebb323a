//! Instrumented vector and tensor-product kernels of the CG loop.
//!
//! Matrices are column-major (`a[i + rows*j]`). Every multiply and add goes
//! through the caller's [`ArithmeticContext`] in a fixed loop order; under a
//! native backend a dispatch-free loop with the identical order runs instead.

use crate::arith::{round_vprec, ArithmeticContext, Backend};
use crate::error::{contract, Result};
use crate::scalar::Real;

/// `c (m x n) = a (m x k) * b (k x n)`, accumulating over `k` innermost.
pub fn mxm<T: Real>(
    a: &[T],
    m: usize,
    b: &[T],
    k: usize,
    c: &mut [T],
    n: usize,
    ctx: &mut ArithmeticContext,
) -> Result<()> {
    contract(
        a.len() == m * k && b.len() == k * n && c.len() == m * n,
        || {
            format!(
                "mxm shape mismatch: a={} (m*k={}), b={} (k*n={}), c={} (m*n={})",
                a.len(),
                m * k,
                b.len(),
                k * n,
                c.len(),
                m * n
            )
        },
    )?;
    mxm_unchecked(a, m, b, k, c, n, ctx);
    Ok(())
}

#[inline]
pub(crate) fn mxm_unchecked<T: Real>(
    a: &[T],
    m: usize,
    b: &[T],
    k: usize,
    c: &mut [T],
    n: usize,
    ctx: &mut ArithmeticContext,
) {
    if ctx.backend() == Backend::IeeeExact {
        for j in 0..n {
            let bj = &b[k * j..k * (j + 1)];
            for i in 0..m {
                let mut acc = T::zero();
                for (l, &bl) in bj.iter().enumerate() {
                    acc = acc + a[i + m * l] * bl;
                }
                c[i + m * j] = acc;
            }
        }
        ctx.tally((2 * m * n * k) as u64);
    } else if let Backend::Vprec(fmt) = ctx.backend() {
        let round = |x: f64| T::narrow(round_vprec(x, fmt));
        for j in 0..n {
            let bj = &b[k * j..k * (j + 1)];
            for i in 0..m {
                let mut acc = T::zero();
                for (l, &bl) in bj.iter().enumerate() {
                    let prod = round(a[i + m * l].widen() * bl.widen());
                    acc = round(acc.widen() + prod.widen());
                }
                c[i + m * j] = acc;
            }
        }
        ctx.tally((2 * m * n * k) as u64);
    } else {
        for j in 0..n {
            for i in 0..m {
                let mut acc = T::zero();
                for l in 0..k {
                    let prod = ctx.mul(a[i + m * l], b[l + k * j]);
                    acc = ctx.add(acc, prod);
                }
                c[i + m * j] = acc;
            }
        }
    }
}

/// Reference-element gradient of one element: `ur = D u` along r, `us`
/// along s, `ut` along t. `d` and `dt` are the column-major differentiation
/// matrix and its transpose; `n` points per axis.
pub fn local_grad3<T: Real>(
    u: &[T],
    d: &[T],
    dt: &[T],
    n: usize,
    ur: &mut [T],
    us: &mut [T],
    ut: &mut [T],
    ctx: &mut ArithmeticContext,
) -> Result<()> {
    let n3 = n * n * n;
    contract(
        u.len() == n3 && ur.len() == n3 && us.len() == n3 && ut.len() == n3,
        || format!("local_grad3 expects element arrays of length {n3}"),
    )?;
    contract(d.len() == n * n && dt.len() == n * n, || {
        "local_grad3: derivative matrix shape"
    })?;
    let n2 = n * n;
    mxm_unchecked(d, n, u, n, ur, n2, ctx);
    for k in 0..n {
        let s = k * n2..(k + 1) * n2;
        mxm_unchecked(&u[s.clone()], n, dt, n, &mut us[s], n, ctx);
    }
    mxm_unchecked(u, n2, dt, n, ut, n, ctx);
    Ok(())
}

/// Transpose of [`local_grad3`]: `w = D^T ur + (us D)_s + ut D`, summed in
/// that order. `tmp` is scratch of the element size.
pub fn local_grad3_t<T: Real>(
    ur: &[T],
    us: &[T],
    ut: &[T],
    d: &[T],
    dt: &[T],
    n: usize,
    w: &mut [T],
    tmp: &mut [T],
    ctx: &mut ArithmeticContext,
) -> Result<()> {
    let n3 = n * n * n;
    contract(
        [ur.len(), us.len(), ut.len(), w.len(), tmp.len()]
            .iter()
            .all(|&l| l == n3),
        || format!("local_grad3_t expects element arrays of length {n3}"),
    )?;
    contract(d.len() == n * n && dt.len() == n * n, || {
        "local_grad3_t: derivative matrix shape"
    })?;
    let n2 = n * n;
    mxm_unchecked(dt, n, ur, n, w, n2, ctx);
    for k in 0..n {
        let s = k * n2..(k + 1) * n2;
        mxm_unchecked(&us[s.clone()], n, d, n, &mut tmp[s], n, ctx);
    }
    add2(w, tmp, ctx);
    mxm_unchecked(ut, n2, d, n, tmp, n, ctx);
    add2(w, tmp, ctx);
    Ok(())
}

/// `a += b` elementwise.
pub fn add2<T: Real>(a: &mut [T], b: &[T], ctx: &mut ArithmeticContext) {
    for (x, &y) in a.iter_mut().zip(b) {
        *x = ctx.add(*x, y);
    }
}

/// `a *= b` elementwise.
pub fn col2<T: Real>(a: &mut [T], b: &[T], ctx: &mut ArithmeticContext) {
    for (x, &y) in a.iter_mut().zip(b) {
        *x = ctx.mul(*x, y);
    }
}

/// `p <- beta * p + z`.
pub fn add2s1<T: Real>(p: &mut [T], z: &[T], beta: T, ctx: &mut ArithmeticContext) -> Result<()> {
    contract(p.len() == z.len(), || {
        format!("add2s1 length mismatch: {} vs {}", p.len(), z.len())
    })?;
    for (pi, &zi) in p.iter_mut().zip(z) {
        let s = ctx.mul(beta, *pi);
        *pi = ctx.add(s, zi);
    }
    Ok(())
}

/// `x <- x + alpha * p`.
pub fn add2s2<T: Real>(x: &mut [T], p: &[T], alpha: T, ctx: &mut ArithmeticContext) -> Result<()> {
    contract(x.len() == p.len(), || {
        format!("add2s2 length mismatch: {} vs {}", x.len(), p.len())
    })?;
    for (xi, &pi) in x.iter_mut().zip(p) {
        let s = ctx.mul(alpha, pi);
        *xi = ctx.add(*xi, s);
    }
    Ok(())
}
