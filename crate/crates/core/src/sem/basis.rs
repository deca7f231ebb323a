use crate::error::{contract, Error, Result};

/// Gauss–Lobatto–Legendre nodes, weights and differentiation matrix on
/// [-1, 1], always in binary64.
#[derive(Debug, Clone, PartialEq)]
pub struct GllBasis {
    pub degree: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Row-major `(N+1) x (N+1)`: `deriv[i*(N+1) + j] = l_j'(x_i)`.
    pub deriv: Vec<f64>,
}

pub const MAX_DEGREE: usize = 16;

/// Legendre polynomial values `(P_{N-1}(x), P_N(x))` by the three-term
/// recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=n {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = next;
    }
    (p_prev, p)
}

/// GLL nodes via Newton iteration on `(1-x^2) P_N'(x)` from Chebyshev–Lobatto
/// starting points.
pub fn basis_setup(n: usize) -> Result<GllBasis> {
    contract((1..=MAX_DEGREE).contains(&n), || {
        format!("degree {n} outside [1, {MAX_DEGREE}]")
    })?;
    let nf = n as f64;
    let mut x: Vec<f64> = (0..=n)
        .map(|i| -(std::f64::consts::PI * i as f64 / nf).cos())
        .collect();

    // Newton update for the Lobatto polynomial (Trefethen/Kopriva form).
    let newton = |x: &mut [f64]| {
        let mut delta: f64 = 0.0;
        for xi in x.iter_mut() {
            let (pm1, pn) = legendre_pair(n, *xi);
            let step = (*xi * pn - pm1) / ((nf + 1.0) * pn);
            *xi -= step;
            delta = delta.max(step.abs());
        }
        delta
    };
    let mut converged = false;
    for _ in 0..100 {
        if newton(&mut x) <= 1e-14 {
            // quadratic convergence: one more step reaches roundoff
            newton(&mut x);
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numeric(format!(
            "GLL Newton iteration did not converge for N={n}"
        )));
    }

    // exact symmetry and endpoints
    x[0] = -1.0;
    x[n] = 1.0;
    for i in 0..=n / 2 {
        let v = 0.5 * (x[n - i] - x[i]);
        x[i] = -v;
        x[n - i] = v;
    }
    if n % 2 == 0 {
        x[n / 2] = 0.0;
    }

    let pn: Vec<f64> = x.iter().map(|&xi| legendre_pair(n, xi).1).collect();
    let weights: Vec<f64> = pn
        .iter()
        .map(|&p| 2.0 / (nf * (nf + 1.0) * p * p))
        .collect();

    let m = n + 1;
    let mut deriv = vec![0.0; m * m];
    for i in 0..m {
        let mut row_sum = 0.0;
        for j in 0..m {
            if i != j {
                let d = pn[i] / pn[j] / (x[i] - x[j]);
                deriv[i * m + j] = d;
                row_sum += d;
            }
        }
        // negative-sum diagonal makes D * 1 vanish to roundoff
        deriv[i * m + i] = -row_sum;
    }

    Ok(GllBasis {
        degree: n,
        nodes: x,
        weights,
        deriv,
    })
}

impl GllBasis {
    pub fn points(&self) -> usize {
        self.degree + 1
    }
}
