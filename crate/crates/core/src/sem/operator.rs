use std::f64::consts::PI;

use super::field::Field;
use super::kernels::{col2, local_grad3, local_grad3_t};
use super::mesh::BoxMesh;
use crate::arith::ArithmeticContext;
use crate::error::{contract, Error, Result};
use crate::gs::{gather_scatter, GsPlan};
use crate::scalar::Real;

/// Mesh data needed by `ax_apply`, cast once to the working precision.
#[derive(Debug, Clone)]
pub struct LocalOperator<T> {
    n: usize,
    /// Column-major D and its transpose.
    d: Vec<T>,
    dt: Vec<T>,
    g: [Vec<T>; 3],
    mask: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> LocalOperator<T> {
    pub fn new(mesh: &BoxMesh) -> Self {
        let n = mesh.points_per_axis();
        let rm = &mesh.basis.deriv;
        let mut d = vec![T::zero(); n * n];
        let mut dt = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                d[i + n * j] = T::narrow(rm[i * n + j]);
                dt[j + n * i] = T::narrow(rm[i * n + j]);
            }
        }
        let down = |v: &[f64]| v.iter().map(|&x| T::narrow(x)).collect::<Vec<T>>();
        Self {
            n,
            d,
            dt,
            g: [down(&mesh.g[0]), down(&mesh.g[1]), down(&mesh.g[2])],
            mask: down(&mesh.mask),
            weights: down(&mesh.mult_weights),
        }
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }
    pub fn local_len(&self) -> usize {
        self.mask.len()
    }
    /// Inverse-multiplicity weights `c`.
    pub fn weights(&self) -> &[T] {
        &self.weights
    }
    pub fn mask(&self) -> &[T] {
        &self.mask
    }
}

/// `w = A p`: per-element gradient, metric scaling and transposed gradient
/// under `ax`, then gather-scatter under `gs`, then the Dirichlet mask.
pub fn ax_apply<T: Real>(
    w: &mut [T],
    p: &[T],
    op: &LocalOperator<T>,
    plan: &GsPlan,
    ax: &mut ArithmeticContext,
    gs: &mut ArithmeticContext,
) -> Result<()> {
    let nl = op.local_len();
    contract(p.len() == nl && w.len() == nl, || {
        format!(
            "ax_apply field lengths {} / {} do not match operator ({nl})",
            p.len(),
            w.len()
        )
    })?;
    contract(plan.local_len() == nl, || {
        "gather-scatter plan does not match the mesh"
    })?;
    let n = op.n;
    let npe = n * n * n;
    let mut ur = vec![T::zero(); npe];
    let mut us = vec![T::zero(); npe];
    let mut ut = vec![T::zero(); npe];
    let mut tmp = vec![T::zero(); npe];
    for e in 0..nl / npe {
        let s = e * npe..(e + 1) * npe;
        local_grad3(
            &p[s.clone()],
            &op.d,
            &op.dt,
            n,
            &mut ur,
            &mut us,
            &mut ut,
            ax,
        )?;
        col2(&mut ur, &op.g[0][s.clone()], ax);
        col2(&mut us, &op.g[1][s.clone()], ax);
        col2(&mut ut, &op.g[2][s.clone()], ax);
        local_grad3_t(&ur, &us, &ut, &op.d, &op.dt, n, &mut w[s], &mut tmp, ax)?;
    }
    gather_scatter(w, plan, gs)?;
    for (wi, &m) in w.iter_mut().zip(&op.mask) {
        *wi = *wi * m;
    }
    Ok(())
}

/// Sums every global dof's local copies in increasing local order (binary64)
/// and writes the total back to each copy.
pub fn assemble_f64(mesh: &BoxMesh, v: &mut [f64]) {
    let mut acc = vec![0.0; mesh.n_global];
    for (l, &g) in mesh.global_ids.iter().enumerate() {
        acc[g] += v[l];
    }
    for (l, &g) in mesh.global_ids.iter().enumerate() {
        v[l] = acc[g];
    }
}

/// Diagonal of the assembled operator in binary64, from the analytic element
/// diagonal `sum_l D(l,i)^2 g_r(l,j,k) + ...`.
pub fn jacobi_diagonal(mesh: &BoxMesh) -> Result<Vec<f64>> {
    let n = mesh.points_per_axis();
    let npe = n * n * n;
    let dm = &mesh.basis.deriv;
    let d2 = |l: usize, i: usize| dm[l * n + i] * dm[l * n + i];
    let mut diag = vec![0.0; mesh.local_len()];
    for e in 0..mesh.elements() {
        let base = e * npe;
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    let mut s = 0.0;
                    for l in 0..n {
                        s += d2(l, i) * mesh.g[0][base + l + n * (j + n * k)];
                        s += d2(l, j) * mesh.g[1][base + i + n * (l + n * k)];
                        s += d2(l, k) * mesh.g[2][base + i + n * (j + n * l)];
                    }
                    diag[base + i + n * (j + n * k)] = s;
                }
            }
        }
    }
    assemble_f64(mesh, &mut diag);
    if let Some(l) = diag
        .iter()
        .zip(&mesh.mask)
        .position(|(&d, &m)| m != 0.0 && !(d > 0.0))
    {
        return Err(Error::Discretization(format!(
            "nonpositive diagonal {} at local dof {l}",
            diag[l]
        )));
    }
    Ok(diag)
}

/// Manufactured solution `sin(pi x) sin(pi y) sin(pi z)`.
pub fn manufactured_solution(x: [f64; 3]) -> f64 {
    (PI * x[0]).sin() * (PI * x[1]).sin() * (PI * x[2]).sin()
}

/// Right-hand side and nodal reference solution of the Poisson test problem.
#[derive(Debug, Clone)]
pub struct Problem {
    pub rhs: Field<f64>,
    pub reference: Field<f64>,
}

/// Weak-form load of `-lap u = 3 pi^2 u*` with homogeneous Dirichlet data,
/// computed in binary64 through the `init` context.
///
/// With `sensitive` the source is evaluated as `(1e9 cos x + f) - 1e9 cos x`,
/// which is harmless in binary64 and destroys `f` at low virtual precision.
pub fn build_problem(
    mesh: &BoxMesh,
    sensitive: bool,
    init: &mut ArithmeticContext,
) -> Result<Problem> {
    if !mesh.is_unit_cube() {
        return Err(Error::UnsupportedDomain(format!(
            "manufactured problem needs the unit cube, got {:?}",
            mesh.extent
        )));
    }
    let nl = mesh.local_len();
    let mut reference = vec![0.0; nl];
    let mut rhs = vec![0.0; nl];
    let scale = 3.0 * PI * PI;
    for l in 0..nl {
        let x = mesh.coords(l);
        let u = manufactured_solution(x);
        reference[l] = u;
        let mut f = init.mul(scale, u);
        if sensitive {
            let big = init.mul(1.0e9, x[0].cos());
            let t = init.add(big, f);
            f = init.sub(t, big);
        }
        rhs[l] = init.mul(f, mesh.mass[l]);
    }
    assemble_f64(mesh, &mut rhs);
    for (r, &m) in rhs.iter_mut().zip(&mesh.mask) {
        *r *= m;
    }
    Ok(Problem {
        rhs: Field::from_vec(mesh, rhs)?,
        reference: Field::from_vec(mesh, reference)?,
    })
}
