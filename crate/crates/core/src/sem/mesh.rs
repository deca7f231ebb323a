use serde::{Deserialize, Serialize};

use super::basis::{basis_setup, GllBasis};
use crate::error::{contract, Result};

/// Element counts and polynomial degree of a box mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    pub ex: usize,
    pub ey: usize,
    pub ez: usize,
    pub degree: usize,
}

impl MeshSpec {
    pub fn cube(per_axis: usize, degree: usize) -> Self {
        Self {
            ex: per_axis,
            ey: per_axis,
            ez: per_axis,
            degree,
        }
    }

    pub fn elements(&self) -> usize {
        self.ex * self.ey * self.ez
    }
}

/// Spectral-element discretization of an axis-aligned box with affine
/// hexahedral elements.
///
/// Elements are numbered `ix + Ex*(iy + Ey*iz)` (z slowest) and nodes within
/// an element `i + n*(j + n*k)` with `n = N+1` (r fastest), so every
/// per-element array is a column-major `n x n x n` block.
#[derive(Debug, Clone)]
pub struct BoxMesh {
    pub spec: MeshSpec,
    pub extent: [f64; 3],
    pub basis: GllBasis,
    /// Diagonal metric terms `w_i w_j w_k |J| (2/h_d)^2` for d = r, s, t,
    /// one entry per local node.
    pub g: [Vec<f64>; 3],
    /// Mass diagonal `w_i w_j w_k |J|` per local node.
    pub mass: Vec<f64>,
    /// 0 on domain-boundary nodes, 1 elsewhere.
    pub mask: Vec<f64>,
    /// Inverse multiplicity of each local node's global dof.
    pub mult_weights: Vec<f64>,
    pub global_ids: Vec<usize>,
    pub n_global: usize,
    pub global_dims: [usize; 3],
}

impl BoxMesh {
    /// Mesh of the unit cube.
    pub fn new(spec: MeshSpec) -> Result<Self> {
        Self::with_extent(spec, [1.0, 1.0, 1.0])
    }

    pub fn with_extent(spec: MeshSpec, extent: [f64; 3]) -> Result<Self> {
        contract(spec.ex >= 1 && spec.ey >= 1 && spec.ez >= 1, || {
            "element counts must be >= 1"
        })?;
        contract(extent.iter().all(|&l| l > 0.0 && l.is_finite()), || {
            "box extent must be positive"
        })?;
        let basis = basis_setup(spec.degree)?;
        let n = basis.points();
        let npe = n * n * n;
        let ne = spec.elements();
        let nl = ne * npe;
        let nd = spec.degree;
        let dims = [spec.ex * nd + 1, spec.ey * nd + 1, spec.ez * nd + 1];

        let h = [
            extent[0] / spec.ex as f64,
            extent[1] / spec.ey as f64,
            extent[2] / spec.ez as f64,
        ];
        let jac = h[0] * h[1] * h[2] / 8.0;
        let scale = [
            (2.0 / h[0]).powi(2),
            (2.0 / h[1]).powi(2),
            (2.0 / h[2]).powi(2),
        ];

        let mut g = [vec![0.0; nl], vec![0.0; nl], vec![0.0; nl]];
        let mut mass = vec![0.0; nl];
        let mut mask = vec![1.0; nl];
        let mut global_ids = vec![0usize; nl];

        for e in 0..ne {
            let ix = e % spec.ex;
            let iy = (e / spec.ex) % spec.ey;
            let iz = e / (spec.ex * spec.ey);
            for k in 0..n {
                for j in 0..n {
                    for i in 0..n {
                        let l = e * npe + i + n * (j + n * k);
                        let w = basis.weights[i] * basis.weights[j] * basis.weights[k] * jac;
                        mass[l] = w;
                        for d in 0..3 {
                            g[d][l] = w * scale[d];
                        }
                        let gx = ix * nd + i;
                        let gy = iy * nd + j;
                        let gz = iz * nd + k;
                        global_ids[l] = gx + dims[0] * (gy + dims[1] * gz);
                        let on_boundary = gx == 0
                            || gy == 0
                            || gz == 0
                            || gx == dims[0] - 1
                            || gy == dims[1] - 1
                            || gz == dims[2] - 1;
                        if on_boundary {
                            mask[l] = 0.0;
                        }
                    }
                }
            }
        }

        let n_global = dims[0] * dims[1] * dims[2];
        let mut mult = vec![0u32; n_global];
        for &gid in &global_ids {
            mult[gid] += 1;
        }
        let mult_weights = global_ids
            .iter()
            .map(|&gid| 1.0 / mult[gid] as f64)
            .collect();

        Ok(Self {
            spec,
            extent,
            basis,
            g,
            mass,
            mask,
            mult_weights,
            global_ids,
            n_global,
            global_dims: dims,
        })
    }

    pub fn points_per_axis(&self) -> usize {
        self.basis.points()
    }

    pub fn points_per_element(&self) -> usize {
        self.points_per_axis().pow(3)
    }

    pub fn elements(&self) -> usize {
        self.spec.elements()
    }

    pub fn local_len(&self) -> usize {
        self.elements() * self.points_per_element()
    }

    pub fn is_unit_cube(&self) -> bool {
        self.extent == [1.0, 1.0, 1.0]
    }

    /// Physical coordinates of local node `l`.
    pub fn coords(&self, l: usize) -> [f64; 3] {
        let n = self.points_per_axis();
        let npe = n * n * n;
        let e = l / npe;
        let r = l % npe;
        let (i, j, k) = (r % n, (r / n) % n, r / (n * n));
        let s = &self.spec;
        let idx = [e % s.ex, (e / s.ex) % s.ey, e / (s.ex * s.ey)];
        let cnt = [s.ex, s.ey, s.ez];
        let loc = [i, j, k];
        let mut out = [0.0; 3];
        for d in 0..3 {
            let h = self.extent[d] / cnt[d] as f64;
            out[d] = (idx[d] as f64 + 0.5 * (self.basis.nodes[loc[d]] + 1.0)) * h;
        }
        out
    }

    /// Number of local copies of each global dof.
    pub fn multiplicity(&self) -> Vec<u32> {
        let mut m = vec![0u32; self.n_global];
        for &g in &self.global_ids {
            m[g] += 1;
        }
        m
    }
}
