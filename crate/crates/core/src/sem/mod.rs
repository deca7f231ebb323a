//! Spectral-element discretization of the Poisson problem on a box.

mod basis;
mod field;
mod glsc3;
mod kernels;
mod mesh;
mod operator;

pub use basis::{basis_setup, GllBasis, MAX_DEGREE};
pub use field::Field;
pub use glsc3::{glsc3_local, DotMode};
pub use kernels::{add2, add2s1, add2s2, col2, local_grad3, local_grad3_t, mxm};
pub use mesh::{BoxMesh, MeshSpec};
pub use operator::{
    assemble_f64, ax_apply, build_problem, jacobi_diagonal, manufactured_solution, LocalOperator,
    Problem,
};
