//! Precision emulation and mixed-precision experiments on a spectral-element
//! conjugate-gradient solver.
//!
//! * [`arith`]: VPREC rounding and Monte Carlo arithmetic behind an
//!   instrumented [`ArithmeticContext`].
//! * [`eft`]: error-free transformations, `dot2` and size-two expansions.
//! * [`sem`]: GLL basis, box meshes and the matrix-free Poisson operator.
//! * [`gs`]: simulated multi-rank gather-scatter and global reductions.
//! * [`solver`]: PCG under a [`PrecisionPolicy`].
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases below
//! name the common instantiations.

pub mod arith;
pub mod eft;
pub mod error;
pub mod exact;
pub mod gendot;
pub mod gs;
pub mod scalar;
pub mod sem;
pub mod solver;

pub use arith::{ArithmeticContext, Backend, Contexts, PrecisionFormat, Section, SectionMap};
pub use error::{Error, Result};
pub use gs::{GsMode, GsPlan, ReducePrecision};
pub use scalar::{Precision, Real};
pub use sem::{BoxMesh, DotMode, MeshSpec};
pub use solver::{
    pcg_solve, pcg_trace, CgConfig, PrecisionPolicy, PreconditionerKind, RunReport, SolveSetup,
    SqrtMode,
};

pub type Field32 = sem::Field<f32>;
pub type Field64 = sem::Field<f64>;
pub type Expansion2F32 = eft::Expansion2<f32>;
pub type Expansion2F64 = eft::Expansion2<f64>;
pub type DotProblem32 = gendot::DotProblem<f32>;
pub type DotProblem64 = gendot::DotProblem<f64>;
pub type Partials32 = gs::Partials<f32>;
pub type Partials64 = gs::Partials<f64>;
