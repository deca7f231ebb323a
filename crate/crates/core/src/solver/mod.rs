//! Precision-policy-driven preconditioned conjugate gradient.

mod cg;
mod policy;
mod precond;
mod report;
mod stagnation;

pub use cg::{pcg_solve, pcg_trace, SolveSetup};
pub use policy::{CgConfig, PrecisionPolicy, PreconditionerKind, SqrtMode};
pub use precond::Preconditioner;
pub use report::{nonfinite, RunReport};
pub use stagnation::detect_stagnation;
