//! Reduced-precision and stochastic arithmetic emulation.
//!
//! Kernels route every floating-point operation through an
//! [`ArithmeticContext`]; the context's [`Backend`] decides whether the
//! operation runs natively, is rounded onto an emulated format (VPREC) or is
//! perturbed by Monte Carlo noise (random rounding or full MCA).

mod context;
mod format;
mod noise;

pub use context::{ArithmeticContext, Backend, Contexts, Op, Section, SectionMap};
pub use format::{exponent_of, ldexp, round_vprec, PrecisionFormat};
pub use noise::{inexact, noise_at, stream_key, substream};
