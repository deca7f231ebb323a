use super::policy::{PrecisionPolicy, PreconditionerKind, SqrtMode};
use crate::arith::ArithmeticContext;
use crate::error::{contract, Error, Result};
use crate::scalar::{cast, Precision, Real};

#[derive(Debug, Clone)]
enum Diagonal {
    F32(Vec<f32>),
    F64(Vec<f64>),
}

/// Preconditioner data prepared once, at the policy's preconditioner
/// precision, before the CG loop.
#[derive(Debug, Clone)]
pub struct Preconditioner {
    kind: PreconditionerKind,
    sqrt_mode: SqrtMode,
    len: usize,
    diag: Diagonal,
}

impl Preconditioner {
    /// `diag` is the binary64 operator diagonal, stored once at the policy's
    /// preconditioner precision.
    pub fn new(kind: PreconditionerKind, diag: &[f64], policy: &PrecisionPolicy) -> Result<Self> {
        if kind != PreconditionerKind::Identity {
            if let Some(i) = diag.iter().position(|&d| !(d > 0.0 && d.is_finite())) {
                return Err(Error::Discretization(format!(
                    "preconditioner diagonal {} at entry {i}",
                    diag[i]
                )));
            }
        }
        let stored = match policy.precond_ops {
            Precision::Fp32 => Diagonal::F32(diag.iter().map(|&x| x as f32).collect()),
            Precision::Fp64 => Diagonal::F64(diag.to_vec()),
        };
        Ok(Self {
            kind,
            sqrt_mode: policy.sqrt_mode,
            len: diag.len(),
            diag: stored,
        })
    }

    pub fn identity() -> Self {
        Self {
            kind: PreconditionerKind::Identity,
            sqrt_mode: SqrtMode::Native,
            len: 0,
            diag: Diagonal::F64(Vec::new()),
        }
    }

    pub fn kind(&self) -> PreconditionerKind {
        self.kind
    }

    /// `z = M^-1 r`.
    pub fn apply<T: Real>(&self, z: &mut [T], r: &[T], ctx: &mut ArithmeticContext) -> Result<()> {
        contract(z.len() == r.len(), || "preconditioner length mismatch")?;
        if self.kind == PreconditionerKind::Identity {
            z.copy_from_slice(r);
            return Ok(());
        }
        contract(r.len() == self.len, || {
            "preconditioner prepared for a different mesh"
        })?;
        match &self.diag {
            Diagonal::F32(d) => self.apply_at::<T, f32>(z, r, d, ctx),
            Diagonal::F64(d) => self.apply_at::<T, f64>(z, r, d, ctx),
        }
        Ok(())
    }

    fn apply_at<T: Real, P: Real>(
        &self,
        z: &mut [T],
        r: &[T],
        d: &[P],
        ctx: &mut ArithmeticContext,
    ) {
        match (self.kind, self.sqrt_mode) {
            (PreconditionerKind::Jacobi, _) => {
                for i in 0..r.len() {
                    z[i] = cast(ctx.div(cast::<T, P>(r[i]), d[i]));
                }
            }
            (PreconditionerKind::SqrtWeightedJacobi, SqrtMode::Native) => {
                for i in 0..r.len() {
                    let s = ctx.sqrt(d[i]);
                    let q = ctx.mul(s, s);
                    let w = ctx.div(P::one(), q);
                    z[i] = cast(ctx.mul(cast::<T, P>(r[i]), w));
                }
            }
            (PreconditionerKind::SqrtWeightedJacobi, SqrtMode::PromoteFp64) => {
                for i in 0..r.len() {
                    let s = ctx.sqrt(d[i].widen());
                    let q = ctx.mul(s, s);
                    let w = P::narrow(ctx.div(1.0, q));
                    z[i] = cast(ctx.mul(cast::<T, P>(r[i]), w));
                }
            }
            (PreconditionerKind::Identity, _) => unreachable!("handled by apply"),
        }
    }
}
