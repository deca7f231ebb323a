use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::format::{round_vprec, PrecisionFormat};
use super::noise::{inexact, noise_at, stream_key, substream};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Rounding/noise model applied to every instrumented operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Backend {
    /// Native IEEE arithmetic at the working precision.
    #[default]
    IeeeExact,
    /// Compute in binary64, round the result onto the emulated format.
    Vprec(PrecisionFormat),
    /// Random rounding: perturb only the result.
    McaRr { t: u32 },
    /// Full Monte Carlo arithmetic: perturb both operands and the result.
    McaFull { t: u32 },
}

impl Backend {
    pub fn validate(&self) -> Result<()> {
        match self {
            Backend::IeeeExact => Ok(()),
            Backend::Vprec(fmt) => fmt.validate(),
            Backend::McaRr { t } | Backend::McaFull { t } => {
                if (1..=52).contains(t) {
                    Ok(())
                } else {
                    Err(Error::Format(format!(
                        "virtual precision t={t} outside [1, 52]"
                    )))
                }
            }
        }
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(self, Backend::McaRr { .. } | Backend::McaFull { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Sqrt,
}

impl Op {
    #[inline(always)]
    fn native<T: Real>(self, a: T, b: T) -> T {
        match self {
            Op::Add => a + b,
            Op::Sub => a - b,
            Op::Mul => a * b,
            Op::Div => a / b,
            Op::Sqrt => a.sqrt(),
        }
    }
}

/// Instrumented kernel sections of the solver. Each section owns one
/// [`ArithmeticContext`], which is how selective instrumentation is scoped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Section {
    Init,
    Precond,
    Glsc3,
    Add2s1,
    Ax,
    Gs,
    Add2s2,
}

impl Section {
    pub const ALL: [Section; 7] = [
        Section::Init,
        Section::Precond,
        Section::Glsc3,
        Section::Add2s1,
        Section::Ax,
        Section::Gs,
        Section::Add2s2,
    ];

    /// Sections executed inside the CG iteration.
    pub const CG_LOOP: [Section; 6] = [
        Section::Precond,
        Section::Glsc3,
        Section::Add2s1,
        Section::Ax,
        Section::Gs,
        Section::Add2s2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Section::Init => "init",
            Section::Precond => "precond",
            Section::Glsc3 => "glsc3",
            Section::Add2s1 => "add2s1",
            Section::Ax => "ax",
            Section::Gs => "gs",
            Section::Add2s2 => "add2s2",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Section {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Section::ALL
            .iter()
            .copied()
            .find(|sec| sec.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown section '{s}'")))
    }
}

/// Per-section arithmetic state: backend, noise stream position and an
/// operation tally.
///
/// A context is not meant to be shared between concurrently running kernels;
/// the draw counter is the only mutable state.
#[derive(Debug, Clone)]
pub struct ArithmeticContext {
    backend: Backend,
    seed: u64,
    sample_index: u64,
    section: Section,
    key: u64,
    draws: u64,
    ops: u64,
    perturb_sqrt: bool,
}

impl ArithmeticContext {
    pub fn new(backend: Backend, seed: u64, sample_index: u64, section: Section) -> Result<Self> {
        backend.validate()?;
        Ok(Self {
            backend,
            seed,
            sample_index,
            section,
            key: substream(stream_key(seed, sample_index), section.index() as u64),
            draws: 0,
            ops: 0,
            perturb_sqrt: true,
        })
    }

    /// Native arithmetic, no noise.
    pub fn ieee(section: Section) -> Self {
        Self::new(Backend::IeeeExact, 0, 0, section).expect("IEEE backend is always valid")
    }

    /// Toggles Monte Carlo perturbation of square roots (on by default).
    pub fn with_sqrt_perturbation(mut self, on: bool) -> Self {
        self.perturb_sqrt = on;
        self
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn sample_index(&self) -> u64 {
        self.sample_index
    }
    pub fn section(&self) -> Section {
        self.section
    }
    /// Number of instrumented operations performed so far.
    pub fn ops(&self) -> u64 {
        self.ops
    }
    /// Number of noise draws consumed so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    /// Counts `n` operations executed outside `perform` (e.g. native
    /// error-free transformations).
    #[inline]
    pub fn tally(&mut self, n: u64) {
        self.ops += n;
    }

    #[inline]
    fn xi(&mut self) -> f64 {
        let v = noise_at(self.key, self.draws);
        self.draws += 1;
        v
    }

    /// Executes one binary64 operation under this context's backend.
    ///
    /// Under full MCA the noise draws are taken in the fixed order: operand
    /// `a`, operand `b`, result. `b` is ignored for `Sqrt`.
    pub fn perform(&mut self, op: Op, a: f64, b: Option<f64>) -> f64 {
        self.ops += 1;
        let b = b.unwrap_or(0.0);
        self.perform_f64(op, a, b)
    }

    #[inline]
    fn perform_f64(&mut self, op: Op, a: f64, b: f64) -> f64 {
        match self.backend {
            Backend::IeeeExact => op.native(a, b),
            Backend::Vprec(fmt) => round_vprec(op.native(a, b), fmt),
            Backend::McaRr { t } => {
                if op == Op::Sqrt && !self.perturb_sqrt {
                    return a.sqrt();
                }
                let y = op.native(a, b);
                let xi = self.xi();
                inexact(y, t, xi)
            }
            Backend::McaFull { t } => {
                if op == Op::Sqrt && !self.perturb_sqrt {
                    return a.sqrt();
                }
                let xa = self.xi();
                let a = inexact(a, t, xa);
                let b = if op == Op::Sqrt {
                    b
                } else {
                    let xb = self.xi();
                    inexact(b, t, xb)
                };
                let y = op.native(a, b);
                let xr = self.xi();
                inexact(y, t, xr)
            }
        }
    }

    #[inline(always)]
    fn binary<T: Real>(&mut self, op: Op, a: T, b: T) -> T {
        self.ops += 1;
        match self.backend {
            Backend::IeeeExact => op.native(a, b),
            _ => T::narrow(self.perform_f64(op, a.widen(), b.widen())),
        }
    }

    #[inline(always)]
    pub fn add<T: Real>(&mut self, a: T, b: T) -> T {
        self.binary(Op::Add, a, b)
    }
    #[inline(always)]
    pub fn sub<T: Real>(&mut self, a: T, b: T) -> T {
        self.binary(Op::Sub, a, b)
    }
    #[inline(always)]
    pub fn mul<T: Real>(&mut self, a: T, b: T) -> T {
        self.binary(Op::Mul, a, b)
    }
    #[inline(always)]
    pub fn div<T: Real>(&mut self, a: T, b: T) -> T {
        self.binary(Op::Div, a, b)
    }
    #[inline(always)]
    pub fn sqrt<T: Real>(&mut self, a: T) -> T {
        self.binary(Op::Sqrt, a, T::zero())
    }
}

/// Backend assignment per section: a default plus explicit overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SectionMap {
    #[serde(default)]
    pub default: Backend,
    #[serde(default)]
    pub overrides: BTreeMap<Section, Backend>,
}

impl SectionMap {
    pub fn uniform(backend: Backend) -> Self {
        Self {
            default: backend,
            overrides: BTreeMap::new(),
        }
    }

    /// `backend` on the listed sections, native arithmetic elsewhere.
    pub fn only(sections: &[Section], backend: Backend) -> Self {
        Self {
            default: Backend::IeeeExact,
            overrides: sections.iter().map(|&s| (s, backend)).collect(),
        }
    }

    /// Instrument the CG loop kernels but not initialization.
    pub fn cg_only(backend: Backend) -> Self {
        Self::only(&Section::CG_LOOP, backend)
    }

    pub fn backend_for(&self, section: Section) -> Backend {
        self.overrides
            .get(&section)
            .copied()
            .unwrap_or(self.default)
    }

    pub fn validate(&self) -> Result<()> {
        self.default.validate()?;
        self.overrides.values().try_for_each(Backend::validate)
    }

    pub fn contexts(&self, seed: u64, sample_index: u64) -> Result<Contexts> {
        let mut v = Vec::with_capacity(Section::ALL.len());
        for s in Section::ALL {
            v.push(ArithmeticContext::new(
                self.backend_for(s),
                seed,
                sample_index,
                s,
            )?);
        }
        Ok(Contexts {
            ctx: v.try_into().expect("one context per section"),
        })
    }
}

/// One context per [`Section`].
#[derive(Debug, Clone)]
pub struct Contexts {
    ctx: [ArithmeticContext; 7],
}

impl Contexts {
    pub fn ieee() -> Self {
        SectionMap::default()
            .contexts(0, 0)
            .expect("IEEE map is valid")
    }

    pub fn get(&mut self, s: Section) -> &mut ArithmeticContext {
        &mut self.ctx[s.index()]
    }

    /// Two distinct section contexts at once.
    pub fn pair(
        &mut self,
        a: Section,
        b: Section,
    ) -> (&mut ArithmeticContext, &mut ArithmeticContext) {
        assert_ne!(a, b, "sections must differ");
        let (i, j) = (a.index(), b.index());
        if i < j {
            let (lo, hi) = self.ctx.split_at_mut(j);
            (&mut lo[i], &mut hi[0])
        } else {
            let (lo, hi) = self.ctx.split_at_mut(i);
            (&mut hi[0], &mut lo[j])
        }
    }

    pub fn set_sqrt_perturbation(&mut self, on: bool) {
        for c in self.ctx.iter_mut() {
            c.perturb_sqrt = on;
        }
    }

    /// Operation counts keyed by section label.
    pub fn tallies(&self) -> BTreeMap<String, u64> {
        self.ctx
            .iter()
            .map(|c| (c.section.as_str().to_string(), c.ops))
            .collect()
    }
}
