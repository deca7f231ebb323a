use super::policy::{CgConfig, PrecisionPolicy, PreconditionerKind};
use super::precond::Preconditioner;
use super::report::RunReport;
use super::stagnation::detect_stagnation;
use crate::arith::{Contexts, Section};
use crate::error::{contract, Error, Result};
use crate::gs::{global_sum, GsPlan};
use crate::scalar::{Precision, Real};
use crate::sem::{
    add2s1, add2s2, ax_apply, glsc3_local, jacobi_diagonal, BoxMesh, Field, LocalOperator,
};

/// Everything `pcg_solve` needs besides the right-hand side.
#[derive(Debug, Clone, Copy)]
pub struct SolveSetup<'a> {
    pub mesh: &'a BoxMesh,
    pub plan: &'a GsPlan,
    pub preconditioner: PreconditionerKind,
    pub policy: PrecisionPolicy,
    pub cg: CgConfig,
}

/// Preconditioned CG in the kernel decomposition
/// `solveM, glsc3, add2s1, ax, glsc3, add2s2, add2s2, glsc3`.
///
/// Vectors live at `policy.solver_ops`; the scalars `rho`, `beta`, `alpha`
/// and `pap` are carried in binary64. Each kernel runs under its section's
/// context from `ctxs`. The solve stops on `sqrt(rtr) <= tol`, on
/// stagnation of `sqrt(rtr)`, on a non-finite scalar, or after `max_iter`.
/// A nonpositive `pap` aborts with [`Error::NotSpd`].
pub fn pcg_solve(
    setup: &SolveSetup<'_>,
    rhs: &Field<f64>,
    ctxs: &mut Contexts,
) -> Result<RunReport> {
    let report = pcg_trace(setup, rhs, ctxs)?;
    match report.not_spd_at {
        Some(iteration) => Err(Error::NotSpd {
            pap: *report.pap_history.last().unwrap_or(&f64::NAN),
            iteration,
        }),
        None => Ok(report),
    }
}

/// Same as [`pcg_solve`], but a nonpositive `pap` ends the solve with
/// `not_spd_at` set instead of an error, keeping the history.
pub fn pcg_trace(
    setup: &SolveSetup<'_>,
    rhs: &Field<f64>,
    ctxs: &mut Contexts,
) -> Result<RunReport> {
    setup.policy.validate()?;
    setup.policy.check_plan(setup.plan)?;
    setup.cg.validate()?;
    contract(rhs.matches(setup.mesh), || {
        "right-hand side does not match the mesh"
    })?;
    contract(setup.plan.local_len() == setup.mesh.local_len(), || {
        "gather-scatter plan does not match the mesh"
    })?;
    let precond = match setup.preconditioner {
        PreconditionerKind::Identity => Preconditioner::identity(),
        kind => Preconditioner::new(kind, &jacobi_diagonal(setup.mesh)?, &setup.policy)?,
    };
    match setup.policy.solver_ops {
        Precision::Fp32 => run::<f32>(setup, &precond, rhs, ctxs),
        Precision::Fp64 => run::<f64>(setup, &precond, rhs, ctxs),
    }
}

fn run<T: Real>(
    setup: &SolveSetup<'_>,
    precond: &Preconditioner,
    rhs: &Field<f64>,
    ctxs: &mut Contexts,
) -> Result<RunReport> {
    let SolveSetup {
        mesh,
        plan,
        policy,
        cg,
        ..
    } = *setup;
    let op = LocalOperator::<T>::new(mesh);
    let c = op.weights().to_vec();
    let ranges = plan.rank_ranges();
    let n = mesh.local_len();

    let dot = |a: &[T], b: &[T], ctxs: &mut Contexts| -> Result<f64> {
        let ctx = ctxs.get(Section::Glsc3);
        let partials = glsc3_local(a, &c, b, &ranges, policy.local_dot, ctx)?;
        global_sum(&partials, plan.mode(), policy.global_reduce, ctx)
    };

    let mut x = vec![T::zero(); n];
    let mut r: Vec<T> = rhs.as_slice().iter().map(|&v| T::narrow(v)).collect();
    let mut z = vec![T::zero(); n];
    let mut p = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];

    let mut report = RunReport {
        iterations: 0,
        converged: false,
        stagnated: false,
        breakdown: false,
        not_spd_at: None,
        final_residual: f64::NAN,
        residual_history: Vec::new(),
        rho_history: Vec::new(),
        beta_history: Vec::new(),
        pap_history: Vec::new(),
        flop_tallies: Default::default(),
        policy,
        preconditioner: precond.kind(),
        cg,
        ranks: plan.ranks(),
        gs_mode: plan.mode(),
        seed: ctxs.get(Section::Init).seed(),
        sample_index: ctxs.get(Section::Init).sample_index(),
        solution: Vec::new(),
    };
    let mut norms: Vec<f64> = Vec::new();
    let mut record = |report: &mut RunReport, rtr: f64| {
        report.residual_history.push(rtr);
        norms.push(rtr.sqrt());
        report.final_residual = rtr.sqrt();
        if !rtr.is_finite() {
            report.breakdown = true;
        } else if rtr.sqrt() <= cg.tol {
            report.converged = true;
        } else if detect_stagnation(&norms, cg.stagnation_window, cg.stagnation_factor) {
            report.stagnated = true;
        }
        report.breakdown || report.converged || report.stagnated
    };

    let rtr = dot(&r, &r, ctxs)?;
    let mut done = record(&mut report, rtr);
    let mut rho_old = 1.0f64;
    while !done && report.iterations < cg.max_iter {
        let it = report.iterations + 1;
        precond.apply(&mut z, &r, ctxs.get(Section::Precond))?;
        let rho = dot(&r, &z, ctxs)?;
        let beta = if it == 1 { 0.0 } else { rho / rho_old };
        rho_old = rho;
        report.rho_history.push(rho);
        report.beta_history.push(beta);
        add2s1(&mut p, &z, T::narrow(beta), ctxs.get(Section::Add2s1))?;
        let (ax, gs) = ctxs.pair(Section::Ax, Section::Gs);
        ax_apply(&mut w, &p, &op, plan, ax, gs)?;
        let pap = dot(&w, &p, ctxs)?;
        report.pap_history.push(pap);
        if !(rho.is_finite() && pap.is_finite()) {
            report.iterations = it;
            report.breakdown = true;
            break;
        }
        if pap <= 0.0 {
            report.iterations = it;
            report.not_spd_at = Some(it);
            break;
        }
        let alpha = rho / pap;
        let ctx = ctxs.get(Section::Add2s2);
        add2s2(&mut x, &p, T::narrow(alpha), ctx)?;
        add2s2(&mut r, &w, T::narrow(-alpha), ctx)?;
        let rtr = dot(&r, &r, ctxs)?;
        report.iterations = it;
        done = record(&mut report, rtr);
    }
    report.flop_tallies = ctxs.tallies();
    report.solution = x.iter().map(|v| v.widen()).collect();
    Ok(report)
}
