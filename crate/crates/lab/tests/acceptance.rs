//! Acceptance suite. Runs every criterion and prints one PASS/FAIL line each.
//! With `ACCEPTANCE_STRICT=1` the process exits nonzero if any criterion fails.

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use precilab::cmd;
use precilab::config::{McaMode, NamedPolicy, PolicySpec, Scope};
use precilab::{gain, metrics, ExperimentConfig, Outcome};
use precilab_core::arith::round_vprec;
use precilab_core::eft::{two_prod, two_sum};
use precilab_core::exact::Dyadic;
use precilab_core::gs::gather_scatter;
use precilab_core::sem::{ax_apply, build_problem, manufactured_solution, LocalOperator};
use precilab_core::{
    pcg_solve, ArithmeticContext, BoxMesh, CgConfig, Contexts, GsMode, GsPlan, MeshSpec, Precision,
    PrecisionFormat, PrecisionPolicy, PreconditionerKind, Section, SolveSetup,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn e64_n7() -> MeshSpec {
    MeshSpec::cube(4, 7)
}

fn base_config(mesh: MeshSpec, ranks: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.mesh = mesh;
    cfg.ranks = ranks;
    cfg.cg = CgConfig::default();
    cfg
}

// 1: two_sum and two_prod reconstruct the exact result.
fn eft_exactness() -> Verdict {
    const N: usize = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut draw = |span: i32| -> f64 {
        let m: f64 = rng.random_range(1.0..2.0);
        let s = if rng.random::<bool>() { -1.0 } else { 1.0 };
        s * m * 2f64.powi(rng.random_range(-span..=span))
    };
    let (mut sum_fail, mut prod_fail) = (0usize, 0usize);
    for _ in 0..N {
        let (a, b) = (draw(60), draw(60));
        let (s, e) = two_sum(a, b);
        if Dyadic::from_f64(s) + Dyadic::from_f64(e) != Dyadic::from_f64(a) + Dyadic::from_f64(b) {
            sum_fail += 1;
        }
        let (a, b) = (draw(400), draw(400));
        let (p, e) = two_prod(a, b);
        if Dyadic::from_f64(p) + Dyadic::from_f64(e) != Dyadic::from_f64(a) * Dyadic::from_f64(b) {
            prod_fail += 1;
        }
    }
    verdict(
        sum_fail == 0 && prod_fail == 0,
        format!("{N} pairs each: two_sum failures {sum_fail}, two_prod failures {prod_fail}"),
    )
}

// 2: VPREC single equals native binary32 conversion.
fn vprec_fidelity() -> Verdict {
    const N: usize = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut mismatches = 0usize;
    let mut classes = [0usize; 5];
    for i in 0..N {
        let class = i % 5;
        let x: f64 = match class {
            // normals with a random binary64 tail
            0 => {
                let m: f64 = rng.random_range(1.0..2.0);
                m * 2f64.powi(rng.random_range(-126..=127))
            }
            // subnormal range and below
            1 => rng.random_range(0.0..1.0) * 2f64.powi(rng.random_range(-152..=-126)),
            // around and beyond the largest finite value
            2 => rng.random_range(0.99..1.01) * f32::MAX as f64 * rng.random_range(0.5..4.0),
            // exact halfway points between neighbouring binary32 values
            3 => {
                let bits: u32 = rng.random_range(0..0x7f7f_ffff);
                let lo = f32::from_bits(bits) as f64;
                let hi = f32::from_bits(bits + 1) as f64;
                lo + (hi - lo) / 2.0
            }
            // raw binary64 patterns
            _ => f64::from_bits(rng.random::<u64>()),
        };
        let x = if rng.random::<bool>() { -x } else { x };
        classes[class] += 1;
        let got = round_vprec(x, PrecisionFormat::SINGLE);
        let want = x as f32 as f64;
        let same = got.to_bits() == want.to_bits() || (got.is_nan() && want.is_nan());
        if !same {
            mismatches += 1;
        }
    }
    verdict(
        mismatches == 0,
        format!(
            "{N} samples (normals, subnormals, overflow, ties, raw bits): {mismatches} mismatches"
        ),
    )
}

fn dense_stiffness(mesh: &BoxMesh) -> DMatrix<f64> {
    let n = mesh.points_per_axis();
    let npe = n * n * n;
    let w = &mesh.basis.weights;
    let d = |i: usize, j: usize| mesh.basis.deriv[i * n + j];
    let a1 = DMatrix::from_fn(n, n, |i, j| {
        (0..n).map(|l| w[l] * d(l, i) * d(l, j)).sum::<f64>()
    });
    let s = mesh.spec;
    let h = [
        mesh.extent[0] / s.ex as f64,
        mesh.extent[1] / s.ey as f64,
        mesh.extent[2] / s.ez as f64,
    ];
    let jac = h[0] * h[1] * h[2] / 8.0;
    let sc: Vec<f64> = h.iter().map(|hd| jac * (2.0 / hd).powi(2)).collect();
    let mut k = DMatrix::zeros(mesh.n_global, mesh.n_global);
    for e in 0..s.elements() {
        for a in 0..npe {
            let (i, j, kk) = (a % n, (a / n) % n, a / (n * n));
            let ga = mesh.global_ids[e * npe + a];
            for b in 0..npe {
                let (i2, j2, k2) = (b % n, (b / n) % n, b / (n * n));
                let mut v = 0.0;
                if j == j2 && kk == k2 {
                    v += sc[0] * a1[(i, i2)] * w[j] * w[kk];
                }
                if i == i2 && kk == k2 {
                    v += sc[1] * a1[(j, j2)] * w[i] * w[kk];
                }
                if i == i2 && j == j2 {
                    v += sc[2] * a1[(kk, k2)] * w[i] * w[j];
                }
                k[(ga, mesh.global_ids[e * npe + b])] += v;
            }
        }
    }
    k
}

fn one_copy(mesh: &BoxMesh, local: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; mesh.n_global];
    for (l, &g) in mesh.global_ids.iter().enumerate() {
        out[g] = local[l];
    }
    out
}

fn interior(mesh: &BoxMesh) -> Vec<usize> {
    let mut free = vec![false; mesh.n_global];
    for (l, &g) in mesh.global_ids.iter().enumerate() {
        free[g] |= mesh.mask[l] != 0.0;
    }
    (0..mesh.n_global).filter(|&g| free[g]).collect()
}

fn interpolant_residual(degree: usize) -> f64 {
    let mesh = BoxMesh::new(MeshSpec::cube(2, degree)).unwrap();
    let prob = build_problem(&mesh, false, &mut ArithmeticContext::ieee(Section::Init)).unwrap();
    let u: Vec<f64> = (0..mesh.local_len())
        .map(|l| manufactured_solution(mesh.coords(l)) * mesh.mask[l])
        .collect();
    let plan = GsPlan::build(&mesh, 1, GsMode::Sequential, Precision::Fp64).unwrap();
    let mut au = vec![0.0; u.len()];
    ax_apply(
        &mut au,
        &u,
        &LocalOperator::new(&mesh),
        &plan,
        &mut ArithmeticContext::ieee(Section::Ax),
        &mut ArithmeticContext::ieee(Section::Gs),
    )
    .unwrap();
    let r: Vec<f64> = au
        .iter()
        .zip(prob.rhs.as_slice())
        .map(|(a, b)| a - b)
        .collect();
    one_copy(&mesh, &r)
        .iter()
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
}

// 3: PCG against a dense direct solve, and spectral decay of the residual.
fn discretization() -> Verdict {
    let mesh = BoxMesh::new(MeshSpec::cube(2, 4)).unwrap();
    let prob = build_problem(&mesh, false, &mut ArithmeticContext::ieee(Section::Init)).unwrap();
    let plan = GsPlan::build(&mesh, 1, GsMode::Sequential, Precision::Fp64).unwrap();
    let setup = SolveSetup {
        mesh: &mesh,
        plan: &plan,
        preconditioner: PreconditionerKind::Jacobi,
        policy: PrecisionPolicy::all_fp64(),
        cg: CgConfig::default(),
    };
    let rep = pcg_solve(&setup, &prob.rhs, &mut Contexts::ieee()).unwrap();
    let idx = interior(&mesh);
    let k = dense_stiffness(&mesh);
    let kr = DMatrix::from_fn(idx.len(), idx.len(), |i, j| k[(idx[i], idx[j])]);
    let b = one_copy(&mesh, prob.rhs.as_slice());
    let br = DVector::from_iterator(idx.len(), idx.iter().map(|&g| b[g]));
    let direct = kr.cholesky().unwrap().solve(&br);
    let x = one_copy(&mesh, &rep.solution);
    let xr = DVector::from_iterator(idx.len(), idx.iter().map(|&g| x[g]));
    let rel = (&xr - &direct).norm() / direct.norm();
    let (r4, r8) = (interpolant_residual(4), interpolant_residual(8));
    verdict(
        rep.converged && rel <= 1e-8 && r4 >= 10.0 * r8,
        format!(
            "PCG vs Cholesky relative L2 {rel:.2e} after {} iterations; interpolant residual N=4 {r4:.2e}, N=8 {r8:.2e} (ratio {:.1})",
            rep.iterations,
            r4 / r8
        ),
    )
}

// 4: strategy matrix on E=512, N=7, R=8.
fn strategy_matrix() -> Verdict {
    let cfg = base_config(MeshSpec::cube(8, 7), 8);
    let rows = cmd::strategy_matrix(&cfg).unwrap();
    let find = |label: &str| {
        rows.iter()
            .find(|r| r.gso_precision == label && r.ops == "fp32")
    };
    let hi = rows.iter().find(|r| r.ops == "fp64").unwrap();
    let all32 = find("fp32+fp32").unwrap();
    let mixed = find("fp64+fp64").unwrap();
    let dot2 = find("fp32+dot2").unwrap();
    let a = all32.outcome == Some(Outcome::Stagnates) && all32.final_residual > 1e-8;
    let ratio = mixed.iterations as f64 / hi.iterations as f64;
    let b = mixed.outcome == Some(Outcome::Converges) && (0.9..=1.1).contains(&ratio);
    let c = dot2.outcome == Some(Outcome::Stagnates);
    let show = |r: &cmd::StrategyRow| {
        format!(
            "{} after {} it, final {:.2e}",
            r.outcome.map_or("error", Outcome::as_str),
            r.iterations,
            r.final_residual
        )
    };
    verdict(
        a && b && c,
        format!(
            "fp64 {}; (a) {} [{}] (b) {} [{}, ratio {ratio:.2}] (c) {} [{}]",
            show(hi),
            if a { "ok" } else { "FAIL" },
            show(all32),
            if b { "ok" } else { "FAIL" },
            show(mixed),
            if c { "ok" } else { "FAIL" },
            show(dot2),
        ),
    )
}

// 5: VPREC sweep plateau with CG-only instrumentation.
fn sweep_plateau() -> Verdict {
    let mut cfg = base_config(e64_n7(), 1);
    cfg.sweep.scope = Scope::CgOnly;
    let res = cmd::vprec_sweep(&cfg).unwrap();
    let at = |t: u32| res.rows.iter().find(|r| r.t == t).unwrap();
    let r52 = at(52).final_residual;
    let off: Vec<String> = res
        .rows
        .iter()
        .filter(|r| r.t >= 10 && !(r.final_residual <= 10.0 * r52))
        .map(|r| format!("t={} {:.1e}", r.t, r.final_residual))
        .collect();
    let r4 = at(4).final_residual;
    let low = r4 >= 1e3 * r52;
    verdict(
        off.is_empty() && low,
        format!(
            "t=52 {r52:.2e}; t=4 {r4:.2e} (ratio {:.1e}); rows with t>=10 outside 10x: {}",
            r4 / r52,
            if off.is_empty() {
                "none".to_string()
            } else {
                off.join(", ")
            }
        ),
    )
}

// 6: MCA sensitivity.
fn mca_sensitivity() -> Verdict {
    let mut rr = base_config(e64_n7(), 1);
    rr.samples = 20;
    rr.mca.mode = McaMode::Rr;
    rr.mca.t = 23;
    rr.mca.scope = Scope::CgOnly;
    let rr_res = cmd::mca_sample(&rr).unwrap();
    let mut full = rr.clone();
    full.mca.mode = McaMode::Mca;
    full.mca.scope = Scope::Whole;
    full.sensitive_init = true;
    let full_res = cmd::mca_sample(&full).unwrap();

    let converged = rr_res
        .samples
        .iter()
        .filter(|s| s.outcome == Some(Outcome::Converges))
        .count();
    let ratio = rr_res.final_ratio();
    let a = rr_res.all_converged() && ratio <= 10.0;
    let w_rr = rr_res.envelope.get(10).map_or(f64::NAN, |r| r.width());
    let w_full = full_res.envelope.get(10).map_or(f64::NAN, |r| r.width());
    let b = w_full >= 1e3 * w_rr;
    let outcomes: Vec<String> = rr_res
        .samples
        .iter()
        .filter(|s| s.outcome != Some(Outcome::Converges))
        .map(|s| {
            format!(
                "{}@{}",
                s.outcome.map_or("error", Outcome::as_str),
                s.iterations
            )
        })
        .collect();
    verdict(
        a && b,
        format!(
            "RR: {converged}/20 converged, final max/min {ratio:.2e} {}; iteration-10 width sensitive MCA {w_full:.2e} vs RR {w_rr:.2e} (ratio {:.1e})",
            if outcomes.is_empty() { String::new() } else { format!("[{}]", outcomes.join(" ")) },
            w_full / w_rr
        ),
    )
}

// 7: dot2 crossover in binary32.
fn dot2_crossover() -> Verdict {
    let cfg = ExperimentConfig::default();
    let res = cmd::dot2_bench(&cfg).unwrap();
    let u = 2f64.powi(-23);
    let worst_low = res
        .rows
        .iter()
        .filter(|r| r.cond <= 1e6)
        .map(|r| r.relerr_dot2)
        .fold(0.0, f64::max);
    let plain_high = res
        .rows
        .iter()
        .filter(|r| r.cond >= 1e12)
        .map(|r| r.relerr_plain)
        .fold(f64::INFINITY, f64::min);
    let has_high = res.rows.iter().any(|r| r.cond >= 1e12);
    let crossover = res.breakdown_cond(100.0 * u);
    let in_band = crossover.is_some_and(|c| (1e6..=1e10).contains(&c));
    verdict(
        worst_low <= 32.0 * u && has_high && plain_high >= 1.0 && in_band,
        format!(
            "max dot2 relerr for cond<=1e6 {:.1} u; min plain relerr for cond>=1e12 {plain_high:.2e}; dot2 breakdown at cond {}",
            worst_low / u,
            crossover.map_or("none".into(), |c| format!("{c:.2e}"))
        ),
    )
}

// 8: metric formulas.
fn metric_formulas() -> Verdict {
    let h = [1.0, 0.3, 2e-3, 5e-7, 1e-11];
    let m = metrics(&h, &h, None).unwrap();
    let g = gain(2.634, 1.630);
    let zero = m.mae == 0.0 && m.ae_history.iter().all(|&a| a == 0.0);
    verdict(
        zero && (g - 38.1).abs() <= 0.05,
        format!(
            "MAE of identical histories {}; Gain(2.634, 1.630) = {g:.3}%",
            m.mae
        ),
    )
}

fn snapshot(paths: &[std::path::PathBuf]) -> Vec<(String, Vec<u8>)> {
    paths
        .iter()
        .map(|p| (p.display().to_string(), std::fs::read(p).unwrap()))
        .collect()
}

// 9: byte-identical artifacts across repeated runs.
fn determinism(dir: &Path) -> Verdict {
    let mut cfg = base_config(MeshSpec::cube(2, 4), 4);
    cfg.output.dir = dir.to_path_buf();
    cfg.samples = 4;
    cfg.seed = 2024;
    cfg.policy = PolicySpec::Named(NamedPolicy::Fp32Dot2);
    cfg.sweep.t_min = 8;
    cfg.sweep.t_max = 24;
    cfg.mca.mode = McaMode::Mca;
    cfg.mca.scope = Scope::Whole;
    cfg.sensitive_init = true;
    let run = |cfg: &ExperimentConfig| {
        let mut w = Vec::new();
        w.extend(cmd::cmd_solve(cfg).unwrap().1);
        w.extend(cmd::cmd_vprec_sweep(cfg).unwrap().1);
        w.extend(cmd::cmd_mca_sample(cfg).unwrap().1);
        w.extend(cmd::cmd_strategy_matrix(cfg).unwrap().1);
        w.extend(cmd::cmd_dot2_bench(cfg).unwrap().1);
        w.extend(cmd::cmd_prune(cfg).unwrap().1);
        w.extend(cmd::cmd_intensity(cfg).unwrap().1);
        snapshot(&w)
    };
    let first = run(&cfg);
    let second = run(&cfg);
    let differing: Vec<&str> = first
        .iter()
        .zip(&second)
        .filter(|(a, b)| a != b)
        .map(|(a, _)| a.0.as_str())
        .collect();
    verdict(
        first.len() == second.len() && differing.is_empty(),
        format!(
            "{} artifacts from 7 commands; differing: {}",
            first.len(),
            if differing.is_empty() {
                "none".into()
            } else {
                differing.join(", ")
            }
        ),
    )
}

// 10: gather-scatter on integer fields.
fn gs_conservation() -> Verdict {
    let mesh = BoxMesh::new(MeshSpec {
        ex: 4,
        ey: 3,
        ez: 2,
        degree: 5,
    })
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let vals: Vec<f64> = (0..mesh.local_len())
        .map(|_| rng.random_range(-1000..=1000) as f64)
        .collect();
    let gs = |f: &mut Vec<f64>, plan: &GsPlan| {
        gather_scatter(f, plan, &mut ArithmeticContext::ieee(Section::Gs)).unwrap()
    };
    let mut reference: Option<Vec<f64>> = None;
    let (mut mode_mismatch, mut not_idempotent, mut runs) = (0, 0, 0);
    for ranks in [1, 5, 24] {
        for mode in GsMode::ALL {
            for acc in [Precision::Fp32, Precision::Fp64] {
                runs += 1;
                let plan = GsPlan::build(&mesh, ranks, mode, acc).unwrap();
                let mut once = vals.clone();
                gs(&mut once, &plan);
                let mut narrow: Vec<f32> = vals.iter().map(|&v| v as f32).collect();
                gather_scatter(
                    &mut narrow,
                    &plan,
                    &mut ArithmeticContext::ieee(Section::Gs),
                )
                .unwrap();
                if narrow.iter().zip(&once).any(|(&a, &b)| a as f64 != b) {
                    mode_mismatch += 1;
                }
                match &reference {
                    None => reference = Some(once.clone()),
                    Some(r) if *r != once => mode_mismatch += 1,
                    _ => {}
                }
                let mut twice: Vec<f64> = once
                    .iter()
                    .zip(&mesh.mult_weights)
                    .map(|(v, c)| v * c)
                    .collect();
                gs(&mut twice, &plan);
                if twice != once {
                    not_idempotent += 1;
                }
            }
        }
    }
    let r = reference.unwrap();
    let conserved = vals.iter().sum::<f64>()
        == r.iter()
            .zip(&mesh.mult_weights)
            .map(|(v, c)| v * c)
            .sum::<f64>();
    verdict(
        mode_mismatch == 0 && not_idempotent == 0 && conserved,
        format!(
            "{runs} (ranks, mode, precision) plans: {mode_mismatch} mismatches, {not_idempotent} non-idempotent, weighted sum conserved: {conserved}"
        ),
    )
}

fn main() -> ExitCode {
    let tmp = tempfile::tempdir().unwrap();
    let criteria: Vec<(u32, &str, Duration, Box<dyn Fn() -> Verdict + '_>)> = vec![
        (
            1,
            "EFT exactness",
            Duration::from_secs(30),
            Box::new(eft_exactness),
        ),
        (
            2,
            "VPREC fidelity",
            Duration::from_secs(10),
            Box::new(vprec_fidelity),
        ),
        (
            3,
            "discretization",
            Duration::from_secs(60),
            Box::new(discretization),
        ),
        (
            4,
            "strategy matrix",
            Duration::from_secs(600),
            Box::new(strategy_matrix),
        ),
        (
            5,
            "VPREC sweep plateau",
            Duration::from_secs(900),
            Box::new(sweep_plateau),
        ),
        (
            6,
            "MCA sensitivity",
            Duration::from_secs(1200),
            Box::new(mca_sensitivity),
        ),
        (
            7,
            "dot2 crossover",
            Duration::from_secs(60),
            Box::new(dot2_crossover),
        ),
        (
            8,
            "metric formulas",
            Duration::from_secs(1),
            Box::new(metric_formulas),
        ),
        (
            9,
            "determinism",
            Duration::from_secs(600),
            Box::new(|| determinism(tmp.path())),
        ),
        (
            10,
            "gather-scatter",
            Duration::from_secs(10),
            Box::new(gs_conservation),
        ),
    ];
    let filter: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for (id, name, limit, check) in &criteria {
        if !filter.is_empty() && !filter.contains(id) {
            continue;
        }
        let start = Instant::now();
        let v = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= *limit;
        let pass = v.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {id:>2} {} {name}: {} [{:.1} s of {} s{}]",
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            elapsed.as_secs_f64(),
            limit.as_secs(),
            if in_time { "" } else { ", too slow" }
        );
    }
    println!("acceptance: {failed} criteria failed");
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if failed == 0 || !strict {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
