use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use precilab::cmd::{self, mca::HistoryRow};
use precilab::config::{McaMode, Scope};
use precilab::output::read_csv;
use precilab::{metrics, Artifact, ExperimentConfig, Outcome};
use precilab_core::{Backend, MeshSpec, PrecisionFormat, SectionMap};
use serde_json::Value;

fn schema() -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/experiment-config.schema.json");
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn shipped_configs() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    v.sort();
    v
}

fn small(dir: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.mesh = MeshSpec::cube(2, 3);
    cfg.ranks = 2;
    cfg.samples = 3;
    cfg.seed = 11;
    cfg.sweep.t_min = 20;
    cfg.sweep.t_max = 23;
    cfg.dot2.n = 64;
    cfg.dot2.trials = 3;
    cfg.output.dir = dir.to_path_buf();
    cfg
}

#[test]
fn shipped_configs_satisfy_schema_and_parse() {
    let validator = jsonschema::validator_for(&schema()).unwrap();
    let configs = shipped_configs();
    assert!(configs.len() >= 4);
    for p in configs {
        let value: Value = serde_json::from_str(&fs::read_to_string(&p).unwrap()).unwrap();
        let errs: Vec<String> = validator
            .iter_errors(&value)
            .map(|e| e.to_string())
            .collect();
        assert!(errs.is_empty(), "{}: {errs:?}", p.display());
        ExperimentConfig::load(&p).unwrap();
    }
}

#[test]
fn serialized_default_satisfies_schema() {
    let validator = jsonschema::validator_for(&schema()).unwrap();
    let value = serde_json::to_value(ExperimentConfig::default()).unwrap();
    let errs: Vec<String> = validator
        .iter_errors(&value)
        .map(|e| e.to_string())
        .collect();
    assert!(errs.is_empty(), "{errs:?}");
}

#[test]
fn schema_and_parser_reject_the_same_typos() {
    let validator = jsonschema::validator_for(&schema()).unwrap();
    for text in [
        r#"{"mesh": {"ex": 1, "ey": 1, "ez": 1, "degree": 2, "extra": 0}}"#,
        r#"{"policy": {"solver_ops": "fp32"}}"#,
        r#"{"backends": {"overrides": {"axx": {"kind": "ieee_exact"}}}}"#,
        r#"{"backends": {"default": {"kind": "vprec", "t": 3}}}"#,
        r#"{"cg": {"tolerance": 1e-8}}"#,
        r#"{"mca": {"mode": "sr"}}"#,
    ] {
        let value: Value = serde_json::from_str(text).unwrap();
        assert!(!validator.is_valid(&value), "schema accepted {text}");
        assert!(
            ExperimentConfig::from_json(text).is_err(),
            "parser accepted {text}"
        );
    }
}

fn run_all(cfg: &ExperimentConfig) -> Vec<PathBuf> {
    let mut w = Vec::new();
    w.extend(cmd::cmd_solve(cfg).unwrap().1);
    w.extend(cmd::cmd_vprec_sweep(cfg).unwrap().1);
    w.extend(cmd::cmd_mca_sample(cfg).unwrap().1);
    w.extend(cmd::cmd_strategy_matrix(cfg).unwrap().1);
    w.extend(cmd::cmd_dot2_bench(cfg).unwrap().1);
    w.extend(cmd::cmd_prune(cfg).unwrap().1);
    w.extend(cmd::cmd_intensity(cfg).unwrap().1);
    w
}

#[test]
fn every_command_is_byte_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut cfg = small(a.path());
    cfg.policy = precilab::config::PolicySpec::Named(precilab::config::NamedPolicy::AllFp32);
    let wa = run_all(&cfg);
    cfg.output.dir = b.path().to_path_buf();
    let wb = run_all(&cfg);
    assert_eq!(wa.len(), wb.len());
    for (pa, pb) in wa.iter().zip(&wb) {
        assert_eq!(pa.file_name(), pb.file_name());
        // the config block records the output directory, so compare results only
        let (ta, tb) = (
            fs::read_to_string(pa).unwrap(),
            fs::read_to_string(pb).unwrap(),
        );
        if pa.extension().unwrap() == "json" {
            let (mut va, mut vb): (Value, Value) = (
                serde_json::from_str(&ta).unwrap(),
                serde_json::from_str(&tb).unwrap(),
            );
            va["config"]["output"] = Value::Null;
            vb["config"]["output"] = Value::Null;
            assert_eq!(va, vb, "{}", pa.display());
            assert_eq!(va["schema_version"], precilab::SCHEMA_VERSION);
        } else {
            assert_eq!(ta, tb, "{}", pa.display());
        }
    }
}

#[test]
fn solve_report_round_trips_and_reproduces_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path());
    cfg.policy = precilab::config::PolicySpec::Named(precilab::config::NamedPolicy::Fp32Dot2);
    cfg.timings = Some(precilab::config::Timings {
        t_double: 2.634,
        t_mixed: 1.63,
    });
    let (res, paths) = cmd::cmd_solve(&cfg).unwrap();
    let back: Artifact<cmd::SolveResult> = Artifact::read(&paths[0]).unwrap();
    assert_eq!(back.config, cfg);
    assert_eq!(
        back.result.report.residual_history,
        res.report.residual_history
    );
    let again = metrics(
        &back.result.report.residual_norms(),
        &back.result.baseline_residuals,
        Some((2.634, 1.63)),
    )
    .unwrap();
    assert_eq!(again, back.result.metrics);
    assert_eq!(
        again.mae.to_bits(),
        res.metrics.mae.to_bits(),
        "metric recomputed from the artifact differs"
    );

    let rows: Vec<cmd::solve::HistoryRow> = read_csv(&paths[1]).unwrap();
    assert_eq!(rows.len(), res.report.residual_history.len());
    for (row, &rtr) in rows.iter().zip(&res.report.residual_history) {
        assert_eq!(row.rtr.to_bits(), rtr.to_bits());
    }
    assert!(rows[0].beta.is_none() && rows[0].pap.is_none());
    assert_eq!(rows[1].beta, Some(0.0));
}

#[test]
fn envelope_csv_matches_dumped_histories() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path());
    cfg.mca.mode = McaMode::Mca;
    cfg.mca.scope = Scope::Whole;
    cfg.mca.t = 30;
    let (res, paths) = cmd::cmd_mca_sample(&cfg).unwrap();
    let env: Vec<cmd::EnvelopeRow> = read_csv(&paths[0]).unwrap();
    let hist: Vec<HistoryRow> = read_csv(&paths[1]).unwrap();
    let per_sample: Vec<Vec<f64>> = (0..cfg.samples as u64)
        .map(|s| {
            hist.iter()
                .filter(|h| h.sample == s)
                .map(|h| h.residual)
                .collect()
        })
        .collect();
    let refs: Vec<&[f64]> = per_sample.iter().map(Vec::as_slice).collect();
    assert_eq!(cmd::envelope(&refs), env);
    assert_eq!(env, res.envelope);
    assert_eq!(
        env.len(),
        res.samples.iter().map(|s| s.history.len()).min().unwrap()
    );
    assert!(env.iter().skip(1).any(|r| r.max > r.min));
}

#[test]
fn forced_equal_samples_collapse_the_envelope() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path());
    cfg.samples = 2;
    cfg.mca.force_equal_samples = true;
    let res = cmd::mca_sample(&cfg).unwrap();
    assert!(res
        .envelope
        .iter()
        .all(|r| r.mean == r.min && r.min == r.max));
}

#[test]
fn full_width_sweep_row_equals_native_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path());
    cfg.sweep.t_min = 50;
    cfg.sweep.t_max = 52;
    for scope in [Scope::CgOnly, Scope::Whole] {
        cfg.sweep.scope = scope;
        let res = cmd::vprec_sweep(&cfg).unwrap();
        let last = res.rows.last().unwrap();
        assert_eq!(last.t, 52);
        assert_eq!(
            last.final_residual.to_bits(),
            res.reference.final_residual.to_bits()
        );
        assert_eq!(last.iterations, res.reference.iterations);
    }
}

#[test]
fn sweep_records_failures_and_continues() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path());
    cfg.sweep.t_min = 1;
    cfg.sweep.t_max = 4;
    cfg.sweep.exponent_bits = 2;
    let res = cmd::vprec_sweep(&cfg).unwrap();
    let ts: Vec<u32> = res.rows.iter().map(|r| r.t).collect();
    assert_eq!(ts, [1, 2, 3, 4]);
    // a two-bit exponent flushes or overflows; failing rows do not stop the sweep
    assert!(res
        .rows
        .iter()
        .any(|r| matches!(r.outcome, Some(Outcome::NotSpd | Outcome::Breakdown))));
    assert_eq!(res.reference.outcome, Some(Outcome::Converges));
}

#[test]
fn strategy_classification_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path());
    cfg.mesh = MeshSpec::cube(2, 5);
    cfg.ranks = 8;
    let a = cmd::strategy_matrix(&cfg).unwrap();
    let b = cmd::strategy_matrix(&cfg).unwrap();
    assert_eq!(a.len(), 4);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!((x.outcome, x.iterations), (y.outcome, y.iterations));
    }
    assert_eq!(a[0].outcome, Some(Outcome::Converges));
    let labels: Vec<&str> = a.iter().map(|r| r.gso_precision.as_str()).collect();
    assert_eq!(labels, ["fp64+fp64", "fp32+fp32", "fp64+fp64", "fp32+dot2"]);
}

#[test]
fn prune_threshold_extremes() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path());
    cfg.samples = 2;
    cfg.prune.vprec_threshold = f64::INFINITY;
    cfg.prune.mca_width_threshold = f64::INFINITY;
    let keep_all = cmd::prune(&cfg).unwrap();
    assert_eq!(keep_all.candidates.len(), 7);

    cfg.prune.vprec_threshold = 0.0;
    cfg.prune.mca_width_threshold = 0.0;
    let keep_none = cmd::prune(&cfg).unwrap();
    for v in &keep_none.sections {
        let deviates = v.forward_error > 0.0 || v.envelope_width.is_some_and(|w| w > 1.0);
        if deviates {
            assert!(
                !keep_none.candidates.contains(&v.section),
                "{:?}",
                v.section
            );
        }
    }
}

#[test]
fn prune_drops_sensitive_initialization() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path());
    cfg.mesh = MeshSpec::cube(2, 5);
    cfg.sensitive_init = true;
    let res = cmd::prune(&cfg).unwrap();
    let init = &res.sections[0];
    assert_eq!(init.section, precilab_core::Section::Init);
    assert_eq!(init.verdict, cmd::Verdict::PrunedStage2, "{init:?}");
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_precilab"))
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");

    let st = bin().args(["solve", "--out"]).arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(0));
    assert!(out.join("solve_history.csv").exists());
    let header = fs::read_to_string(out.join("solve_history.csv")).unwrap();
    assert!(header.starts_with("iter,rtr,beta,pap\n"));

    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    let st = bin()
        .arg("--config")
        .arg(&bad)
        .arg("solve")
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(1));
    assert_eq!(
        bin().arg("no-such-command").status().unwrap().code(),
        Some(1)
    );
    assert_eq!(
        bin()
            .args(["intensity", "--kernel", "fft"])
            .status()
            .unwrap()
            .code(),
        Some(1)
    );

    // a budget too small to converge
    let tight = dir.path().join("tight.json");
    fs::write(&tight, r#"{"cg": {"max_iter": 2}}"#).unwrap();
    let st = bin()
        .arg("--config")
        .arg(&tight)
        .arg("--out")
        .arg(&out)
        .arg("solve")
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(2));

    // a two-bit exponent overflows the first reduction
    let broken = dir.path().join("broken.json");
    let fmt = PrecisionFormat::new(10, 2).unwrap();
    let map = SectionMap::cg_only(Backend::Vprec(fmt));
    let text = format!(
        r#"{{"backends": {}}}"#,
        serde_json::to_string(&map).unwrap()
    );
    fs::write(&broken, text).unwrap();
    let st = bin()
        .arg("--config")
        .arg(&broken)
        .arg("--out")
        .arg(&out)
        .arg("solve")
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(3));
}

#[test]
fn cli_overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let st = bin()
        .args(["--seed", "9", "--samples", "2", "--out"])
        .arg(&out)
        .args(["mca-sample", "--t", "40"])
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let a: Artifact<cmd::McaResult> = Artifact::read(&out.join("mca.json")).unwrap();
    assert_eq!(
        (a.config.seed, a.config.samples, a.config.mca.t),
        (9, 2, 40)
    );
    assert_eq!(a.result.samples.len(), 2);

    let st = bin()
        .arg("--out")
        .arg(&out)
        .args([
            "intensity",
            "--kernel",
            "glsc3",
            "--dims",
            "1000",
            "--precision",
            "single",
        ])
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let a: Artifact<cmd::Intensity> = Artifact::read(&out.join("intensity.json")).unwrap();
    assert_eq!(a.result.intensity, 0.25);
}
