use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use precilab::cmd;
use precilab::config::{KernelName, McaMode, Scope};
use precilab::{ExperimentConfig, LabError, LabResult};
use precilab_core::Precision;

#[derive(Parser, Debug)]
#[command(
    name = "precilab",
    version,
    about = "Mixed-precision CG experiment harness"
)]
struct Cli {
    /// JSON experiment configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One PCG solve; exit 0 converged, 2 stagnated, 3 breakdown.
    Solve,
    /// VPREC pseudo-mantissa sweep.
    VprecSweep {
        #[arg(long, value_enum)]
        scope: Option<ScopeArg>,
        #[arg(long)]
        t_min: Option<u32>,
        #[arg(long)]
        t_max: Option<u32>,
    },
    /// Monte Carlo arithmetic sampling with per-iteration envelopes.
    McaSample {
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long)]
        t: Option<u32>,
        #[arg(long, value_enum)]
        scope: Option<ScopeArg>,
    },
    /// Convergence classification of precision strategies.
    StrategyMatrix,
    /// Plain vs compensated dot products over condition numbers.
    Dot2Bench {
        #[arg(long, value_enum)]
        precision: Option<PrecisionArg>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Two-stage selection of sections that tolerate lower precision.
    Prune {
        #[arg(long)]
        vprec_threshold: Option<f64>,
        #[arg(long)]
        mca_width_threshold: Option<f64>,
    },
    /// Analytic arithmetic intensity of a kernel.
    Intensity {
        #[arg(long, value_enum)]
        kernel: Option<KernelArg>,
        /// Comma-separated dimensions: m,n,k for mxm, n for vector kernels,
        /// points per axis for ax and local_grad3.
        #[arg(long, value_delimiter = ',', num_args = 1..=3)]
        dims: Option<Vec<usize>>,
        #[arg(long, value_enum)]
        precision: Option<PrecisionArg>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ScopeArg {
    Whole,
    CgOnly,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModeArg {
    Rr,
    Mca,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum PrecisionArg {
    Single,
    Double,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum KernelArg {
    Mxm,
    Glsc3,
    Add2s,
    Ax,
    LocalGrad3,
}

impl From<ScopeArg> for Scope {
    fn from(s: ScopeArg) -> Self {
        match s {
            ScopeArg::Whole => Scope::Whole,
            ScopeArg::CgOnly => Scope::CgOnly,
        }
    }
}

impl From<PrecisionArg> for Precision {
    fn from(p: PrecisionArg) -> Self {
        match p {
            PrecisionArg::Single => Precision::Fp32,
            PrecisionArg::Double => Precision::Fp64,
        }
    }
}

fn load(cli: &Cli) -> LabResult<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.output.dir = o.clone();
    }
    if let Some(n) = cli.samples {
        cfg.samples = n;
    }
    match &cli.command {
        Command::VprecSweep {
            scope,
            t_min,
            t_max,
        } => {
            if let Some(s) = scope {
                cfg.sweep.scope = (*s).into();
            }
            cfg.sweep.t_min = t_min.unwrap_or(cfg.sweep.t_min);
            cfg.sweep.t_max = t_max.unwrap_or(cfg.sweep.t_max);
        }
        Command::McaSample { mode, t, scope } => {
            if let Some(m) = mode {
                cfg.mca.mode = match m {
                    ModeArg::Rr => McaMode::Rr,
                    ModeArg::Mca => McaMode::Mca,
                };
            }
            cfg.mca.t = t.unwrap_or(cfg.mca.t);
            if let Some(s) = scope {
                cfg.mca.scope = (*s).into();
            }
        }
        Command::Dot2Bench {
            precision,
            n,
            trials,
        } => {
            if let Some(p) = precision {
                cfg.dot2.precision = (*p).into();
            }
            cfg.dot2.n = n.unwrap_or(cfg.dot2.n);
            cfg.dot2.trials = trials.unwrap_or(cfg.dot2.trials);
        }
        Command::Prune {
            vprec_threshold,
            mca_width_threshold,
        } => {
            cfg.prune.vprec_threshold = vprec_threshold.unwrap_or(cfg.prune.vprec_threshold);
            cfg.prune.mca_width_threshold =
                mca_width_threshold.unwrap_or(cfg.prune.mca_width_threshold);
        }
        Command::Intensity {
            kernel,
            dims,
            precision,
        } => {
            if let Some(k) = kernel {
                cfg.intensity.kernel = match k {
                    KernelArg::Mxm => KernelName::Mxm,
                    KernelArg::Glsc3 => KernelName::Glsc3,
                    KernelArg::Add2s => KernelName::Add2s,
                    KernelArg::Ax => KernelName::Ax,
                    KernelArg::LocalGrad3 => KernelName::LocalGrad3,
                };
            }
            if let Some(d) = dims {
                let mut full = [d[0]; 3];
                full[..d.len()].copy_from_slice(d);
                cfg.intensity.dims = full;
            }
            if let Some(p) = precision {
                cfg.intensity.precision = (*p).into();
            }
        }
        Command::Solve | Command::StrategyMatrix => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: &Cli) -> LabResult<i32> {
    let cfg = load(cli)?;
    let written = match cli.command {
        Command::Solve => {
            let (res, w) = cmd::cmd_solve(&cfg)?;
            println!(
                "solve: {} after {} iterations, final residual {:e}",
                res.outcome, res.report.iterations, res.report.final_residual
            );
            report(&w);
            return Ok(res.outcome.exit_code());
        }
        Command::VprecSweep { .. } => cmd::cmd_vprec_sweep(&cfg)?.1,
        Command::McaSample { .. } => cmd::cmd_mca_sample(&cfg)?.1,
        Command::StrategyMatrix => {
            let (rows, w) = cmd::cmd_strategy_matrix(&cfg)?;
            for r in &rows {
                println!(
                    "{} {} {} R={} {}: {} ({} iterations)",
                    r.ops,
                    r.gso_precision,
                    r.gso_mode,
                    r.ranks,
                    r.preconditioner,
                    r.outcome.map_or("error", |o| o.as_str()),
                    r.iterations
                );
            }
            w
        }
        Command::Dot2Bench { .. } => cmd::cmd_dot2_bench(&cfg)?.1,
        Command::Prune { .. } => {
            let (res, w) = cmd::cmd_prune(&cfg)?;
            let names: Vec<&str> = res.candidates.iter().map(|s| s.as_str()).collect();
            println!("candidates: {}", names.join(", "));
            w
        }
        Command::Intensity { .. } => {
            let (i, w) = cmd::cmd_intensity(&cfg)?;
            println!(
                "flops {} bytes {} intensity {} FLOP/byte",
                i.flops, i.bytes, i.intensity
            );
            w
        }
    };
    report(&written);
    Ok(0)
}

fn report(paths: &[PathBuf]) {
    for p in paths {
        eprintln!("wrote {}", p.display());
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(LabError::exit_code(&e) as u8)
        }
    }
}
