//! The seven harness commands. Each `cmd_*` computes its result, writes the
//! artifacts under `output.dir` and returns both.

pub mod dot2;
pub mod intensity;
pub mod mca;
pub mod prune;
pub mod solve;
pub mod strategy;
pub mod sweep;

pub use dot2::{cmd_dot2_bench, dot2_bench, Dot2Result, Dot2Row};
pub use intensity::{cmd_intensity, intensity, Intensity};
pub use mca::{cmd_mca_sample, envelope, mca_sample, EnvelopeRow, McaResult};
pub use prune::{cmd_prune, prune, PruneResult, Verdict};
pub use solve::{cmd_solve, solve, SolveResult};
pub use strategy::{cmd_strategy_matrix, strategy_matrix, StrategyRow};
pub use sweep::{cmd_vprec_sweep, vprec_sweep, SweepResult, SweepRow};
