//! Experiment harness for mixed-precision CG studies.
//!
//! Commands take an [`ExperimentConfig`] and return typed results; the
//! `cmd_*` variants also write CSV and JSON artifacts. The `precilab` binary
//! is a thin CLI over [`cmd`].

pub mod cmd;
pub mod config;
pub mod error;
pub mod metrics;
pub mod output;
pub mod run;

pub use config::ExperimentConfig;
pub use error::{LabError, LabResult};
pub use metrics::{gain, metrics, MetricBlock};
pub use output::{Artifact, SCHEMA_VERSION};
pub use run::{Outcome, RunSpec};
