//! Artifact writing. Every JSON artifact is wrapped in [`Artifact`] with a
//! versioned schema tag; CSV files carry a header row.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{LabError, LabResult};

pub const SCHEMA_VERSION: &str = "precilab.report/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact<T> {
    pub schema_version: String,
    pub command: String,
    pub config: ExperimentConfig,
    pub result: T,
}

impl<T: Serialize + DeserializeOwned> Artifact<T> {
    pub fn new(command: &str, config: &ExperimentConfig, result: T) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            command: command.into(),
            config: config.clone(),
            result,
        }
    }

    pub fn write(&self, path: &Path) -> LabResult<()> {
        ensure_parent(path)?;
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    pub fn read(path: &Path) -> LabResult<Self> {
        let a: Self = serde_json::from_str(&fs::read_to_string(path)?)?;
        if a.schema_version != SCHEMA_VERSION {
            return Err(LabError::Config(format!(
                "unsupported schema '{}' in {}",
                a.schema_version,
                path.display()
            )));
        }
        Ok(a)
    }
}

pub fn write_csv<R: Serialize>(path: &Path, rows: &[R]) -> LabResult<()> {
    ensure_parent(path)?;
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: DeserializeOwned>(path: &Path) -> LabResult<Vec<R>> {
    let mut rd = csv::Reader::from_path(path)?;
    Ok(rd.deserialize().collect::<Result<_, _>>()?)
}

fn ensure_parent(path: &Path) -> LabResult<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    Ok(())
}
