use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::CliError;

/// Version of the manifest layout itself.
pub const MANIFEST_FORMAT: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seeds {
    pub master: u64,
    pub stage1: u64,
    pub stage2: u64,
}

/// One emitted file with its format identifier, e.g. `eval-csv/1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub file: String,
    pub format: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format: u32,
    pub artifact_version: String,
    pub command: String,
    pub seeds: Seeds,
    pub outputs: BTreeMap<String, OutputEntry>,
    pub results: toml::Table,
    /// Wall-clock seconds.
    pub timings: BTreeMap<String, f64>,
    pub config: ExperimentConfig,
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let path = dir.join(MANIFEST_FILE);
        let text = toml::to_string(self).expect("manifest serializes");
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let manifest: RunManifest =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))?;
        if manifest.format != MANIFEST_FORMAT {
            return Err(CliError::Config(format!(
                "{}: format: unsupported manifest format {}",
                path.display(),
                manifest.format
            )));
        }
        manifest.config.validate()?;
        Ok(manifest)
    }
}
