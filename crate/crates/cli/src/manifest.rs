use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Record of one command invocation, written as `manifest-<command>.json`.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
    pub artifacts: BTreeMap<String, PathBuf>,
    pub timings_secs: BTreeMap<String, f64>,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64, config: &BTreeMap<String, String>) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config: config.clone(),
            artifacts: BTreeMap::new(),
            timings_secs: BTreeMap::new(),
        }
    }

    pub fn artifact(&mut self, name: impl Into<String>, path: &Path) {
        self.artifacts.insert(name.into(), path.to_path_buf());
    }

    /// Write the manifest into `dir` after checking every artifact exists.
    pub fn write(&self, dir: &Path) -> CliResult<PathBuf> {
        if let Some((name, p)) = self.artifacts.iter().find(|(_, p)| !p.exists()) {
            return Err(CliError::Missing(format!("artifact `{name}` not found at {}", p.display())));
        }
        let path = dir.join(format!("manifest-{}.json", self.command));
        let json = serde_json::to_string_pretty(self).map_err(|e| CliError::Other(e.to_string()))?;
        std::fs::write(&path, json + "\n")?;
        Ok(path)
    }
}
