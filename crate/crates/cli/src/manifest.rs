//! Run manifests: every command that writes an output file drops one
//! manifest next to it recording the command, config snapshot, seed,
//! timestamps, and paths.

use serde::Serialize;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub started_at_epoch_secs: u64,
    pub finished_at_epoch_secs: u64,
    pub inputs: Vec<String>,
    pub output: String,
    pub version: String,
}

pub struct ManifestLogger {
    command: String,
    config: serde_json::Value,
    seed: u64,
    started: u64,
    inputs: Vec<String>,
}

fn epoch_secs() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

impl ManifestLogger {
    pub fn start(command: &str, config: serde_json::Value, seed: u64, inputs: &[&Path]) -> Self {
        ManifestLogger {
            command: command.to_string(),
            config,
            seed,
            started: epoch_secs(),
            inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
        }
    }

    /// Write `<output>.manifest.json` next to the finished output.
    pub fn finish(self, output: &Path) -> std::io::Result<PathBuf> {
        let manifest = RunManifest {
            command: self.command,
            config: self.config,
            seed: self.seed,
            started_at_epoch_secs: self.started,
            finished_at_epoch_secs: epoch_secs(),
            inputs: self.inputs,
            output: output.display().to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        };
        let mut path = output.as_os_str().to_os_string();
        path.push(".manifest.json");
        let path = PathBuf::from(path);
        let body = serde_json::to_vec_pretty(&manifest)?;
        std::fs::write(&path, body)?;
        Ok(path)
    }
}
