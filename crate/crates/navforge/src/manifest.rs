//! Run manifest: written to the output directory before any real work, so
//! every artifact can be traced back to the exact command, configs, and
//! seed that produced it.

use crate::error::{write_err, CliError, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub config_paths: Vec<PathBuf>,
    pub global_seed: u64,
    pub out_dir: PathBuf,
    pub version: String,
    pub git_rev: String,
    pub started_at: String,
    pub finished_at: Option<String>,
}

fn git_rev() -> String {
    std::process::Command::new("git")
        .args(["rev-parse", "--short", "HEAD"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|o| String::from_utf8_lossy(&o.stdout).trim().to_string())
        .unwrap_or_else(|| "unknown".into())
}

impl RunManifest {
    pub fn new(command: &str, config_paths: Vec<PathBuf>, seed: u64, out_dir: &Path) -> Self {
        RunManifest {
            command: command.to_string(),
            argv: std::env::args().collect(),
            config_paths,
            global_seed: seed,
            out_dir: out_dir.to_path_buf(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            git_rev: git_rev(),
            started_at: chrono::Utc::now().to_rfc3339(),
            finished_at: None,
        }
    }

    pub fn write(&self, out_dir: &Path) -> Result<()> {
        let path = out_dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Fault(format!("manifest encode: {e}")))?;
        std::fs::write(&path, text).map_err(|e| write_err(&path, e))
    }

    /// Stamps the completion time and rewrites the manifest.
    pub fn finish(&mut self, out_dir: &Path) -> Result<()> {
        self.finished_at = Some(chrono::Utc::now().to_rfc3339());
        self.write(out_dir)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trips_and_marks_completion() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = RunManifest::new("train", vec![], 7, dir.path());
        m.write(dir.path()).unwrap();
        let text = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
        let parsed: RunManifest = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed.command, "train");
        assert_eq!(parsed.global_seed, 7);
        assert!(parsed.finished_at.is_none());

        m.finish(dir.path()).unwrap();
        let text = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
        let parsed: RunManifest = serde_json::from_str(&text).unwrap();
        assert!(parsed.finished_at.is_some());
    }
}
