//! Run manifests and the output directory writer.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Path relative to the output directory.
    pub path: String,
    pub bytes: u64,
}

/// Everything needed to rerun a command and get identical data files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub code_version: String,
    pub config: ExperimentConfig,
    /// Trial seeds, shared by every strength in a sweep.
    pub trial_seeds: Vec<u64>,
    pub started_unix: u64,
    pub wall_clock_seconds: f64,
    pub files: Vec<FileEntry>,
}

/// Start time of a command.
#[derive(Debug, Clone, Copy)]
pub struct RunClock {
    started_unix: u64,
    timer: Instant,
}

impl RunClock {
    pub fn start() -> Self {
        RunClock { started_unix: crate::unix_now(), timer: Instant::now() }
    }
}

/// Collects the files written by one command.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    files: Vec<FileEntry>,
    clock: RunClock,
}

impl OutputDir {
    pub fn create(root: &Path, clock: RunClock) -> Result<Self> {
        fs::create_dir_all(root)?;
        Ok(OutputDir { root: root.to_path_buf(), files: Vec::new(), clock })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, relative: &str, contents: &str) -> Result<PathBuf> {
        let path = self.root.join(relative);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, contents)?;
        log::info!("wrote {}", path.display());
        self.files.push(FileEntry { path: relative.to_string(), bytes: contents.len() as u64 });
        Ok(path)
    }

    /// Records a file written by someone else under `root`.
    pub fn track(&mut self, path: &Path) -> Result<()> {
        let bytes = fs::metadata(path)?.len();
        let relative = path.strip_prefix(&self.root).unwrap_or(path);
        self.files.push(FileEntry { path: relative.display().to_string(), bytes });
        Ok(())
    }

    /// Writes `<command>_manifest.json` and returns the manifest.
    pub fn finish(mut self, command: &str, config: &ExperimentConfig, trial_seeds: Vec<u64>) -> Result<RunManifest> {
        let manifest_name = format!("{command}_manifest.json");
        let manifest = RunManifest {
            command: command.to_string(),
            code_version: crate::CODE_VERSION.to_string(),
            config: config.clone(),
            trial_seeds,
            started_unix: self.clock.started_unix,
            wall_clock_seconds: self.clock.timer.elapsed().as_secs_f64(),
            files: std::mem::take(&mut self.files),
        };
        self.write(&manifest_name, &serde_json::to_string_pretty(&manifest)?)?;
        Ok(manifest)
    }
}
