//! `manifest.json`, written last in each output directory.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::Provenance;
use crate::error::{CliError, CliResult};

pub const MANIFEST: &str = "manifest.json";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// SHA-256 over `blob <len>\0<bytes>`, the git object framing.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, Serialize)]
pub struct GridRecord {
    #[serde(rename = "L")]
    pub scale: f64,
    pub nx: usize,
    pub ny: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub config: Provenance,
    pub seeds: Vec<u64>,
    pub grids: Vec<GridRecord>,
    pub threads: usize,
    pub wall_clock_seconds: f64,
    pub steps: u64,
    /// Hash of the configuration text and command-line inputs.
    pub input_hash: String,
    pub outputs: Vec<OutputRecord>,
}

/// Prepares an output directory, refusing one that already holds a manifest.
pub fn prepare_dir(dir: &Path) -> CliResult<()> {
    if dir.join(MANIFEST).exists() {
        return Err(CliError::Usage(format!(
            "{} already holds a {MANIFEST}; choose a fresh --out directory or remove the old results",
            dir.display()
        )));
    }
    std::fs::create_dir_all(dir).map_err(CliError::io(dir))
}

/// Collects manifest fields while a command runs.
#[derive(Debug)]
pub struct ManifestBuilder {
    dir: PathBuf,
    start: Instant,
    pub manifest: Manifest,
}

impl ManifestBuilder {
    pub fn new(dir: &Path, command: &str, config: Provenance, inputs: &[u8]) -> Self {
        Self {
            dir: dir.to_path_buf(),
            start: Instant::now(),
            manifest: Manifest {
                command: command.into(),
                version: VERSION.into(),
                config,
                seeds: Vec::new(),
                grids: Vec::new(),
                threads: rayon::current_num_threads(),
                wall_clock_seconds: 0.0,
                steps: 0,
                input_hash: content_hash(inputs),
                outputs: Vec::new(),
            },
        }
    }

    /// Records an output file relative to the manifest directory.
    pub fn output(&mut self, path: &Path) -> CliResult<()> {
        let bytes = std::fs::read(path).map_err(CliError::io(path))?;
        let rel = path.strip_prefix(&self.dir).unwrap_or(path);
        self.manifest.outputs.push(OutputRecord {
            path: rel.to_string_lossy().replace('\\', "/"),
            sha256: content_hash(&bytes),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    pub fn finish(mut self) -> CliResult<PathBuf> {
        self.manifest.wall_clock_seconds = self.start.elapsed().as_secs_f64();
        self.manifest.outputs.sort_by(|a, b| a.path.cmp(&b.path));
        let path = self.dir.join(MANIFEST);
        let text = serde_json::to_string_pretty(&self.manifest).map_err(|e| CliError::format(&path, e.to_string()))?;
        std::fs::write(&path, text).map_err(CliError::io(&path))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_matches_git_blob_framing() {
        // empty blob under the SHA-256 object format
        assert_eq!(content_hash(b""), "473a0f4c3be8a93681a267e3b1e9a7dcda1185436fe141f7749120a303721813");
        assert_ne!(content_hash(b"a"), content_hash(b"b"));
    }

    #[test]
    fn one_manifest_per_directory() {
        let dir = tempfile::tempdir().unwrap();
        prepare_dir(dir.path()).unwrap();
        let csv = dir.path().join("x.csv");
        std::fs::write(&csv, "a\n1\n").unwrap();
        let mut m = ManifestBuilder::new(dir.path(), "run", Provenance::new(), b"cfg");
        m.output(&csv).unwrap();
        m.finish().unwrap();
        let err = prepare_dir(dir.path()).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        let text = std::fs::read_to_string(dir.path().join(MANIFEST)).unwrap();
        assert!(text.contains("\"x.csv\""));
    }
}
