//! Run manifests: a complete record of what a command read, wrote and was
//! configured with.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub artifact_version: String,
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<String>,
    /// Elapsed time; not covered by the byte-determinism contract.
    pub wall_clock_seconds: f64,
    pub warnings: Vec<String>,
    /// Command-specific payload (generator sources, normalization
    /// transforms, aggregate metrics).
    pub extra: serde_json::Value,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(format!("{:x}", hasher.finalize()))
}

/// Builder tracking inputs and outputs as a command runs.
pub struct ManifestBuilder {
    command: String,
    config: serde_json::Value,
    seeds: Vec<u64>,
    inputs: Vec<FileDigest>,
    outputs: Vec<PathBuf>,
    warnings: Vec<String>,
    extra: serde_json::Value,
    start: std::time::Instant,
}

impl ManifestBuilder {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        Self {
            command: command.to_string(),
            config,
            seeds: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            warnings: Vec::new(),
            extra: serde_json::Value::Null,
            start: std::time::Instant::now(),
        }
    }

    pub fn seed(&mut self, seed: u64) -> &mut Self {
        self.seeds.push(seed);
        self
    }

    pub fn input(&mut self, path: &Path) -> Result<&mut Self> {
        self.inputs.push(FileDigest {
            path: path.display().to_string(),
            sha256: sha256_file(path)?,
        });
        Ok(self)
    }

    pub fn output(&mut self, path: &Path) -> &mut Self {
        self.outputs.push(path.to_path_buf());
        self
    }

    pub fn warn(&mut self, msg: impl Into<String>) -> &mut Self {
        self.warnings.push(msg.into());
        self
    }

    pub fn extra(&mut self, extra: serde_json::Value) -> &mut Self {
        self.extra = extra;
        self
    }

    /// Verify every recorded output exists, then write `manifest.json`
    /// (itself excluded from the output list) and return the manifest.
    pub fn write(self, path: &Path) -> Result<RunManifest> {
        for out in &self.outputs {
            if !out.exists() {
                return Err(crate::error::Error::InputData(format!(
                    "manifest lists missing output {}",
                    out.display()
                )));
            }
        }
        let manifest = RunManifest {
            command: self.command,
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            config: self.config,
            seeds: self.seeds,
            inputs: self.inputs,
            outputs: self
                .outputs
                .iter()
                .map(|p| p.display().to_string())
                .collect(),
            wall_clock_seconds: self.start.elapsed().as_secs_f64(),
            warnings: self.warnings,
            extra: self.extra,
        };
        std::fs::write(path, serde_json::to_string_pretty(&manifest)?)?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_lists_existing_outputs_and_digests_inputs() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("in.txt");
        std::fs::write(&input, "payload").unwrap();
        let output = dir.path().join("out.txt");
        std::fs::write(&output, "result").unwrap();

        let mut b = ManifestBuilder::new("test", serde_json::json!({"k": 1}));
        b.seed(7).input(&input).unwrap();
        b.output(&output);
        let manifest = b.write(&dir.path().join("manifest.json")).unwrap();
        assert_eq!(manifest.seeds, vec![7]);
        assert_eq!(manifest.inputs[0].sha256, sha256_file(&input).unwrap());
        assert!(std::path::Path::new(&manifest.outputs[0]).exists());

        // A missing output is refused.
        let mut b = ManifestBuilder::new("test", serde_json::Value::Null);
        b.output(&dir.path().join("nope.txt"));
        assert!(b.write(&dir.path().join("m2.json")).is_err());
    }
}
