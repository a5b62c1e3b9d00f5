//! The run manifest, written last as the completion marker of a run.
//!
//! A directory without `manifest.json` holds a failed or interrupted run.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::RunError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

impl Artifact {
    pub fn hash(dir: &Path, name: &str) -> Result<Self, RunError> {
        let path = dir.join(name);
        let data = std::fs::read(&path).map_err(RunError::io(&path))?;
        Ok(Self { path: name.to_string(), sha256: hex::encode(Sha256::digest(&data)), bytes: data.len() as u64 })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    pub kind: String,
    pub lambda: f64,
    pub mu: f64,
    pub z: [f64; 2],
    pub w: [f64; 2],
    /// `λ₁ … λ_k` of `-Δ_h`.
    pub eigenvalues: Vec<f64>,
    /// Absent when the coupling matrix fails the hypotheses.
    pub t1: Option<f64>,
    pub s1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub experiment: String,
    /// The effective configuration, command-line values included.
    pub config: serde_json::Value,
    pub spectral: SpectralSummary,
    pub artifacts: Vec<Artifact>,
    pub verdicts: Vec<Verdict>,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    /// Writes via a temporary file and a rename so a reader never sees a
    /// partial manifest.
    pub fn write_atomic(&self, dir: &Path) -> Result<PathBuf, RunError> {
        let tmp = dir.join(".manifest.json.tmp");
        let path = dir.join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(&tmp, text).map_err(RunError::io(&tmp))?;
        std::fs::rename(&tmp, &path).map_err(RunError::io(&path))?;
        Ok(path)
    }

    pub fn load(dir: &Path) -> Result<Self, RunError> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(RunError::io(&path))?;
        serde_json::from_str(&text).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))
    }

    /// Every listed artifact exists and still hashes to the recorded digest.
    pub fn verify(&self, dir: &Path) -> Result<bool, RunError> {
        for a in &self.artifacts {
            let path = dir.join(&a.path);
            if !path.exists() || Artifact::hash(dir, &a.path)? != *a {
                return Ok(false);
            }
        }
        Ok(true)
    }
}
