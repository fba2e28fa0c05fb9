//! Scan configuration: a flat JSON document with defaults, strict unknown-key
//! rejection and invariant validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteKind {
    Thinshell,
    MarginalClt,
    Flatness,
    Lemmas,
    SoConcentration,
}

impl SuiteKind {
    pub fn name(&self) -> &'static str {
        match self {
            SuiteKind::Thinshell => "thinshell",
            SuiteKind::MarginalClt => "marginal_clt",
            SuiteKind::Flatness => "flatness",
            SuiteKind::Lemmas => "lemmas",
            SuiteKind::SoConcentration => "so_concentration",
        }
    }
}

fn default_subspace_dims() -> Vec<usize> {
    vec![1, 2]
}

fn default_samples() -> usize {
    200_000
}

fn default_eps_grid() -> Vec<f64> {
    vec![0.05, 0.1, 0.2]
}

fn default_smoothing() -> f64 {
    0.5
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("scan_out")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub bodies: Vec<String>,
    pub dims: Vec<usize>,
    #[serde(default = "default_subspace_dims")]
    pub subspace_dims: Vec<usize>,
    #[serde(default = "default_samples")]
    pub samples_per_run: usize,
    #[serde(default = "default_eps_grid")]
    pub eps_grid: Vec<f64>,
    #[serde(default = "default_smoothing")]
    pub smoothing_v: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub suites: Vec<SuiteKind>,
}

pub const SUPPORTED_BODIES: [&str; 5] =
    ["cube", "ball", "simplex", "cross_polytope", "halfspace_cube"];

impl ScanConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        for w in self.dims.windows(2) {
            if w[1] <= w[0] {
                return Err(CliError::Config(format!(
                    "dims not increasing: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if self.dims.is_empty() {
            return Err(CliError::Config("dims must be non-empty".into()));
        }
        if self.samples_per_run < 10_000 {
            return Err(CliError::Config(format!(
                "samples_per_run = {} below the 1e4 minimum",
                self.samples_per_run
            )));
        }
        if self.bodies.is_empty() {
            return Err(CliError::Config("bodies must be non-empty".into()));
        }
        for b in &self.bodies {
            if !SUPPORTED_BODIES.contains(&b.as_str()) {
                return Err(CliError::Config(format!(
                    "unknown body {b:?}; supported: {SUPPORTED_BODIES:?}"
                )));
            }
        }
        for &l in &self.subspace_dims {
            if l == 0 {
                return Err(CliError::Config("subspace_dims entries must be >= 1".into()));
            }
        }
        if self.eps_grid.iter().any(|&e| !(e > 0.0)) {
            return Err(CliError::Config("eps_grid entries must be positive".into()));
        }
        if !(self.smoothing_v >= 0.0) {
            return Err(CliError::Config("smoothing_v must be >= 0".into()));
        }
        Ok(())
    }

    /// Stable hash of the canonical JSON form; report file names derive from it.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub fn load_config(path: &Path) -> Result<ScanConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    // serde_json reports the offending line/column and names unknown keys.
    let config: ScanConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    config.validate()?;
    Ok(config)
}
