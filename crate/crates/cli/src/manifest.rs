//! Everything needed to repeat a run. Timing lives in a separate file so
//! that repeated runs write identical manifests and results.

use std::path::{Path, PathBuf};

use selinf::pipeline::LambdaRule;
use selinf::sim::ExperimentConfig;
use selinf::ConditioningMode;
use serde::{Deserialize, Serialize};

use crate::args::Format;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SigmaSource {
    User,
    Estimated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InferManifest {
    pub tool_version: String,
    pub data: PathBuf,
    pub response: String,
    pub standardize: bool,
    pub lambda: LambdaRule,
    pub gamma: f64,
    /// Noise sd supplied by the user, if any.
    pub sigma: Option<f64>,
    pub sigma_source: SigmaSource,
    pub alpha: f64,
    pub mode: ConditioningMode,
    pub sign_cap: usize,
    pub seed: u64,
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    /// Coverage, FCR and pivot uniformity.
    Coverage,
    /// Sign, model, naive and data-splitting interval widths.
    Widths,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub label: String,
    pub config: ExperimentConfig,
}

/// Contents of a `simulate --config` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Suite {
    pub experiment: Experiment,
    pub scenarios: Vec<Scenario>,
}

impl Suite {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = read(path)?;
        serde_json::from_str(&text).map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateManifest {
    pub tool_version: String,
    pub experiment: Experiment,
    pub scenarios: Vec<Scenario>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Manifest {
    Infer(InferManifest),
    Simulate(SimulateManifest),
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = read(path)?;
        let manifest: Manifest = serde_json::from_str(&text).map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let version = match &manifest {
            Manifest::Infer(m) => &m.tool_version,
            Manifest::Simulate(m) => &m.tool_version,
        };
        if version != env!("CARGO_PKG_VERSION") {
            log::warn!(
                "manifest was written by version {version}, this is {}",
                env!("CARGO_PKG_VERSION")
            );
        }
        Ok(manifest)
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}
