//! On-disk artifact schemas shared between subcommands.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use implicit_sindy::dynamics::TrajectorySource;
use implicit_sindy::selection::{IdentificationMethod, KneeStatus};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MODEL_FILE: &str = "model.json";
pub const RUN_LOG_FILE: &str = "run.json";
pub const VALIDATION_FILE: &str = "validation.json";
pub const SUMMARY_FILE: &str = "summary.txt";

/// Index of a simulated (or differentiated) dataset directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub benchmark: Option<String>,
    pub params: BTreeMap<String, f64>,
    pub seed: u64,
    pub t_end: f64,
    pub n_samples: usize,
    pub source: TrajectorySource,
    pub ics: Vec<Vec<f64>>,
    /// Trajectory CSV file names, one per initial condition, in ic order.
    pub files: Vec<String>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Manifest> {
        let path = dir.join(MANIFEST_FILE);
        implicit_sindy::io::read_json(&path)
            .with_context(|| format!("cannot read manifest {}", path.display()))
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        implicit_sindy::io::write_json(&dir.join(MANIFEST_FILE), self)?;
        Ok(())
    }
}

/// Per-state identification log entry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateRunLog {
    pub state_index: usize,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<IdentificationMethod>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub term_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub knee_status: Option<KneeStatus>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Identification run log: what happened for every state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunLog {
    pub benchmark: Option<String>,
    pub n_trajectories: usize,
    pub n_samples: usize,
    pub states: Vec<StateRunLog>,
}

pub fn pareto_file(state_index: usize) -> String {
    format!("pareto_state_{}.csv", state_index + 1)
}

pub fn trajectory_file(index: usize) -> String {
    format!("traj_{:03}.csv", index)
}
