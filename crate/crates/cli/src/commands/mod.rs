pub mod count;
pub mod differentiate;
pub mod identify;
pub mod report;
pub mod simulate;
pub mod validate;

use std::path::Path;

use anyhow::{bail, Context, Result};

use crate::artifacts::{Manifest, MANIFEST_FILE};
use implicit_sindy::dynamics::{Trajectory, TrajectorySource};

/// Trajectory CSVs of a dataset directory, in manifest order when a manifest
/// exists, otherwise all `*.csv` files sorted by name.
pub fn load_trajectories(dir: &Path) -> Result<(Vec<Trajectory>, Option<Manifest>)> {
    if !dir.is_dir() {
        bail!("{} is not a directory", dir.display());
    }
    let (names, manifest) = if dir.join(MANIFEST_FILE).is_file() {
        let m = Manifest::load(dir)?;
        (m.files.clone(), Some(m))
    } else {
        let mut names: Vec<String> = std::fs::read_dir(dir)
            .with_context(|| format!("cannot list {}", dir.display()))?
            .filter_map(|e| e.ok())
            .map(|e| e.file_name().to_string_lossy().into_owned())
            .filter(|n| n.ends_with(".csv") && !n.starts_with("pareto_"))
            .collect();
        names.sort();
        (names, None)
    };
    if names.is_empty() {
        bail!("no trajectory CSV files in {}", dir.display());
    }
    let source = manifest
        .as_ref()
        .map(|m| m.source)
        .unwrap_or(TrajectorySource::SimulatedExact);
    let mut trajectories = Vec::with_capacity(names.len());
    for name in &names {
        trajectories.push(implicit_sindy::io::read_trajectory_csv(&dir.join(name), source)?);
    }
    Ok((trajectories, manifest))
}
