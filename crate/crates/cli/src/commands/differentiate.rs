use std::path::Path;

use anyhow::{Context, Result};

use crate::config::RunConfig;
use implicit_sindy::differentiation::{differentiate_trajectory, DiffMethod};
use implicit_sindy::dynamics::TrajectorySource;
use implicit_sindy::io::write_trajectory_csv;

pub fn run(
    cfg: &RunConfig,
    input: &Path,
    method: Option<&str>,
    alpha: Option<f64>,
    out_flag: Option<&Path>,
) -> Result<u8> {
    let mut diff_cfg = cfg.differentiation.clone();
    if let Some(m) = method {
        diff_cfg.method = match m {
            "central" => DiffMethod::Central,
            "tv" | "tv_regularized" => DiffMethod::TvRegularized,
            other => anyhow::bail!("unknown differentiation method '{}'", other),
        };
    }
    if let Some(a) = alpha {
        diff_cfg.alpha = a;
    }

    let (trajectories, manifest) = super::load_trajectories(input)?;
    // default to in-place: derivative columns are appended/replaced
    let out = out_flag.map(Path::to_path_buf).unwrap_or_else(|| input.to_path_buf());
    std::fs::create_dir_all(&out)
        .with_context(|| format!("cannot create output directory {}", out.display()))?;

    let names: Vec<String> = match &manifest {
        Some(m) => m.files.clone(),
        None => (0..trajectories.len())
            .map(crate::artifacts::trajectory_file)
            .collect(),
    };
    for (traj, name) in trajectories.iter().zip(&names) {
        let diffed = differentiate_trajectory(traj, &diff_cfg)?;
        write_trajectory_csv(&out.join(name), &diffed)?;
    }
    if let Some(mut m) = manifest {
        m.source = TrajectorySource::Differentiated;
        m.files = names.clone();
        m.save(&out)?;
    }
    println!(
        "differentiated {} trajectories ({:?}) -> {}",
        names.len(),
        diff_cfg.method,
        out.display()
    );
    Ok(0)
}
