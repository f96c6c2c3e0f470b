use std::path::Path;

use anyhow::{Context, Result};

use crate::artifacts::{trajectory_file, Manifest};
use crate::config::RunConfig;
use implicit_sindy::dynamics::TrajectorySource;
use implicit_sindy::io::write_trajectory_csv;

pub fn run(cfg: &RunConfig, out_flag: Option<&Path>) -> Result<u8> {
    let model = cfg.truth_model()?;
    let ics = cfg.resolve_ics()?;
    let grid = cfg.resolve_t_grid()?;
    let out = cfg.resolve_output_dir(out_flag);
    std::fs::create_dir_all(&out)
        .with_context(|| format!("cannot create output directory {}", out.display()))?;

    let mut files = Vec::with_capacity(ics.len());
    for (i, ic) in ics.iter().enumerate() {
        let traj = model
            .simulate(ic, &grid, &cfg.integrator)
            .with_context(|| format!("simulation failed for ic {:?}", ic))?;
        let name = trajectory_file(i);
        write_trajectory_csv(&out.join(&name), &traj)?;
        files.push(name);
    }
    let manifest = Manifest {
        benchmark: cfg.benchmark.clone(),
        params: model.params.clone(),
        seed: cfg.seed,
        t_end: *grid.last().expect("grid is nonempty"),
        n_samples: grid.len(),
        source: TrajectorySource::SimulatedExact,
        ics,
        files,
    };
    manifest.save(&out)?;
    println!(
        "simulated {} trajectories x {} samples -> {}",
        manifest.files.len(),
        manifest.n_samples,
        out.display()
    );
    Ok(0)
}
