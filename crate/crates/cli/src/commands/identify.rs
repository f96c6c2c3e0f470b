use std::path::Path;

use anyhow::{Context, Result};

use crate::artifacts::{pareto_file, RunLog, StateRunLog, MODEL_FILE, RUN_LOG_FILE};
use crate::config::RunConfig;
use crate::EXIT_QUALITY;
use implicit_sindy::dynamics::Dataset;
use implicit_sindy::io::{write_json, write_pareto_csv};
use implicit_sindy::pipeline::identify_model;
use implicit_sindy::selection::KneeStatus;

pub fn run(cfg: &RunConfig, data_flag: Option<&Path>, out_flag: Option<&Path>) -> Result<u8> {
    let data_dir = data_flag
        .map(Path::to_path_buf)
        .unwrap_or_else(|| cfg.resolve_output_dir(None));
    let (trajectories, manifest) = super::load_trajectories(&data_dir)?;
    let dataset = Dataset::from_trajectories(trajectories).context(
        "dataset is unusable for identification (run `sindy differentiate` first if the CSVs \
         lack derivative columns)",
    )?;

    // a manifest's benchmark supplies the tuned per-state configs when the
    // run config does not name one itself
    let mut cfg = cfg.clone();
    if cfg.benchmark.is_none() {
        if let Some(m) = &manifest {
            cfg.benchmark = m.benchmark.clone();
        }
    }
    let states = cfg.resolve_states()?;
    let out = cfg.resolve_output_dir(out_flag.or(data_flag));
    std::fs::create_dir_all(&out)
        .with_context(|| format!("cannot create output directory {}", out.display()))?;

    let (model, results) = identify_model(&dataset, &states)?;

    let mut logs = Vec::with_capacity(results.len());
    let mut quality_failure = false;
    for (k, r) in results.iter().enumerate() {
        match r {
            Ok(s) => {
                if !s.front.is_empty() {
                    write_pareto_csv(&out.join(pareto_file(k)), &s.front)?;
                }
                let mut warnings = Vec::new();
                if s.knee_status == Some(KneeStatus::NoCliff) {
                    warnings.push(format!(
                        "state {}: no Pareto cliff of at least {} decades; fell back to the \
                         minimum-residual model",
                        k + 1,
                        states[k].drop_threshold
                    ));
                    quality_failure = true;
                }
                logs.push(StateRunLog {
                    state_index: k,
                    ok: true,
                    method: Some(s.provenance.method),
                    lambda: Some(s.provenance.lambda),
                    residual: Some(s.provenance.residual),
                    term_count: Some(s.provenance.term_count),
                    knee_status: s.knee_status.clone(),
                    warnings,
                    error: None,
                });
            }
            Err(e) => {
                quality_failure = true;
                logs.push(StateRunLog {
                    state_index: k,
                    ok: false,
                    method: None,
                    lambda: None,
                    residual: None,
                    term_count: None,
                    knee_status: None,
                    warnings: Vec::new(),
                    error: Some(e.to_string()),
                });
            }
        }
    }

    write_json(&out.join(MODEL_FILE), &model)?;
    let log = RunLog {
        benchmark: cfg.benchmark.clone(),
        n_trajectories: dataset.trajectories.len(),
        n_samples: dataset.n_samples(),
        states: logs,
    };
    write_json(&out.join(RUN_LOG_FILE), &log)?;

    for s in &log.states {
        match (&s.error, s.term_count) {
            (Some(e), _) => println!("state {}: FAILED: {}", s.state_index + 1, e),
            (None, Some(tc)) => println!(
                "state {}: {} terms, residual {:.3e}{}",
                s.state_index + 1,
                tc,
                s.residual.unwrap_or(f64::NAN),
                if s.warnings.is_empty() { "" } else { " [no cliff]" }
            ),
            _ => {}
        }
    }
    println!("model -> {}", out.join(MODEL_FILE).display());
    Ok(if quality_failure { EXIT_QUALITY } else { 0 })
}
