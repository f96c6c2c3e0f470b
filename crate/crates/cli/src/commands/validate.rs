use std::path::Path;

use anyhow::{Context, Result};

use crate::artifacts::VALIDATION_FILE;
use crate::config::RunConfig;
use implicit_sindy::dynamics::sample_ics;
use implicit_sindy::io::{read_json, write_json};
use implicit_sindy::selection::{
    extract_benchmark_params, validate_model, IdentifiedModel, ParamComparison,
};

pub fn run(
    cfg: &RunConfig,
    model_path: &Path,
    n_test_ics: usize,
    test_seed: Option<u64>,
    out_flag: Option<&Path>,
) -> Result<u8> {
    let truth = cfg.truth_model()?;
    let identified: IdentifiedModel = read_json(model_path)
        .with_context(|| format!("cannot read identified model {}", model_path.display()))?;
    let grid = cfg.resolve_t_grid()?;
    let benchmark = cfg.benchmark()?;
    let test_ics = match benchmark {
        // fresh initial conditions, disjoint from training by seed offset
        Some(b) => sample_ics(b, n_test_ics, test_seed.unwrap_or(cfg.seed + 1)),
        None => cfg.resolve_ics()?,
    };

    let mut report = validate_model(&identified, &truth, &test_ics, &grid, &cfg.integrator)?;
    if let Some(b) = benchmark {
        match extract_benchmark_params(b, &identified) {
            Ok(recovered) => {
                let comparisons: Vec<ParamComparison> = truth
                    .params
                    .iter()
                    .map(|(name, &tv)| {
                        let rv = recovered.get(name).copied().unwrap_or(f64::NAN);
                        ParamComparison {
                            name: name.clone(),
                            truth: tv,
                            recovered: rv,
                            rel_error: ((rv - tv) / tv).abs(),
                        }
                    })
                    .collect();
                report = report.with_parameters(comparisons);
            }
            Err(e) => log::warn!("parameter extraction skipped: {}", e),
        }
    }

    let out = cfg.resolve_output_dir(out_flag.or_else(|| model_path.parent()));
    std::fs::create_dir_all(&out)?;
    write_json(&out.join(VALIDATION_FILE), &report)?;

    println!(
        "max trajectory error {:.3e} over {} test ics ({} divergent)",
        report.max_rel_error,
        report.per_ic.len(),
        report.n_divergent
    );
    for p in &report.parameters {
        println!(
            "  {:>8}: true {:>14.6} recovered {:>14.6} rel {:.2e}",
            p.name, p.truth, p.recovered, p.rel_error
        );
    }
    println!("report -> {}", out.join(VALIDATION_FILE).display());
    Ok(0)
}
