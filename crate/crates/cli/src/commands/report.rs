use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Result};

use crate::artifacts::{
    pareto_file, Manifest, RunLog, MODEL_FILE, RUN_LOG_FILE, SUMMARY_FILE, VALIDATION_FILE,
};
use implicit_sindy::io::{read_json, read_pareto_csv};
use implicit_sindy::selection::{IdentifiedModel, ValidationReport};

/// Largest residual drop (in decades) between consecutive Pareto points,
/// scanning from the sparsest model to the densest.
fn cliff_decades(rows: &[implicit_sindy::pipeline::ParetoRow]) -> Option<f64> {
    let mut sorted: Vec<_> = rows.iter().collect();
    sorted.sort_by_key(|r| r.term_count);
    sorted
        .windows(2)
        .map(|w| (w[0].residual.max(1e-300) / w[1].residual.max(1e-300)).log10())
        .fold(None, |acc: Option<f64>, d| {
            Some(acc.map_or(d, |a| a.max(d)))
        })
}

pub fn run(run_dir: &Path) -> Result<u8> {
    if !run_dir.is_dir() {
        bail!("run directory {} does not exist", run_dir.display());
    }
    let mut s = String::new();
    writeln!(s, "run summary: {}", run_dir.display())?;

    match Manifest::load(run_dir) {
        Ok(m) => {
            writeln!(
                s,
                "simulation: {} trajectories x {} samples, benchmark {}, seed {}, source {:?}",
                m.files.len(),
                m.n_samples,
                m.benchmark.as_deref().unwrap_or("(custom model)"),
                m.seed,
                m.source
            )?;
        }
        Err(_) => writeln!(s, "simulation: absent (no manifest.json)")?,
    }

    let run_log: Option<RunLog> = read_json(&run_dir.join(RUN_LOG_FILE)).ok();
    let model: Option<IdentifiedModel> = read_json(&run_dir.join(MODEL_FILE)).ok();
    match (&run_log, &model) {
        (Some(log), _) => {
            writeln!(s, "identification:")?;
            for st in &log.states {
                if let Some(err) = &st.error {
                    writeln!(s, "  state {}: failed: {}", st.state_index + 1, err)?;
                    continue;
                }
                let mut line = format!(
                    "  state {}: {} terms",
                    st.state_index + 1,
                    st.term_count.unwrap_or(0)
                );
                if let Some(m) = st.method {
                    line.push_str(&format!(" ({:?}", m));
                    if let Some(l) = st.lambda {
                        line.push_str(&format!(", lambda={:.4e}", l));
                    }
                    if let Some(r) = st.residual {
                        line.push_str(&format!(", residual={:.3e}", r));
                    }
                    line.push(')');
                }
                let front = read_pareto_csv(&run_dir.join(pareto_file(st.state_index))).ok();
                if let Some(d) = front.as_deref().and_then(cliff_decades) {
                    line.push_str(&format!("; cliff {:.1} decades", d));
                }
                writeln!(s, "{}", line)?;
                for w in &st.warnings {
                    writeln!(s, "  warning: {}", w)?;
                }
            }
        }
        (None, Some(_)) => writeln!(s, "identification: model.json present, run log absent")?,
        (None, None) => writeln!(s, "identification: absent")?,
    }

    match read_json::<ValidationReport>(&run_dir.join(VALIDATION_FILE)) {
        Ok(v) => {
            writeln!(
                s,
                "validation: max trajectory error {:.3e} over {} test ics ({} divergent)",
                v.max_rel_error,
                v.per_ic.len(),
                v.n_divergent
            )?;
            if !v.parameters.is_empty() {
                let worst = v
                    .parameters
                    .iter()
                    .map(|p| p.rel_error)
                    .fold(0.0f64, f64::max);
                writeln!(s, "validation: {} parameters, worst relative error {:.3e}", v.parameters.len(), worst)?;
                for p in &v.parameters {
                    writeln!(
                        s,
                        "  {:>8}: true {:>14.6} recovered {:>14.6} rel {:.2e}",
                        p.name, p.truth, p.recovered, p.rel_error
                    )?;
                }
            }
        }
        Err(_) => writeln!(s, "validation: absent")?,
    }

    print!("{}", s);
    std::fs::write(run_dir.join(SUMMARY_FILE), &s)?;
    Ok(0)
}
