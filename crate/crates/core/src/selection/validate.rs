//! Held-out-trajectory validation of an identified model against a reference
//! system.

use serde::{Deserialize, Serialize};

use super::IdentifiedModel;
use crate::dynamics::{IntegratorConfig, OdeModel};
use crate::error::Result;

/// Outcome for one test initial condition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IcValidation {
    pub ic: Vec<f64>,
    /// max over samples of |x_id - x_true| / max_t |x_true|, per state;
    /// absent when either simulation diverged.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_state_max_rel_error: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub divergence: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamComparison {
    pub name: String,
    pub truth: f64,
    pub recovered: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub per_ic: Vec<IcValidation>,
    /// Worst per-state relative trajectory error over the non-divergent ics.
    pub max_rel_error: f64,
    pub n_divergent: usize,
    /// Filled when a parameter correspondence is declared for the system.
    #[serde(default)]
    pub parameters: Vec<ParamComparison>,
}

impl ValidationReport {
    pub fn with_parameters(mut self, parameters: Vec<ParamComparison>) -> Self {
        self.parameters = parameters;
        self
    }

    pub fn max_param_rel_error(&self) -> f64 {
        self.parameters
            .iter()
            .map(|p| p.rel_error)
            .fold(0.0, f64::max)
    }
}

/// Simulate both models from each test initial condition and compare
/// trajectories state by state. Divergence of either simulation is recorded
/// per initial condition, not raised.
pub fn validate_model(
    identified: &IdentifiedModel,
    truth: &OdeModel,
    test_ics: &[Vec<f64>],
    t_grid: &[f64],
    cfg: &IntegratorConfig,
) -> Result<ValidationReport> {
    let id_ode = identified.to_ode_model()?;
    let mut per_ic = Vec::with_capacity(test_ics.len());
    let mut max_rel_error = 0.0f64;
    let mut n_divergent = 0;
    for ic in test_ics {
        let truth_traj = truth.simulate(ic, t_grid, cfg);
        let id_traj = id_ode.simulate(ic, t_grid, cfg);
        match (truth_traj, id_traj) {
            (Ok(a), Ok(b)) => {
                let n = truth.n_states;
                let mut errs = vec![0.0f64; n];
                for k in 0..n {
                    let scale = a
                        .states
                        .column(k)
                        .iter()
                        .fold(0.0f64, |m, v| m.max(v.abs()))
                        .max(1e-12);
                    let mut worst = 0.0f64;
                    for i in 0..a.n_samples() {
                        worst = worst.max((a.states[(i, k)] - b.states[(i, k)]).abs());
                    }
                    errs[k] = worst / scale;
                    max_rel_error = max_rel_error.max(errs[k]);
                }
                per_ic.push(IcValidation {
                    ic: ic.clone(),
                    per_state_max_rel_error: Some(errs),
                    divergence: None,
                });
            }
            (res_a, res_b) => {
                let msg = match (&res_a, &res_b) {
                    (Err(e), _) => format!("reference simulation failed: {}", e),
                    (_, Err(e)) => format!("identified simulation failed: {}", e),
                    _ => unreachable!(),
                };
                n_divergent += 1;
                per_ic.push(IcValidation {
                    ic: ic.clone(),
                    per_state_max_rel_error: None,
                    divergence: Some(msg),
                });
            }
        }
    }
    Ok(ValidationReport {
        per_ic,
        max_rel_error,
        n_divergent,
        parameters: Vec::new(),
    })
}
