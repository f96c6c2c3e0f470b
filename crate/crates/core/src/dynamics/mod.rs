//! ODE models, simulation, and data-matrix assembly.

mod benchmarks;
mod integrate;

pub use benchmarks::{
    benchmark_param_names, default_ic_ranges, default_params, default_t_grid, make_benchmark,
    sample_ics, Benchmark,
};
pub use integrate::IntegratorConfig;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Poly;

/// Right-hand side of one state equation.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StateRhs {
    Polynomial { poly: Poly },
    Rational { numerator: Poly, denominator: Poly },
}

impl StateRhs {
    pub fn eval(&self, state: &[f64], state_index: usize) -> Result<f64> {
        match self {
            StateRhs::Polynomial { poly } => Ok(poly.eval(state)),
            StateRhs::Rational {
                numerator,
                denominator,
            } => {
                let den = denominator.eval(state);
                if den == 0.0 {
                    return Err(Error::DenominatorZero {
                        state: state_index,
                        value: den,
                    });
                }
                Ok(numerator.eval(state) / den)
            }
        }
    }
}

/// A dynamical system `dx/dt = f(x)` with polynomial or rational components.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OdeModel {
    pub n_states: usize,
    pub rhs: Vec<StateRhs>,
    /// Optional named parameters, kept for reporting only.
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl OdeModel {
    pub fn new(n_states: usize, rhs: Vec<StateRhs>) -> Result<Self> {
        let model = OdeModel {
            n_states,
            rhs,
            params: BTreeMap::new(),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rhs.len() != self.n_states {
            return Err(Error::InvalidModel(format!(
                "{} state equations for {} states",
                self.rhs.len(),
                self.n_states
            )));
        }
        for (k, rhs) in self.rhs.iter().enumerate() {
            let polys: Vec<&Poly> = match rhs {
                StateRhs::Polynomial { poly } => vec![poly],
                StateRhs::Rational {
                    numerator,
                    denominator,
                } => {
                    if denominator.is_zero() {
                        return Err(Error::InvalidModel(format!(
                            "state {} has an identically zero denominator",
                            k
                        )));
                    }
                    vec![numerator, denominator]
                }
            };
            for p in polys {
                if p.n_vars() != self.n_states {
                    return Err(Error::InvalidModel(format!(
                        "state {} references {} variables, model has {}",
                        k,
                        p.n_vars(),
                        self.n_states
                    )));
                }
            }
        }
        Ok(())
    }

    /// `f(state)`, component-wise; rational components as numerator/denominator.
    pub fn evaluate_rhs(&self, state: &[f64]) -> Result<Vec<f64>> {
        if state.len() != self.n_states {
            return Err(Error::DimensionMismatch(format!(
                "state of length {} for a model with {} states",
                state.len(),
                self.n_states
            )));
        }
        self.rhs
            .iter()
            .enumerate()
            .map(|(k, rhs)| rhs.eval(state, k))
            .collect()
    }

    /// Integrate from `ic` and sample on `t_grid`; derivatives are filled by
    /// exact right-hand-side evaluation at each sample.
    pub fn simulate(
        &self,
        ic: &[f64],
        t_grid: &[f64],
        cfg: &IntegratorConfig,
    ) -> Result<Trajectory> {
        integrate::simulate(self, ic, t_grid, cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectorySource {
    SimulatedExact,
    Differentiated,
}

/// One simulation run: time grid plus row-per-sample state (and derivative) data.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// m × n, row i is the state at `times[i]`.
    pub states: DMatrix<f64>,
    pub derivs: Option<DMatrix<f64>>,
    pub source: TrajectorySource,
}

impl Trajectory {
    pub fn new(
        times: Vec<f64>,
        states: DMatrix<f64>,
        derivs: Option<DMatrix<f64>>,
        source: TrajectorySource,
    ) -> Result<Self> {
        if times.len() != states.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "{} times for {} state rows",
                times.len(),
                states.nrows()
            )));
        }
        if !times.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::InvalidConfig("times must be strictly increasing".into()));
        }
        if let Some(d) = &derivs {
            if d.shape() != states.shape() {
                return Err(Error::DimensionMismatch(format!(
                    "derivative matrix {:?} does not match state matrix {:?}",
                    d.shape(),
                    states.shape()
                )));
            }
        }
        Ok(Trajectory {
            times,
            states,
            derivs,
            source,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.states.nrows()
    }

    pub fn n_states(&self) -> usize {
        self.states.ncols()
    }

    /// The first `count` samples (all of them if `count` is larger).
    pub fn head(&self, count: usize) -> Trajectory {
        let k = count.min(self.n_samples());
        Trajectory {
            times: self.times[..k].to_vec(),
            states: self.states.rows(0, k).into_owned(),
            derivs: self.derivs.as_ref().map(|d| d.rows(0, k).into_owned()),
            source: self.source,
        }
    }
}

/// Row-concatenation of one or more trajectories.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub trajectories: Vec<Trajectory>,
    pub stacked_states: DMatrix<f64>,
    pub stacked_derivs: DMatrix<f64>,
}

impl Dataset {
    pub fn from_trajectories(trajectories: Vec<Trajectory>) -> Result<Self> {
        let n = trajectories.first().map(|t| t.n_states()).unwrap_or(0);
        for t in &trajectories {
            if t.n_states() != n {
                return Err(Error::DimensionMismatch(
                    "trajectories have differing state dimensions".into(),
                ));
            }
            if t.derivs.is_none() {
                return Err(Error::InvalidConfig(
                    "dataset trajectories must carry derivatives".into(),
                ));
            }
        }
        let m: usize = trajectories.iter().map(|t| t.n_samples()).sum();
        let mut stacked_states = DMatrix::zeros(m, n);
        let mut stacked_derivs = DMatrix::zeros(m, n);
        let mut row = 0;
        for t in &trajectories {
            stacked_states
                .rows_mut(row, t.n_samples())
                .copy_from(&t.states);
            stacked_derivs
                .rows_mut(row, t.n_samples())
                .copy_from(t.derivs.as_ref().unwrap());
            row += t.n_samples();
        }
        Ok(Dataset {
            trajectories,
            stacked_states,
            stacked_derivs,
        })
    }

    pub fn n_states(&self) -> usize {
        self.stacked_states.ncols()
    }

    pub fn n_samples(&self) -> usize {
        self.stacked_states.nrows()
    }

    /// Dataset restricted to the first `count` trajectories.
    pub fn take_trajectories(&self, count: usize) -> Result<Dataset> {
        Dataset::from_trajectories(self.trajectories.iter().take(count).cloned().collect())
    }

    /// Restrict every trajectory to its first `count` samples. Useful when
    /// the informative (transient) part of each run is short.
    pub fn take_samples(&self, count: usize) -> Result<Dataset> {
        Dataset::from_trajectories(self.trajectories.iter().map(|t| t.head(count)).collect())
    }

    /// Stacked derivative column of state `k`.
    pub fn deriv_column(&self, k: usize) -> DVector<f64> {
        DVector::from_iterator(
            self.stacked_derivs.nrows(),
            self.stacked_derivs.column(k).iter().copied(),
        )
    }
}

/// Simulate one trajectory per initial condition and stack them in order.
pub fn generate_dataset(
    model: &OdeModel,
    ics: &[Vec<f64>],
    t_grid: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Dataset> {
    let mut trajectories = Vec::with_capacity(ics.len());
    for (i, ic) in ics.iter().enumerate() {
        let traj = model.simulate(ic, t_grid, cfg).map_err(|e| {
            Error::IntegrationFailure(format!("initial condition {}: {}", i, e))
        })?;
        trajectories.push(traj);
    }
    if trajectories.is_empty() {
        let n = model.n_states;
        return Ok(Dataset {
            trajectories,
            stacked_states: DMatrix::zeros(0, n),
            stacked_derivs: DMatrix::zeros(0, n),
        });
    }
    Dataset::from_trajectories(trajectories)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn mm_model() -> OdeModel {
        make_benchmark(Benchmark::MichaelisMenten, &BTreeMap::new()).unwrap()
    }

    #[test]
    fn evaluate_rhs_mm_at_origin() {
        // rational term vanishes at x = 0, leaving the source flux
        let model = mm_model();
        let f = model.evaluate_rhs(&[0.0]).unwrap();
        assert_relative_eq!(f[0], 0.6, epsilon = 1e-14);
    }

    #[test]
    fn evaluate_rhs_glycolysis_x5() {
        let model = make_benchmark(Benchmark::Glycolysis, &BTreeMap::new()).unwrap();
        let state = [0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0];
        let f = model.evaluate_rhs(&state).unwrap();
        // g1*x4 + g2*x5 = 1.3 - 3.1
        assert_relative_eq!(f[4], -1.8, epsilon = 1e-12);
    }

    #[test]
    fn evaluate_rhs_regulatory_x2_at_origin() {
        let model = make_benchmark(Benchmark::Regulatory, &BTreeMap::new()).unwrap();
        let f = model.evaluate_rhs(&[0.0, 0.0]).unwrap();
        assert_relative_eq!(f[1], 0.82, epsilon = 1e-14);
    }

    #[test]
    fn evaluate_rhs_dimension_mismatch() {
        let model = mm_model();
        assert!(matches!(
            model.evaluate_rhs(&[1.0, 2.0]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn denominator_zero_is_reported() {
        // dx/dt = 1 / x
        let model = OdeModel::new(
            1,
            vec![StateRhs::Rational {
                numerator: Poly::constant(1, 1.0),
                denominator: Poly::var(1, 0),
            }],
        )
        .unwrap();
        assert!(matches!(
            model.evaluate_rhs(&[0.0]),
            Err(Error::DenominatorZero { state: 0, .. })
        ));
    }

    #[test]
    fn dataset_stacks_in_order() {
        let model = mm_model();
        let grid: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let cfg = IntegratorConfig::default();
        let ds = generate_dataset(&model, &[vec![0.5], vec![1.0]], &grid, &cfg).unwrap();
        assert_eq!(ds.trajectories.len(), 2);
        assert_eq!(ds.n_samples(), 100);
        assert_relative_eq!(ds.stacked_states[(0, 0)], 0.5);
        assert_relative_eq!(ds.stacked_states[(50, 0)], 1.0);
    }

    #[test]
    fn empty_dataset_has_zero_rows() {
        let model = mm_model();
        let grid: Vec<f64> = (0..10).map(|i| i as f64 * 0.1).collect();
        let ds = generate_dataset(&model, &[], &grid, &IntegratorConfig::default()).unwrap();
        assert_eq!(ds.n_samples(), 0);
        assert_eq!(ds.stacked_states.ncols(), 1);
    }

    #[test]
    fn model_json_round_trip() {
        let model = make_benchmark(Benchmark::Regulatory, &BTreeMap::new()).unwrap();
        let s = serde_json::to_string_pretty(&model).unwrap();
        let back: OdeModel = serde_json::from_str(&s).unwrap();
        assert_eq!(model, back);
    }
}
