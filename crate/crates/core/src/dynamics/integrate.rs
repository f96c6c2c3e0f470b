//! Adaptive Dormand–Prince 5(4) integration onto a fixed output grid.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{OdeModel, Trajectory, TrajectorySource};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    /// Cap on internal step size; defaults to the full span.
    pub h_max: Option<f64>,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rtol: 1e-10,
            atol: 1e-12,
            h_max: None,
            max_steps: 50_000_000,
        }
    }
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

// 5th-order solution weights (row 6 of A is also b).
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];

// b - b_hat, the embedded 4th-order error weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Stepper<'a> {
    model: &'a OdeModel,
    cfg: &'a IntegratorConfig,
    n: usize,
    steps: usize,
}

impl<'a> Stepper<'a> {
    fn rhs(&self, t: f64, y: &[f64]) -> Result<Vec<f64>> {
        let f = self
            .model
            .evaluate_rhs(y)
            .map_err(|e| Error::IntegrationFailure(format!("at t = {}: {}", t, e)))?;
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { t });
        }
        Ok(f)
    }

    /// One accepted step from (t, y) with initial trial size `h`, never
    /// stepping past `t_end`. Returns (t_new, y_new, f_new, h_next).
    #[allow(clippy::type_complexity)]
    fn step(
        &mut self,
        t: f64,
        y: &[f64],
        f0: &[f64],
        mut h: f64,
        t_end: f64,
    ) -> Result<(f64, Vec<f64>, Vec<f64>, f64)> {
        let n = self.n;
        let h_floor = 1e-14 * t_end.abs().max(1.0);
        loop {
            self.steps += 1;
            if self.steps > self.cfg.max_steps {
                return Err(Error::IntegrationFailure(format!(
                    "exceeded {} steps at t = {}",
                    self.cfg.max_steps, t
                )));
            }
            let clamped = h.min(t_end - t);
            let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
            k.push(f0.to_vec());
            for stage in 0..6 {
                let mut ys = y.to_vec();
                for (j, kj) in k.iter().enumerate() {
                    let a = A[stage][j];
                    if a != 0.0 {
                        for i in 0..n {
                            ys[i] += clamped * a * kj[i];
                        }
                    }
                }
                k.push(self.rhs(t + clamped * C[stage], &ys)?);
            }
            let mut y_new = y.to_vec();
            let mut err_sq = 0.0;
            for i in 0..n {
                let mut dy = 0.0;
                let mut e = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    dy += B[j] * kj[i];
                    e += E[j] * kj[i];
                }
                y_new[i] += clamped * dy;
                let scale = self.cfg.atol + self.cfg.rtol * y[i].abs().max(y_new[i].abs());
                let r = clamped * e / scale;
                err_sq += r * r;
            }
            let err = (err_sq / n as f64).sqrt();
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                // FSAL: stage 7 is the rhs at the new point
                let f_new = k.pop().unwrap();
                let mut h_next = clamped * factor;
                if let Some(h_max) = self.cfg.h_max {
                    h_next = h_next.min(h_max);
                }
                return Ok((t + clamped, y_new, f_new, h_next));
            }
            h = clamped * factor;
            if h < h_floor {
                return Err(Error::IntegrationFailure(format!(
                    "step size underflow at t = {} (possible pole crossing)",
                    t
                )));
            }
        }
    }
}

const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

pub fn simulate(
    model: &OdeModel,
    ic: &[f64],
    t_grid: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    if ic.len() != model.n_states {
        return Err(Error::DimensionMismatch(format!(
            "initial condition of length {} for {} states",
            ic.len(),
            model.n_states
        )));
    }
    if t_grid.len() < 2 || !t_grid.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::InvalidConfig(
            "time grid must be strictly increasing with at least two points".into(),
        ));
    }
    let n = model.n_states;
    let m = t_grid.len();
    let mut states = DMatrix::zeros(m, n);
    let mut derivs = DMatrix::zeros(m, n);

    let mut stepper = Stepper {
        model,
        cfg,
        n,
        steps: 0,
    };
    let mut t = t_grid[0];
    let mut y = ic.to_vec();
    let mut f = stepper.rhs(t, &y)?;
    let span = t_grid[m - 1] - t_grid[0];
    let mut h = initial_step(span, cfg);

    for (row, &t_out) in t_grid.iter().enumerate() {
        while t < t_out {
            let (t2, y2, f2, h2) = stepper.step(t, &y, &f, h, t_out)?;
            t = t2;
            y = y2;
            f = f2;
            h = h2;
        }
        for i in 0..n {
            states[(row, i)] = y[i];
            derivs[(row, i)] = f[i];
        }
    }
    Trajectory::new(
        t_grid.to_vec(),
        states,
        Some(derivs),
        TrajectorySource::SimulatedExact,
    )
}

fn initial_step(span: f64, cfg: &IntegratorConfig) -> f64 {
    let h = (span * 1e-4).max(1e-10);
    match cfg.h_max {
        Some(h_max) => h.min(h_max),
        None => h,
    }
}
