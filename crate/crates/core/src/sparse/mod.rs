//! Sparse solvers: the explicit regression path (sequentially thresholded
//! least squares, coordinate-descent LASSO) and the implicit path (sparsest
//! vector in the null space of the library, via alternating directions).

mod adm;
mod nullspace;
mod regression;

pub use adm::{adm_sparsest_vector, fix_sign, fix_sign_by_block, AdmConfig};
pub use nullspace::{null_space_basis, NullSpaceBasis, RANK_TOL_REL};
pub use regression::{lasso, stlsq};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

/// A sparse coefficient vector with its threshold and fit quality.
///
/// Vectors from the null-space path have unit 2-norm in library-normalized
/// coordinates; vectors from the regression path are in raw coordinates.
#[derive(Debug, Clone)]
pub struct SparseCoefficients {
    pub xi: DVector<f64>,
    pub lambda: f64,
    pub active: Vec<bool>,
    /// `||Theta xi||_2 / sqrt(m)` for null-space vectors,
    /// `||Theta xi - xdot||_2 / sqrt(m)` for regression vectors.
    pub residual: f64,
    pub term_count: usize,
    pub converged: bool,
}

impl SparseCoefficients {
    /// Wrap a raw coefficient vector, deriving the active set and term count.
    pub fn from_vector(
        xi: DVector<f64>,
        lambda: f64,
        residual: f64,
        converged: bool,
    ) -> Self {
        let active: Vec<bool> = xi.iter().map(|&v| v != 0.0).collect();
        let term_count = active.iter().filter(|&&a| a).count();
        SparseCoefficients {
            xi,
            lambda,
            active,
            residual,
            term_count,
            converged,
        }
    }
}

/// Component-wise shrinkage: `sign(v) * max(|v| - lambda, 0)`.
pub fn soft_threshold(v: &DVector<f64>, lambda: f64) -> DVector<f64> {
    v.map(|x| {
        if x > lambda {
            x - lambda
        } else if x < -lambda {
            x + lambda
        } else {
            0.0
        }
    })
}

/// One sweep entry: the lambda value and the per-lambda outcome. Failures are
/// recorded instead of aborting the sweep.
#[derive(Debug)]
pub struct SweepEntry {
    pub lambda: f64,
    pub result: crate::error::Result<SparseCoefficients>,
}

/// Run the ADM search once per lambda value, ascending.
pub fn lambda_sweep(
    ns: &NullSpaceBasis,
    lambda_grid: &[f64],
    cfg: &AdmConfig,
) -> Vec<SweepEntry> {
    lambda_grid
        .iter()
        .map(|&lambda| SweepEntry {
            lambda,
            result: adm_sparsest_vector(ns, lambda, cfg),
        })
        .collect()
}

/// Log-spaced grid between `lo` and `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && count >= 2);
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (llo + (lhi - llo) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Serializable view of a sweep result, in library term order.
#[derive(Debug, Serialize, Deserialize)]
pub struct SweepRecord {
    pub lambda: f64,
    pub term_count: usize,
    pub residual: f64,
    pub xi: Vec<f64>,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SweepEntry {
    pub fn to_record(&self) -> SweepRecord {
        match &self.result {
            Ok(sc) => SweepRecord {
                lambda: self.lambda,
                term_count: sc.term_count,
                residual: sc.residual,
                xi: sc.xi.iter().copied().collect(),
                converged: sc.converged,
                error: None,
            },
            Err(e) => SweepRecord {
                lambda: self.lambda,
                term_count: 0,
                residual: f64::NAN,
                xi: Vec::new(),
                converged: false,
                error: Some(e.to_string()),
            },
        }
    }
}
