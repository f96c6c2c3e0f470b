//! Model selection: Pareto front over the lambda sweep, knee (error-cliff)
//! selection, assembly of rational state models, and validation against a
//! reference system.

mod assemble;
mod model;
mod oracle;
mod params;
mod validate;

pub use assemble::{assemble_rational_model, DenominatorNormalization, RationalStateModel, PRUNE_TOL_DEFAULT};
pub use model::{IdentificationMethod, IdentifiedModel, StateModel, StateProvenance};
pub use oracle::implicit_coefficients;
pub use params::extract_benchmark_params;
pub use validate::{validate_model, IcValidation, ParamComparison, ValidationReport};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::SparseCoefficients;

pub const DROP_THRESHOLD_DEFAULT: f64 = 2.0;

/// One point of the Pareto front: the best (minimum-residual) candidate at a
/// given sparsity level.
#[derive(Debug, Clone)]
pub struct ParetoPoint {
    pub term_count: usize,
    pub residual: f64,
    pub lambda: f64,
    pub xi: DVector<f64>,
    pub converged: bool,
}

/// Sparsity / residual trade-off curve, term counts strictly increasing.
#[derive(Debug, Clone)]
pub struct ParetoFront {
    pub points: Vec<ParetoPoint>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KneeStatus {
    /// A qualifying log-residual cliff was found.
    Cliff,
    /// No drop of the required size: fell back to the minimum-residual point.
    NoCliff,
    /// The front has a single point.
    SinglePoint,
}

#[derive(Debug, Clone)]
pub struct KneeSelection {
    pub point: ParetoPoint,
    pub status: KneeStatus,
}

impl KneeSelection {
    pub fn coefficients(&self) -> SparseCoefficients {
        SparseCoefficients::from_vector(
            self.point.xi.clone(),
            self.point.lambda,
            self.point.residual,
            self.point.converged,
        )
    }
}

/// Reduce sweep candidates to the per-term-count minimum-residual points,
/// sorted by term count. Zero-term and non-finite candidates are dropped; at
/// least one converged candidate must survive.
pub fn pareto_front(candidates: &[SparseCoefficients]) -> Result<ParetoFront> {
    use std::collections::BTreeMap;
    let mut best: BTreeMap<usize, &SparseCoefficients> = BTreeMap::new();
    let mut any_converged = false;
    for c in candidates {
        if c.term_count == 0 || !c.residual.is_finite() {
            continue;
        }
        any_converged |= c.converged;
        match best.get(&c.term_count) {
            Some(prev) if prev.residual <= c.residual => {}
            _ => {
                best.insert(c.term_count, c);
            }
        }
    }
    if best.is_empty() || !any_converged {
        return Err(Error::NoValidCandidates);
    }
    let points = best
        .into_values()
        .map(|c| ParetoPoint {
            term_count: c.term_count,
            residual: c.residual,
            lambda: c.lambda,
            xi: c.xi.clone(),
            converged: c.converged,
        })
        .collect();
    Ok(ParetoFront { points })
}

/// Scan from sparsest to densest and return the sparsest point that sits
/// immediately after a log10 residual drop of at least `drop_threshold`
/// decades and that no denser point improves on by another such drop. The
/// second condition skips false cliffs on the sparse side without comparing
/// against the raw global minimum, which denser models can push arbitrarily
/// far below the data's noise floor. Falls back to the
/// global-minimum-residual point when no drop qualifies.
pub fn select_knee(front: &ParetoFront, drop_threshold: f64) -> Result<KneeSelection> {
    if front.points.is_empty() {
        return Err(Error::EmptyFront);
    }
    if front.points.len() == 1 {
        log::warn!("Pareto front has a single point; selection is unconstrained");
        return Ok(KneeSelection {
            point: front.points[0].clone(),
            status: KneeStatus::SinglePoint,
        });
    }
    // floor keeps log10 finite for numerically zero residuals
    let floor = 1e-300;
    let n = front.points.len();
    // suffix_min[i] = smallest residual among points denser than i
    let mut suffix_min = vec![f64::INFINITY; n];
    for i in (0..n - 1).rev() {
        suffix_min[i] = suffix_min[i + 1].min(front.points[i + 1].residual.max(floor));
    }
    for i in 1..n {
        let prev = front.points[i - 1].residual.max(floor);
        let cur = front.points[i].residual.max(floor);
        let drop = prev.log10() - cur.log10();
        let beaten = cur.log10() - suffix_min[i].max(floor).log10() >= drop_threshold;
        if drop >= drop_threshold && !beaten {
            return Ok(KneeSelection {
                point: front.points[i].clone(),
                status: KneeStatus::Cliff,
            });
        }
    }
    log::warn!(
        "no residual cliff of {} decades on the front; falling back to the minimum-residual point",
        drop_threshold
    );
    let best = front
        .points
        .iter()
        .min_by(|a, b| a.residual.partial_cmp(&b.residual).unwrap())
        .unwrap();
    Ok(KneeSelection {
        point: best.clone(),
        status: KneeStatus::NoCliff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cand(term_count: usize, residual: f64, lambda: f64) -> SparseCoefficients {
        let mut xi = DVector::zeros(8);
        for j in 0..term_count {
            xi[j] = 1.0;
        }
        if term_count > 0 {
            xi /= xi.norm();
        }
        SparseCoefficients::from_vector(xi, lambda, residual, true)
    }

    #[test]
    fn front_deduplicates_by_minimal_residual() {
        let cands = vec![
            cand(4, 1e-5, 0.2),
            cand(4, 1e-3, 0.1),
            cand(6, 1e-6, 0.05),
            cand(2, 0.5, 0.4),
        ];
        let front = pareto_front(&cands).unwrap();
        let counts: Vec<usize> = front.points.iter().map(|p| p.term_count).collect();
        assert_eq!(counts, vec![2, 4, 6]);
        assert_eq!(front.points[1].residual, 1e-5);
        assert_eq!(front.points[1].lambda, 0.2);
    }

    #[test]
    fn zero_term_candidates_are_excluded() {
        let cands = vec![cand(0, 0.0, 1.0), cand(3, 1e-4, 0.1)];
        let front = pareto_front(&cands).unwrap();
        assert_eq!(front.points.len(), 1);
        assert_eq!(front.points[0].term_count, 3);
    }

    #[test]
    fn empty_candidates_are_rejected() {
        assert!(matches!(
            pareto_front(&[]),
            Err(Error::NoValidCandidates)
        ));
        assert!(matches!(
            pareto_front(&[cand(0, 0.0, 1.0)]),
            Err(Error::NoValidCandidates)
        ));
    }

    #[test]
    fn knee_finds_the_cliff() {
        // residual plateau around 1e-2, cliff to 1e-6 at 4 terms
        let cands = vec![
            cand(2, 2e-2, 0.9),
            cand(3, 1e-2, 0.5),
            cand(4, 1e-6, 0.2),
            cand(5, 8e-7, 0.1),
            cand(7, 5e-7, 0.05),
        ];
        let front = pareto_front(&cands).unwrap();
        let knee = select_knee(&front, 2.0).unwrap();
        assert_eq!(knee.status, KneeStatus::Cliff);
        assert_eq!(knee.point.term_count, 4);
    }

    #[test]
    fn false_cliff_beaten_by_a_denser_drop_is_skipped() {
        // big drop at 3 terms, but denser models still gain 5 decades:
        // selection must skip it and take the second cliff at 5 terms
        let cands = vec![
            cand(2, 1.0, 0.9),
            cand(3, 1e-3, 0.5),
            cand(5, 1e-8, 0.2),
            cand(6, 9e-9, 0.1),
        ];
        let front = pareto_front(&cands).unwrap();
        let knee = select_knee(&front, 2.0).unwrap();
        assert_eq!(knee.status, KneeStatus::Cliff);
        assert_eq!(knee.point.term_count, 5);
    }

    #[test]
    fn knee_tolerates_denser_overfits_below_the_noise_floor() {
        // cliff at 4 terms; denser models edge below it by little more than
        // a decade (fitting noise), which must not drag the knee off the
        // sparse model
        let cands = vec![
            cand(2, 8e-3, 0.9),
            cand(3, 2e-3, 0.5),
            cand(4, 2e-6, 0.2),
            cand(6, 8e-8, 0.1),
        ];
        let front = pareto_front(&cands).unwrap();
        let knee = select_knee(&front, 2.0).unwrap();
        assert_eq!(knee.status, KneeStatus::Cliff);
        assert_eq!(knee.point.term_count, 4);
    }

    #[test]
    fn no_cliff_falls_back_to_minimum_residual() {
        let cands = vec![cand(2, 1e-2, 0.9), cand(4, 5e-3, 0.5), cand(6, 2e-3, 0.2)];
        let front = pareto_front(&cands).unwrap();
        let knee = select_knee(&front, 2.0).unwrap();
        assert_eq!(knee.status, KneeStatus::NoCliff);
        assert_eq!(knee.point.term_count, 6);
    }

    #[test]
    fn single_point_front_is_returned_with_warning_status() {
        let cands = vec![cand(4, 1e-4, 0.3)];
        let front = pareto_front(&cands).unwrap();
        let knee = select_knee(&front, 2.0).unwrap();
        assert_eq!(knee.status, KneeStatus::SinglePoint);
        assert_eq!(knee.point.term_count, 4);
    }
}
