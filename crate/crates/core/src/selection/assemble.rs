//! From a sparse implicit coefficient vector to a rational state model.

use serde::{Deserialize, Serialize};

use crate::dynamics::StateRhs;
use crate::error::{Error, Result};
use crate::library::{EvaluatedLibrary, LibraryMode};
use crate::poly::Poly;
use crate::sparse::SparseCoefficients;

pub const PRUNE_TOL_DEFAULT: f64 = 1e-3;

/// Which denominator coefficient was divided through to fix the overall
/// scale of the rational function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "term")]
pub enum DenominatorNormalization {
    /// Standard convention: the constant denominator term equals 1.
    ConstantTerm,
    /// Fallback when the constant term is inactive: the smallest-degree
    /// active denominator monomial (recorded here) was set to 1.
    SmallestDegreeTerm(Vec<u32>),
}

/// `dx_k/dt = numerator(x) / denominator(x)` for a single state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalStateModel {
    pub state_index: usize,
    pub numerator: Poly,
    pub denominator: Poly,
    pub normalization: DenominatorNormalization,
}

impl RationalStateModel {
    pub fn to_state_rhs(&self) -> StateRhs {
        StateRhs::Rational {
            numerator: self.numerator.clone(),
            denominator: self.denominator.clone(),
        }
    }
}

/// Zero block entries smaller than `tol` relative to the block's largest
/// magnitude. Operates on the scaled (column-normalized) coordinates the
/// sparse search ran in, where genuine small model coefficients are not
/// dwarfed by large ones the way they can be after unscaling.
fn prune_block(xi: &mut nalgebra::DVector<f64>, indices: &[usize], tol: f64) {
    let max = indices.iter().map(|&j| xi[j].abs()).fold(0.0f64, f64::max);
    if max == 0.0 {
        return;
    }
    for &j in indices {
        if xi[j].abs() < tol * max {
            xi[j] = 0.0;
        }
    }
}

fn graded_min_term(poly: &Poly) -> Option<(Vec<u32>, f64)> {
    poly.iter()
        .min_by_key(|(e, _)| (e.iter().sum::<u32>(), (*e).clone()))
        .map(|(e, c)| (e.clone(), c))
}

/// Interpret a sparse vector over an implicit library as a rational model:
/// split into the state-monomial block xi_N and the derivative block xi_D,
/// undo column scaling, and form `dx_k = (Theta_N xi_N) / (-Theta_D xi_D)`.
/// Entries below `prune_tol` relative to their block maximum (in the scaled
/// coordinates the search ran in) are dropped first; then a common monomial
/// factor of the two blocks is cancelled and the result is normalized so the
/// constant denominator coefficient is 1 (or the documented smallest-degree
/// fallback).
pub fn assemble_rational_model(
    xi: &SparseCoefficients,
    lib: &EvaluatedLibrary,
    prune_tol: f64,
) -> Result<RationalStateModel> {
    if lib.mode != LibraryMode::Implicit {
        return Err(Error::InvalidConfig(
            "rational assembly requires an implicit-mode library".into(),
        ));
    }
    if xi.xi.len() != lib.n_terms() {
        return Err(Error::DimensionMismatch(format!(
            "coefficient vector of length {} for a library with {} terms",
            xi.xi.len(),
            lib.n_terms()
        )));
    }
    let den_idx = lib.denominator_indices();
    if den_idx.is_empty() {
        return Err(Error::NoDenominatorTerms);
    }
    let mut scaled = xi.xi.clone();
    prune_block(&mut scaled, &lib.numerator_indices(), prune_tol);
    prune_block(&mut scaled, &den_idx, prune_tol);
    let raw = lib.coeffs_from_scaled(&scaled);
    let n_vars = lib.terms[0].monomial.exponents.len();
    let state_index = lib.terms[den_idx[0]].deriv_index;

    let mut numerator = Poly::zero(n_vars);
    for j in lib.numerator_indices() {
        if raw[j] != 0.0 {
            numerator.add_term(&lib.terms[j].monomial.exponents, raw[j]);
        }
    }
    let mut denominator = Poly::zero(n_vars);
    for &j in &den_idx {
        if raw[j] != 0.0 {
            // Theta_N xi_N + dx * (den-block terms) = 0  =>  the denominator
            // polynomial carries the opposite sign
            denominator.add_term(&lib.terms[j].monomial.exponents, -raw[j]);
        }
    }
    if denominator.is_zero() {
        return Err(Error::NoDenominatorTerms);
    }

    let mut numerator = numerator;

    // cancel a shared monomial factor (e.g. when the sparse search finds a
    // monomial multiple of the minimal relation)
    if !numerator.is_zero() {
        let gn = numerator.common_monomial();
        let gd = denominator.common_monomial();
        let g: Vec<u32> = gn.iter().zip(gd.iter()).map(|(&a, &b)| a.min(b)).collect();
        if g.iter().any(|&e| e > 0) {
            numerator = numerator.div_monomial(&g)?;
            denominator = denominator.div_monomial(&g)?;
        }
    } else {
        log::warn!(
            "state {}: all numerator terms pruned; assembled model is identically zero",
            state_index
        );
        let g = denominator.common_monomial();
        if g.iter().any(|&e| e > 0) {
            denominator = denominator.div_monomial(&g)?;
        }
    }

    let c0 = denominator.constant_term();
    let normalization = if c0 != 0.0 {
        numerator = numerator.scale(1.0 / c0);
        denominator = denominator.scale(1.0 / c0);
        DenominatorNormalization::ConstantTerm
    } else {
        let (exps, c) = graded_min_term(&denominator).expect("denominator is nonzero");
        log::warn!(
            "state {}: constant denominator term inactive; normalizing by the smallest-degree active term",
            state_index
        );
        numerator = numerator.scale(1.0 / c);
        denominator = denominator.scale(1.0 / c);
        DenominatorNormalization::SmallestDegreeTerm(exps)
    };

    Ok(RationalStateModel {
        state_index,
        numerator,
        denominator,
        normalization,
    })
}
