//! Ground-truth implicit coefficient vectors for known models, used as test
//! oracles and for projection diagnostics.

use std::collections::HashMap;

use nalgebra::DVector;

use crate::dynamics::{OdeModel, StateRhs};
use crate::error::{Error, Result};
use crate::library::implicit_terms;
use crate::poly::Poly;
use crate::sparse::fix_sign_by_block;

/// Exact coefficient vector of the cleared-denominator relation
/// `f_N(x) - f_D(x) dx_k = 0` of state `k`, expressed against the implicit
/// library with numerator degree `d_num` and denominator degree `d_den`.
/// Unit 2-norm, sign fixed so the largest-magnitude denominator-block entry
/// is positive.
pub fn implicit_coefficients(
    model: &OdeModel,
    state_index: usize,
    d_num: usize,
    d_den: usize,
) -> Result<DVector<f64>> {
    if state_index >= model.n_states {
        return Err(Error::DimensionMismatch(format!(
            "state index {} for a model with {} states",
            state_index, model.n_states
        )));
    }
    let n = model.n_states;
    let (num, den): (Poly, Poly) = match &model.rhs[state_index] {
        StateRhs::Polynomial { poly } => (poly.clone(), Poly::constant(n, 1.0)),
        StateRhs::Rational {
            numerator,
            denominator,
        } => (numerator.clone(), denominator.clone()),
    };

    let terms = implicit_terms(n, d_num, d_den, state_index);
    let mut num_pos: HashMap<&[u32], usize> = HashMap::new();
    let mut den_pos: HashMap<&[u32], usize> = HashMap::new();
    for (j, t) in terms.iter().enumerate() {
        if t.deriv_power == 0 {
            num_pos.insert(t.monomial.exponents.as_slice(), j);
        } else {
            den_pos.insert(t.monomial.exponents.as_slice(), j);
        }
    }

    let mut xi = DVector::zeros(terms.len());
    for (e, c) in num.iter() {
        let j = *num_pos.get(e.as_slice()).ok_or(Error::DegreeOverflow {
            state: state_index,
            need: e.iter().sum::<u32>() as usize,
            have: d_num,
        })?;
        xi[j] = c;
    }
    for (e, c) in den.iter() {
        let j = *den_pos.get(e.as_slice()).ok_or(Error::DegreeOverflow {
            state: state_index,
            need: e.iter().sum::<u32>() as usize,
            have: d_den,
        })?;
        // f_N - f_D dx = 0: derivative-block coefficients carry the minus
        xi[j] = -c;
    }

    let norm = xi.norm();
    if norm == 0.0 {
        return Err(Error::InvalidModel(format!(
            "state {} has an identically zero implicit relation",
            state_index
        )));
    }
    xi /= norm;
    let den_block: Vec<usize> = terms
        .iter()
        .enumerate()
        .filter(|(_, t)| t.deriv_power > 0)
        .map(|(j, _)| j)
        .collect();
    fix_sign_by_block(&mut xi, &den_block);
    Ok(xi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{make_benchmark, Benchmark};
    use approx::assert_relative_eq;
    use std::collections::BTreeMap;

    #[test]
    fn mm_has_two_numerator_and_two_denominator_terms() {
        let model = make_benchmark(Benchmark::MichaelisMenten, &BTreeMap::new()).unwrap();
        let xi = implicit_coefficients(&model, 0, 4, 4).unwrap();
        let terms = implicit_terms(1, 4, 4, 0);
        let num_active: Vec<_> = terms
            .iter()
            .enumerate()
            .filter(|(j, t)| t.deriv_power == 0 && xi[*j] != 0.0)
            .map(|(_, t)| t.monomial.exponents.clone())
            .collect();
        let den_active: Vec<_> = terms
            .iter()
            .enumerate()
            .filter(|(j, t)| t.deriv_power > 0 && xi[*j] != 0.0)
            .map(|(_, t)| t.monomial.exponents.clone())
            .collect();
        assert_eq!(num_active, vec![vec![0], vec![1]]);
        assert_eq!(den_active, vec![vec![0], vec![1]]);
        assert_relative_eq!(xi.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn regulatory_x2_structure_matches_cleared_form() {
        // clearing (1 + b2 x1^5)(...) gives 4 numerator and 6 denominator terms
        let model = make_benchmark(Benchmark::Regulatory, &BTreeMap::new()).unwrap();
        let xi = implicit_coefficients(&model, 1, 6, 6).unwrap();
        let terms = implicit_terms(2, 6, 6, 1);
        let num_count = terms
            .iter()
            .enumerate()
            .filter(|(j, t)| t.deriv_power == 0 && xi[*j] != 0.0)
            .count();
        let den_count = terms
            .iter()
            .enumerate()
            .filter(|(j, t)| t.deriv_power > 0 && xi[*j] != 0.0)
            .count();
        assert_eq!(num_count, 4);
        assert_eq!(den_count, 6);
        // denominator block sign convention: largest-magnitude entry positive
        let max_den = terms
            .iter()
            .enumerate()
            .filter(|(_, t)| t.deriv_power > 0)
            .map(|(j, _)| xi[j])
            .fold(0.0f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
        assert!(max_den > 0.0);
    }

    #[test]
    fn glycolysis_x2_structure() {
        let model = make_benchmark(Benchmark::Glycolysis, &BTreeMap::new()).unwrap();
        let xi = implicit_coefficients(&model, 1, 6, 6).unwrap();
        let terms = implicit_terms(7, 6, 6, 1);
        let num_count = terms
            .iter()
            .enumerate()
            .filter(|(j, t)| t.deriv_power == 0 && xi[*j] != 0.0)
            .count();
        let den_count = terms
            .iter()
            .enumerate()
            .filter(|(j, t)| t.deriv_power > 0 && xi[*j] != 0.0)
            .count();
        assert_eq!(num_count, 5);
        assert_eq!(den_count, 2);
    }

    #[test]
    fn degree_overflow_is_detected() {
        let model = make_benchmark(Benchmark::Regulatory, &BTreeMap::new()).unwrap();
        // x2's cleared numerator needs degree 6
        match implicit_coefficients(&model, 1, 3, 6) {
            Err(Error::DegreeOverflow { state: 1, need, have: 3 }) => assert!(need > 3),
            other => panic!("expected DegreeOverflow, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn polynomial_state_has_unit_denominator() {
        let model = make_benchmark(Benchmark::Glycolysis, &BTreeMap::new()).unwrap();
        // x5 is polynomial: g1 x4 + g2 x5 - dx = 0
        let xi = implicit_coefficients(&model, 4, 2, 2).unwrap();
        let terms = implicit_terms(7, 2, 2, 4);
        let active: Vec<usize> = (0..terms.len()).filter(|&j| xi[j] != 0.0).collect();
        assert_eq!(active.len(), 3);
        // the constant derivative term must be the only denominator entry
        let den_active: Vec<&Vec<u32>> = active
            .iter()
            .filter(|&&j| terms[j].deriv_power > 0)
            .map(|&j| &terms[j].monomial.exponents)
            .collect();
        assert_eq!(den_active, vec![&vec![0u32; 7]]);
    }
}
