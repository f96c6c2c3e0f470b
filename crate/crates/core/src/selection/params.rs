//! Map identified coefficient maps back to the named parameters of the
//! benchmark systems. Each correspondence is an explicit algebraic formula
//! over the normalized numerator/denominator coefficients; no generic
//! rational-function factorization is attempted.

use std::collections::BTreeMap;

use super::{IdentifiedModel, StateModel};
use crate::dynamics::Benchmark;
use crate::error::{Error, Result};
use crate::poly::Poly;

fn rational_parts(model: &IdentifiedModel, k: usize) -> Result<(&Poly, &Poly)> {
    match model.states.get(k) {
        Some(StateModel::Rational(r)) => Ok((&r.numerator, &r.denominator)),
        Some(StateModel::Polynomial { .. }) => Err(Error::InvalidModel(format!(
            "state {} was identified as polynomial but the correspondence needs a rational form",
            k
        ))),
        None => Err(Error::InvalidModel(format!("missing state {}", k))),
    }
}

/// Polynomial coefficients of state `k`, whether identified explicitly or as
/// a rational model with trivial denominator.
fn poly_part(model: &IdentifiedModel, k: usize) -> Result<&Poly> {
    match model.states.get(k) {
        Some(StateModel::Polynomial { poly, .. }) => Ok(poly),
        Some(StateModel::Rational(r)) if r.denominator.n_terms() == 1 => Ok(&r.numerator),
        Some(StateModel::Rational(_)) => Err(Error::InvalidModel(format!(
            "state {} was identified with a nontrivial denominator but the correspondence needs a polynomial",
            k
        ))),
        None => Err(Error::InvalidModel(format!("missing state {}", k))),
    }
}

fn nonzero(name: &str, v: f64) -> Result<f64> {
    if v == 0.0 {
        return Err(Error::InvalidModel(format!(
            "coefficient needed for parameter '{}' is zero",
            name
        )));
    }
    Ok(v)
}

/// Recover the named benchmark parameters from an identified model, using
/// the cleared-and-normalized coefficient correspondences of each system.
pub fn extract_benchmark_params(
    benchmark: Benchmark,
    model: &IdentifiedModel,
) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    match benchmark {
        Benchmark::MichaelisMenten => {
            // dx = (jx + (jx - Vmax)/Km x) / (1 + x/Km)
            let (num, den) = rational_parts(model, 0)?;
            let q1 = nonzero("k_m", den.coeff(&[1]))?;
            let k_m = 1.0 / q1;
            let j_x = num.constant_term();
            let v_max = j_x - num.coeff(&[1]) * k_m;
            out.insert("j_x".into(), j_x);
            out.insert("v_max".into(), v_max);
            out.insert("k_m".into(), k_m);
        }
        Benchmark::Regulatory => {
            // dx1 = (a1 + ((a1+a2)/a3) x1^2 - x1 - x1^3/a3) / (1 + x1^2/a3)
            let (num1, den1) = rational_parts(model, 0)?;
            let a3 = 1.0 / nonzero("a3", den1.coeff(&[2, 0]))?;
            let a1 = num1.constant_term();
            let a2 = num1.coeff(&[2, 0]) * a3 - a1;
            // dx2 = (b1 - x2 - b2 x1^5 x2) / (1 + b2 x1^5)
            let (num2, den2) = rational_parts(model, 1)?;
            let b1 = num2.constant_term();
            let b2 = den2.coeff(&[5, 0]);
            out.insert("a1".into(), a1);
            out.insert("a2".into(), a2);
            out.insert("a3".into(), a3);
            out.insert("b1".into(), b1);
            out.insert("b2".into(), b2);
        }
        Benchmark::Glycolysis => {
            let e = |spec: &[(usize, u32)]| {
                let mut v = vec![0u32; 7];
                for &(i, p) in spec {
                    v[i] = p;
                }
                v
            };
            // dx1 = (c1 (1 + c3 x6^4) + c2 x1 x6) / (1 + c3 x6^4)
            let (num1, den1) = rational_parts(model, 0)?;
            out.insert("c3".into(), den1.coeff(&e(&[(5, 4)])));
            out.insert("c1".into(), num1.constant_term());
            out.insert("c2".into(), num1.coeff(&e(&[(0, 1), (5, 1)])));
            // dx2 = (d1 x1 x6 + (d3 x2 - d4 x2 x7)(1 + d2 x6^4)) / (1 + d2 x6^4)
            let (num2, den2) = rational_parts(model, 1)?;
            out.insert("d2".into(), den2.coeff(&e(&[(5, 4)])));
            out.insert("d1".into(), num2.coeff(&e(&[(0, 1), (5, 1)])));
            out.insert("d3".into(), num2.coeff(&e(&[(1, 1)])));
            out.insert("d4".into(), -num2.coeff(&e(&[(1, 1), (6, 1)])));
            // dx3 = e1 x2 + e2 x3 + e3 x2 x7 + e4 x3 x6
            let p3 = poly_part(model, 2)?;
            out.insert("e1".into(), p3.coeff(&e(&[(1, 1)])));
            out.insert("e2".into(), p3.coeff(&e(&[(2, 1)])));
            out.insert("e3".into(), p3.coeff(&e(&[(1, 1), (6, 1)])));
            out.insert("e4".into(), p3.coeff(&e(&[(2, 1), (5, 1)])));
            // dx4 = f1 x3 + f2 x4 + f3 x5 + f4 x3 x6 + f5 x4 x7
            let p4 = poly_part(model, 3)?;
            out.insert("f1".into(), p4.coeff(&e(&[(2, 1)])));
            out.insert("f2".into(), p4.coeff(&e(&[(3, 1)])));
            out.insert("f3".into(), p4.coeff(&e(&[(4, 1)])));
            out.insert("f4".into(), p4.coeff(&e(&[(2, 1), (5, 1)])));
            out.insert("f5".into(), p4.coeff(&e(&[(3, 1), (6, 1)])));
            // dx5 = g1 x4 + g2 x5
            let p5 = poly_part(model, 4)?;
            out.insert("g1".into(), p5.coeff(&e(&[(3, 1)])));
            out.insert("g2".into(), p5.coeff(&e(&[(4, 1)])));
            // dx6 = (h1 x1 x6 + (h3 x3 + h4 x3 x7 + h5 x6)(1 + h2 x6^4)) / (1 + h2 x6^4)
            let (num6, den6) = rational_parts(model, 5)?;
            out.insert("h2".into(), den6.coeff(&e(&[(5, 4)])));
            out.insert("h1".into(), num6.coeff(&e(&[(0, 1), (5, 1)])));
            out.insert("h3".into(), num6.coeff(&e(&[(2, 1)])));
            out.insert("h4".into(), num6.coeff(&e(&[(2, 1), (6, 1)])));
            out.insert("h5".into(), num6.coeff(&e(&[(5, 1)])));
            // dx7 = j1 x2 + j2 x2 x7 + j3 x4 x7
            let p7 = poly_part(model, 6)?;
            out.insert("j1".into(), p7.coeff(&e(&[(1, 1)])));
            out.insert("j2".into(), p7.coeff(&e(&[(1, 1), (6, 1)])));
            out.insert("j3".into(), p7.coeff(&e(&[(3, 1), (6, 1)])));
        }
    }
    Ok(out)
}
