//! Multivariate polynomials stored as exponent-vector → coefficient maps.
//!
//! Used both for defining right-hand sides of models and for the exact
//! expansion that clears denominators of a known rational model.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One monomial term with its coefficient, the JSON wire form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolyTerm {
    pub exponents: Vec<u32>,
    pub coeff: f64,
}

/// A polynomial in `n_vars` variables. Terms with zero coefficient are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    n_vars: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Poly {
    pub fn zero(n_vars: usize) -> Self {
        Poly {
            n_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n_vars: usize, c: f64) -> Self {
        let mut p = Poly::zero(n_vars);
        p.add_term(&vec![0; n_vars], c);
        p
    }

    /// The monomial `x_i` in `n_vars` variables.
    pub fn var(n_vars: usize, i: usize) -> Self {
        assert!(i < n_vars);
        let mut e = vec![0; n_vars];
        e[i] = 1;
        let mut p = Poly::zero(n_vars);
        p.add_term(&e, 1.0);
        p
    }

    pub fn monomial(exponents: &[u32], coeff: f64) -> Self {
        let mut p = Poly::zero(exponents.len());
        p.add_term(exponents, coeff);
        p
    }

    pub fn from_terms(n_vars: usize, terms: &[(Vec<u32>, f64)]) -> Result<Self> {
        let mut p = Poly::zero(n_vars);
        for (e, c) in terms {
            if e.len() != n_vars {
                return Err(Error::DimensionMismatch(format!(
                    "exponent vector of length {} in a polynomial over {} variables",
                    e.len(),
                    n_vars
                )));
            }
            p.add_term(e, *c);
        }
        Ok(p)
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    /// Total degree; zero polynomial reports degree 0.
    pub fn degree(&self) -> usize {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn coeff(&self, exponents: &[u32]) -> f64 {
        self.terms.get(exponents).copied().unwrap_or(0.0)
    }

    pub fn constant_term(&self) -> f64 {
        self.coeff(&vec![0; self.n_vars])
    }

    pub fn add_term(&mut self, exponents: &[u32], coeff: f64) {
        if coeff == 0.0 {
            return;
        }
        let entry = self.terms.entry(exponents.to_vec()).or_insert(0.0);
        *entry += coeff;
        if *entry == 0.0 {
            self.terms.remove(exponents);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<u32>, f64)> {
        self.terms.iter().map(|(e, &c)| (e, c))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n_vars);
        self.terms
            .iter()
            .map(|(e, c)| {
                c * e
                    .iter()
                    .zip(x)
                    .map(|(&p, &xi)| xi.powi(p as i32))
                    .product::<f64>()
            })
            .sum()
    }

    pub fn add(&self, other: &Poly) -> Poly {
        assert_eq!(self.n_vars, other.n_vars);
        let mut out = self.clone();
        for (e, c) in other.iter() {
            out.add_term(e, c);
        }
        out
    }

    pub fn scale(&self, s: f64) -> Poly {
        let mut out = Poly::zero(self.n_vars);
        for (e, c) in self.iter() {
            out.add_term(e, c * s);
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        assert_eq!(self.n_vars, other.n_vars);
        let mut out = Poly::zero(self.n_vars);
        for (ea, ca) in self.iter() {
            for (eb, cb) in other.iter() {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(&e, ca * cb);
            }
        }
        out
    }

    /// Drop terms whose exponent vector is exactly `shift` lower in every
    /// position; errors if any term cannot be divided.
    pub fn div_monomial(&self, shift: &[u32]) -> Result<Poly> {
        let mut out = Poly::zero(self.n_vars);
        for (e, c) in self.iter() {
            let mut reduced = Vec::with_capacity(e.len());
            for (a, b) in e.iter().zip(shift) {
                if a < b {
                    return Err(Error::InvalidModel(
                        "polynomial is not divisible by the given monomial".into(),
                    ));
                }
                reduced.push(a - b);
            }
            out.add_term(&reduced, c);
        }
        Ok(out)
    }

    /// Component-wise minimum exponent over all terms (the common monomial factor).
    pub fn common_monomial(&self) -> Vec<u32> {
        let mut min = vec![u32::MAX; self.n_vars];
        for (e, _) in self.iter() {
            for (m, &v) in min.iter_mut().zip(e) {
                *m = (*m).min(v);
            }
        }
        if self.terms.is_empty() {
            min.fill(0);
        }
        min
    }

    pub fn to_terms(&self) -> Vec<PolyTerm> {
        self.iter()
            .map(|(e, c)| PolyTerm {
                exponents: e.clone(),
                coeff: c,
            })
            .collect()
    }

    pub fn from_term_list(n_vars: usize, terms: &[PolyTerm]) -> Result<Self> {
        let pairs: Vec<(Vec<u32>, f64)> = terms
            .iter()
            .map(|t| (t.exponents.clone(), t.coeff))
            .collect();
        Poly::from_terms(n_vars, &pairs)
    }
}

impl Serialize for Poly {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_terms().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Poly {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let terms = Vec::<PolyTerm>::deserialize(deserializer)?;
        let n_vars = terms
            .first()
            .map(|t| t.exponents.len())
            .ok_or_else(|| serde::de::Error::custom("empty term list has no arity"))?;
        Poly::from_term_list(n_vars, &terms).map_err(serde::de::Error::custom)
    }
}

/// Render a polynomial as e.g. `0.6 - 1.5*x1 + 2*x1^2*x2`.
impl std::fmt::Display for Poly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        // sort by (degree, lex) so the constant prints first
        let mut terms: Vec<_> = self.iter().collect();
        terms.sort_by_key(|(e, _)| (e.iter().sum::<u32>(), (*e).clone()));
        for (i, (e, c)) in terms.iter().enumerate() {
            let mag = c.abs();
            if i == 0 {
                if *c < 0.0 {
                    write!(f, "-")?;
                }
            } else if *c < 0.0 {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let is_const = e.iter().all(|&p| p == 0);
            if is_const || (mag - 1.0).abs() > 1e-12 {
                write!(f, "{}", mag)?;
                if !is_const {
                    write!(f, "*")?;
                }
            }
            let mut first = true;
            for (j, &p) in e.iter().enumerate() {
                if p == 0 {
                    continue;
                }
                if !first {
                    write!(f, "*")?;
                }
                first = false;
                write!(f, "x{}", j + 1)?;
                if p > 1 {
                    write!(f, "^{}", p)?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn eval_and_arithmetic() {
        let n = 2;
        // p = 1 + 2 x1 - x2^2
        let p = Poly::from_terms(n, &[(vec![0, 0], 1.0), (vec![1, 0], 2.0), (vec![0, 2], -1.0)])
            .unwrap();
        assert_relative_eq!(p.eval(&[3.0, 2.0]), 1.0 + 6.0 - 4.0);
        let q = Poly::var(n, 0);
        let pq = p.mul(&q);
        assert_relative_eq!(pq.eval(&[3.0, 2.0]), 3.0 * 3.0);
        assert_eq!(pq.degree(), 3);
    }

    #[test]
    fn cancelling_terms_are_removed() {
        let mut p = Poly::var(1, 0);
        p.add_term(&[1], -1.0);
        assert!(p.is_zero());
    }

    #[test]
    fn common_monomial_and_division() {
        // x1^2 x2 + x1 x2^2  =>  common factor x1 x2
        let p = Poly::from_terms(2, &[(vec![2, 1], 1.0), (vec![1, 2], 1.0)]).unwrap();
        assert_eq!(p.common_monomial(), vec![1, 1]);
        let q = p.div_monomial(&[1, 1]).unwrap();
        assert_eq!(q.coeff(&[1, 0]), 1.0);
        assert_eq!(q.coeff(&[0, 1]), 1.0);
    }

    #[test]
    fn json_round_trip() {
        let p = Poly::from_terms(2, &[(vec![0, 0], 0.5), (vec![5, 1], -3.25)]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        let q: Poly = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn display_is_readable() {
        let p = Poly::from_terms(2, &[(vec![0, 0], 0.6), (vec![1, 0], -1.5)]).unwrap();
        assert_eq!(format!("{}", p), "0.6 - 1.5*x1");
    }
}
