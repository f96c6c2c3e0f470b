//! Candidate-function libraries.
//!
//! Enumerates basis terms (monomials in the state, optionally multiplied by a
//! power of one state derivative, plus optional trigonometric columns) and
//! evaluates them on data to produce the Θ matrix used by both the explicit
//! regression path and the implicit null-space path.
//!
//! Term ordering is fixed: blocks by derivative power ascending (so the
//! numerator block comes before the denominator block in implicit mode), and
//! graded-lexicographic within each block. Coefficient indices are therefore
//! stable across runs and serializations.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A product of state variables, `x1^e1 * ... * xn^en`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Monomial {
    pub exponents: Vec<u32>,
}

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }

    pub fn eval(&self, state: &[f64]) -> f64 {
        self.exponents
            .iter()
            .zip(state)
            .map(|(&e, &x)| x.powi(e as i32))
            .product()
    }
}

/// Trigonometric column of one state variable at a fixed frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigFactor {
    pub kind: TrigKind,
    pub state: usize,
    pub frequency: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrigKind {
    Sin,
    Cos,
}

/// One library basis function: a monomial times `(dx_k)^deriv_power`,
/// optionally times a trigonometric factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LibraryTerm {
    /// Flattened so terms serialize as `{exponents, deriv_power, deriv_index}`.
    #[serde(flatten)]
    pub monomial: Monomial,
    #[serde(default)]
    pub deriv_power: u32,
    #[serde(default)]
    pub deriv_index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trig: Option<TrigFactor>,
}

impl LibraryTerm {
    pub fn monomial_only(exponents: Vec<u32>) -> Self {
        LibraryTerm {
            monomial: Monomial { exponents },
            deriv_power: 0,
            deriv_index: 0,
            trig: None,
        }
    }

    /// Evaluate on one sample (state plus, when needed, the derivative of
    /// state `deriv_index`).
    pub fn eval(&self, state: &[f64], xdot_k: f64) -> f64 {
        let mut v = self.monomial.eval(state);
        if self.deriv_power > 0 {
            v *= xdot_k.powi(self.deriv_power as i32);
        }
        if let Some(t) = self.trig {
            let arg = t.frequency * state[t.state];
            v *= match t.kind {
                TrigKind::Sin => arg.sin(),
                TrigKind::Cos => arg.cos(),
            };
        }
        v
    }
}

impl std::fmt::Display for LibraryTerm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        for (i, &e) in self.monomial.exponents.iter().enumerate() {
            if e == 1 {
                parts.push(format!("x{}", i + 1));
            } else if e > 1 {
                parts.push(format!("x{}^{}", i + 1, e));
            }
        }
        if self.deriv_power == 1 {
            parts.push(format!("dx{}", self.deriv_index + 1));
        } else if self.deriv_power > 1 {
            parts.push(format!("dx{}^{}", self.deriv_index + 1, self.deriv_power));
        }
        if let Some(t) = self.trig {
            let name = match t.kind {
                TrigKind::Sin => "sin",
                TrigKind::Cos => "cos",
            };
            parts.push(format!("{}({}*x{})", name, t.frequency, t.state + 1));
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LibraryMode {
    Explicit,
    Implicit,
    Mixed,
}

/// Declarative library description, the JSON wire form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LibrarySpec {
    pub mode: LibraryMode,
    pub d_num: usize,
    pub d_den: usize,
    #[serde(default)]
    pub deriv_index: usize,
    #[serde(default)]
    pub include_trig: bool,
    #[serde(default)]
    pub frequencies: Vec<f64>,
}

impl LibrarySpec {
    pub fn explicit(d: usize) -> Self {
        LibrarySpec {
            mode: LibraryMode::Explicit,
            d_num: d,
            d_den: 0,
            deriv_index: 0,
            include_trig: false,
            frequencies: Vec::new(),
        }
    }

    pub fn implicit(d_num: usize, d_den: usize, deriv_index: usize) -> Self {
        LibrarySpec {
            mode: LibraryMode::Implicit,
            d_num,
            d_den,
            deriv_index,
            include_trig: false,
            frequencies: Vec::new(),
        }
    }
}

/// Θ matrix with its term list and per-column scaling.
#[derive(Debug, Clone)]
pub struct EvaluatedLibrary {
    /// m × p matrix; column j holds term j evaluated on every sample, divided
    /// by `column_scales[j]`.
    pub matrix: DMatrix<f64>,
    pub terms: Vec<LibraryTerm>,
    /// Original column 2-norms when normalized, all ones otherwise.
    pub column_scales: DVector<f64>,
    pub mode: LibraryMode,
}

impl EvaluatedLibrary {
    pub fn n_samples(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    /// Rescale every column to unit 2-norm, recording the original norms.
    pub fn normalize_columns(&self) -> Result<EvaluatedLibrary> {
        let mut matrix = self.matrix.clone();
        let mut scales = self.column_scales.clone();
        for j in 0..matrix.ncols() {
            let norm = matrix.column(j).norm();
            if norm == 0.0 {
                return Err(Error::ZeroColumn(j));
            }
            matrix.column_mut(j).scale_mut(1.0 / norm);
            scales[j] *= norm;
        }
        Ok(EvaluatedLibrary {
            matrix,
            terms: self.terms.clone(),
            column_scales: scales,
            mode: self.mode,
        })
    }

    /// Undo column scaling: reconstruct the raw Θ matrix.
    pub fn unscale(&self) -> DMatrix<f64> {
        let mut matrix = self.matrix.clone();
        for j in 0..matrix.ncols() {
            let s = self.column_scales[j];
            matrix.column_mut(j).scale_mut(s);
        }
        matrix
    }

    /// Map a coefficient vector against the stored (scaled) columns to
    /// coefficients against the raw basis functions.
    pub fn coeffs_from_scaled(&self, xi: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            xi.len(),
            xi.iter()
                .zip(self.column_scales.iter())
                .map(|(&v, &s)| v / s),
        )
    }

    /// Inverse of [`Self::coeffs_from_scaled`].
    pub fn coeffs_to_scaled(&self, coeffs: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            coeffs.len(),
            coeffs
                .iter()
                .zip(self.column_scales.iter())
                .map(|(&v, &s)| v * s),
        )
    }

    #[cfg(test)]
    pub(crate) fn from_matrix_for_tests(matrix: DMatrix<f64>, mode: LibraryMode) -> Self {
        let p = matrix.ncols();
        EvaluatedLibrary {
            matrix,
            terms: vec![LibraryTerm::monomial_only(vec![0]); p],
            column_scales: DVector::from_element(p, 1.0),
            mode,
        }
    }

    pub fn columns_unit_norm(&self, tol: f64) -> bool {
        (0..self.matrix.ncols()).all(|j| (self.matrix.column(j).norm() - 1.0).abs() <= tol)
    }

    /// Indices of terms in the numerator block (`deriv_power == 0`).
    pub fn numerator_indices(&self) -> Vec<usize> {
        self.terms
            .iter()
            .enumerate()
            .filter(|(_, t)| t.deriv_power == 0)
            .map(|(j, _)| j)
            .collect()
    }

    /// Indices of terms carrying a derivative factor.
    pub fn denominator_indices(&self) -> Vec<usize> {
        self.terms
            .iter()
            .enumerate()
            .filter(|(_, t)| t.deriv_power > 0)
            .map(|(j, _)| j)
            .collect()
    }
}

/// Number of monomials of degree ≤ d in n variables: binomial(n + d, d).
pub fn count_monomials(n: usize, d: usize) -> u64 {
    binomial_u128(n + d, d) as u64
}

fn binomial_u128(n: usize, k: usize) -> u128 {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Number of distinct polynomial structures over those monomials
/// (every nonempty subset): 2^N_m − 1, with its base-10 magnitude.
pub fn count_polynomial_structures(n: usize, d: usize) -> (BigUint, u64) {
    let n_m = count_monomials(n, d);
    let n_p = (BigUint::from(1u8) << n_m) - 1u8;
    let magnitude = n_p.to_string().len() as u64 - 1;
    (n_p, magnitude)
}

/// All exponent vectors of degree ≤ d in graded-lex order (constant first;
/// within a degree, lexicographically descending so x1-heavy terms lead).
pub fn enumerate_monomials(n: usize, d: usize) -> Vec<Monomial> {
    let mut out = Vec::with_capacity(count_monomials(n, d) as usize);
    let mut current = vec![0u32; n];
    for deg in 0..=d as u32 {
        fill_degree(n, 0, deg, &mut current, &mut out);
    }
    out
}

fn fill_degree(n: usize, pos: usize, remaining: u32, current: &mut Vec<u32>, out: &mut Vec<Monomial>) {
    if pos == n - 1 {
        current[pos] = remaining;
        out.push(Monomial {
            exponents: current.clone(),
        });
        return;
    }
    for e in (0..=remaining).rev() {
        current[pos] = e;
        fill_degree(n, pos + 1, remaining - e, current, out);
    }
    current[pos] = 0;
}

fn evaluate_terms(
    states: &DMatrix<f64>,
    xdot_k: Option<&DVector<f64>>,
    terms: Vec<LibraryTerm>,
    mode: LibraryMode,
) -> EvaluatedLibrary {
    let m = states.nrows();
    let p = terms.len();
    let mut matrix = DMatrix::zeros(m, p);
    let mut row = vec![0.0; states.ncols()];
    for i in 0..m {
        for (c, v) in row.iter_mut().zip(states.row(i).iter()) {
            *c = *v;
        }
        let xd = xdot_k.map(|v| v[i]).unwrap_or(0.0);
        for (j, term) in terms.iter().enumerate() {
            matrix[(i, j)] = term.eval(&row, xd);
        }
    }
    EvaluatedLibrary {
        matrix,
        terms,
        column_scales: DVector::from_element(p, 1.0),
        mode,
    }
}

/// Library of state monomials up to degree `d`, optionally extended with
/// sin/cos columns of each state at the given frequencies.
pub fn build_explicit_library(
    states: &DMatrix<f64>,
    d: usize,
    include_trig: bool,
    frequencies: &[f64],
) -> Result<EvaluatedLibrary> {
    if states.nrows() == 0 {
        return Err(Error::EmptyData);
    }
    let n = states.ncols();
    let mut terms: Vec<LibraryTerm> = enumerate_monomials(n, d)
        .into_iter()
        .map(|m| LibraryTerm::monomial_only(m.exponents))
        .collect();
    if include_trig {
        for &freq in frequencies {
            for state in 0..n {
                for kind in [TrigKind::Sin, TrigKind::Cos] {
                    terms.push(LibraryTerm {
                        monomial: Monomial {
                            exponents: vec![0; n],
                        },
                        deriv_power: 0,
                        deriv_index: 0,
                        trig: Some(TrigFactor {
                            kind,
                            state,
                            frequency: freq,
                        }),
                    });
                }
            }
        }
    }
    Ok(evaluate_terms(states, None, terms, LibraryMode::Explicit))
}

/// Term list of the augmented implicit library: state monomials to degree
/// `d_num` followed by `dx_k`-multiplied monomials to degree `d_den`.
pub fn implicit_terms(n: usize, d_num: usize, d_den: usize, deriv_index: usize) -> Vec<LibraryTerm> {
    let mut terms: Vec<LibraryTerm> = enumerate_monomials(n, d_num)
        .into_iter()
        .map(|m| LibraryTerm::monomial_only(m.exponents))
        .collect();
    terms.extend(enumerate_monomials(n, d_den).into_iter().map(|m| LibraryTerm {
        monomial: m,
        deriv_power: 1,
        deriv_index,
        trig: None,
    }));
    terms
}

/// Augmented library `[Θ_N(X)  diag(dx_k) Θ_D(X)]` for the implicit problem.
pub fn build_implicit_library(
    states: &DMatrix<f64>,
    xdot_k: &DVector<f64>,
    d_num: usize,
    d_den: usize,
    deriv_index: usize,
) -> Result<EvaluatedLibrary> {
    if states.nrows() == 0 {
        return Err(Error::EmptyData);
    }
    if states.nrows() != xdot_k.len() {
        return Err(Error::DimensionMismatch(format!(
            "states have {} rows but the derivative vector has {}",
            states.nrows(),
            xdot_k.len()
        )));
    }
    let terms = implicit_terms(states.ncols(), d_num, d_den, deriv_index);
    Ok(evaluate_terms(
        states,
        Some(xdot_k),
        terms,
        LibraryMode::Implicit,
    ))
}

/// Library of all products `monomial(x) * (dx_k)^q` with
/// `degree(monomial) <= d_state` and `q <= d_deriv`.
pub fn build_mixed_library(
    states: &DMatrix<f64>,
    derivs: &DMatrix<f64>,
    d_state: usize,
    d_deriv: usize,
    deriv_index: usize,
) -> Result<EvaluatedLibrary> {
    if states.nrows() == 0 {
        return Err(Error::EmptyData);
    }
    if states.shape() != derivs.shape() {
        return Err(Error::DimensionMismatch(format!(
            "states are {:?} but derivatives are {:?}",
            states.shape(),
            derivs.shape()
        )));
    }
    let n = states.ncols();
    let monomials = enumerate_monomials(n, d_state);
    let mut terms = Vec::with_capacity(monomials.len() * (d_deriv + 1));
    for q in 0..=d_deriv as u32 {
        for m in &monomials {
            terms.push(LibraryTerm {
                monomial: m.clone(),
                deriv_power: q,
                deriv_index,
                trig: None,
            });
        }
    }
    let xdot_k = DVector::from_iterator(derivs.nrows(), derivs.column(deriv_index).iter().copied());
    Ok(evaluate_terms(
        states,
        Some(&xdot_k),
        terms,
        LibraryMode::Mixed,
    ))
}

/// Build the library described by `spec` on the given data.
pub fn build_from_spec(
    spec: &LibrarySpec,
    states: &DMatrix<f64>,
    derivs: Option<&DMatrix<f64>>,
) -> Result<EvaluatedLibrary> {
    match spec.mode {
        LibraryMode::Explicit => {
            build_explicit_library(states, spec.d_num, spec.include_trig, &spec.frequencies)
        }
        LibraryMode::Implicit => {
            let derivs = derivs.ok_or_else(|| {
                Error::InvalidConfig("implicit library requires derivative data".into())
            })?;
            let xdot_k =
                DVector::from_iterator(derivs.nrows(), derivs.column(spec.deriv_index).iter().copied());
            build_implicit_library(states, &xdot_k, spec.d_num, spec.d_den, spec.deriv_index)
        }
        LibraryMode::Mixed => {
            let derivs = derivs.ok_or_else(|| {
                Error::InvalidConfig("mixed library requires derivative data".into())
            })?;
            build_mixed_library(states, derivs, spec.d_num, spec.d_den, spec.deriv_index)
        }
    }
}
