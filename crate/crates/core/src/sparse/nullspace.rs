//! Numerical null space of an evaluated library via singular value
//! decomposition.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::library::EvaluatedLibrary;

/// Default relative cutoff below which singular values count as zero.
pub const RANK_TOL_REL: f64 = 1e-8;

/// Orthonormal basis of the numerical null space of a library matrix,
/// together with enough of the SVD to score candidate vectors later without
/// keeping the data matrix around.
#[derive(Debug, Clone)]
pub struct NullSpaceBasis {
    /// p × r, columns orthonormal.
    pub basis: DMatrix<f64>,
    /// All p singular values, descending; entries beyond min(m, p) are zero.
    pub singular_values: DVector<f64>,
    /// Full right-singular-vector matrix V, p × p.
    pub right_vectors: DMatrix<f64>,
    /// Absolute cutoff used: `rank_tol_rel * sigma_max`.
    pub rank_tol: f64,
    /// Number of rows of the matrix the basis was computed from.
    pub n_rows: usize,
}

impl NullSpaceBasis {
    pub fn nullity(&self) -> usize {
        self.basis.ncols()
    }

    pub fn n_terms(&self) -> usize {
        self.basis.nrows()
    }

    /// RMS residual `||Theta xi||_2 / sqrt(m)` of a candidate vector in the
    /// same (column-scaled) coordinates the basis was computed in, evaluated
    /// as `||diag(sigma) V^T xi||_2 / sqrt(m)`.
    pub fn residual(&self, xi: &DVector<f64>) -> f64 {
        let vt_xi = self.right_vectors.tr_mul(xi);
        let mut sum = 0.0;
        for i in 0..vt_xi.len() {
            let s = self.singular_values[i] * vt_xi[i];
            sum += s * s;
        }
        (sum / self.n_rows as f64).sqrt()
    }

    /// Projection of an arbitrary vector onto the null space.
    pub fn project(&self, xi: &DVector<f64>) -> DVector<f64> {
        &self.basis * self.basis.tr_mul(xi)
    }
}

fn to_faer(m: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Null space of the (column-normalized) library matrix. Singular values at
/// or below `rank_tol_rel * sigma_max` span the null space; if none qualify
/// the library admits no implicit relation at this tolerance and
/// `EmptyNullSpace` is returned.
pub fn null_space_basis(lib: &EvaluatedLibrary, rank_tol_rel: f64) -> Result<NullSpaceBasis> {
    let theta = &lib.matrix;
    let (m, p) = theta.shape();
    if m == 0 || p == 0 {
        return Err(Error::EmptyData);
    }
    if !lib.columns_unit_norm(1e-6) {
        log::warn!("null space requested on a library whose columns are not unit-normalized");
    }
    if m < p {
        log::warn!(
            "underdetermined library ({} rows < {} columns): null space is trivially nonempty",
            m,
            p
        );
    }

    let fm = to_faer(theta);
    // thin SVD gives V as p x min(m,p); when m < p we need all p right
    // singular vectors, so fall back to the full decomposition.
    let (sigma_part, v_part): (Vec<f64>, DMatrix<f64>) = if m >= p {
        let svd = fm.thin_svd().map_err(|_| {
            Error::NumericalFailure("singular value decomposition did not converge".into())
        })?;
        let s = svd.S().column_vector();
        let v = svd.V();
        (
            (0..p).map(|i| s[i]).collect(),
            DMatrix::from_fn(p, p, |i, j| v[(i, j)]),
        )
    } else {
        let svd = fm.svd().map_err(|_| {
            Error::NumericalFailure("singular value decomposition did not converge".into())
        })?;
        let s = svd.S().column_vector();
        let v = svd.V();
        (
            (0..m).map(|i| s[i]).collect(),
            DMatrix::from_fn(p, p, |i, j| v[(i, j)]),
        )
    };

    let mut singular_values = DVector::zeros(p);
    for (i, &s) in sigma_part.iter().enumerate() {
        singular_values[i] = s;
    }
    let sigma_max = singular_values[0];
    if !sigma_max.is_finite() {
        return Err(Error::NumericalFailure(
            "non-finite singular values".into(),
        ));
    }
    let rank_tol = rank_tol_rel * sigma_max;
    let null_cols: Vec<usize> = (0..p).filter(|&i| singular_values[i] <= rank_tol).collect();
    if null_cols.is_empty() {
        return Err(Error::EmptyNullSpace { tol: rank_tol_rel });
    }
    let mut basis = DMatrix::zeros(p, null_cols.len());
    for (out, &src) in null_cols.iter().enumerate() {
        basis.set_column(out, &v_part.column(src));
    }
    Ok(NullSpaceBasis {
        basis,
        singular_values,
        right_vectors: v_part,
        rank_tol,
        n_rows: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library::{build_explicit_library, LibraryMode};
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    fn lib_from_matrix(matrix: DMatrix<f64>) -> EvaluatedLibrary {
        EvaluatedLibrary::from_matrix_for_tests(matrix, LibraryMode::Implicit)
    }

    #[test]
    fn known_rank_deficient_matrix() {
        // column 2 = column 0 + column 1
        let mut m = DMatrix::zeros(10, 3);
        for i in 0..10 {
            let a = (i as f64 + 1.0).sin();
            let b = (i as f64 + 1.0).cos();
            m[(i, 0)] = a;
            m[(i, 1)] = b;
            m[(i, 2)] = a + b;
        }
        let lib = lib_from_matrix(m.clone());
        let ns = null_space_basis(&lib, RANK_TOL_REL).unwrap();
        assert_eq!(ns.nullity(), 1);
        // the null vector must be proportional to (1, 1, -1)/sqrt(3)
        let v = ns.basis.column(0);
        let expect = DVector::from_row_slice(&[1.0, 1.0, -1.0]).normalize();
        let dot = v.dot(&expect).abs();
        assert_relative_eq!(dot, 1.0, epsilon = 1e-10);
        // matrix annihilates the basis
        let prod = &m * &ns.basis;
        assert!(prod.norm() < 1e-10);
    }

    #[test]
    fn full_rank_matrix_has_empty_null_space() {
        let m = DMatrix::from_fn(8, 3, |i, j| ((i + 1) as f64).powi(j as i32));
        let lib = lib_from_matrix(m);
        match null_space_basis(&lib, RANK_TOL_REL) {
            Err(Error::EmptyNullSpace { .. }) => {}
            other => panic!("expected EmptyNullSpace, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn underdetermined_matrix_nullity() {
        // 3 rows, 5 columns, generic entries: rank 3, nullity 2
        // (entry formula is nonlinear in i and j so no low-rank structure
        // sneaks in, unlike sin(i + j) which is rank 2)
        let m = DMatrix::from_fn(3, 5, |i, j| ((i * 5 + j) as f64 + 1.0).sqrt().sin());
        let lib = lib_from_matrix(m.clone());
        let ns = null_space_basis(&lib, RANK_TOL_REL).unwrap();
        assert_eq!(ns.nullity(), 2);
        assert!((&m * &ns.basis).norm() < 1e-10);
        // orthonormality
        let gram = ns.basis.tr_mul(&ns.basis);
        assert!((gram - DMatrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn residual_matches_direct_computation() {
        let m = DMatrix::from_fn(12, 4, |i, j| ((i as f64 + 1.0) * 0.3 + j as f64).cos());
        let lib = lib_from_matrix(m.clone());
        // widen the tolerance so a "null space" exists even at full rank
        let ns = null_space_basis(&lib, 0.5).unwrap();
        let xi = DVector::from_row_slice(&[0.5, -0.25, 0.1, 0.8]).normalize();
        let direct = (&m * &xi).norm() / (12.0f64).sqrt();
        assert_relative_eq!(ns.residual(&xi), direct, epsilon = 1e-12);
    }

    #[test]
    fn projection_is_idempotent_and_in_null_space() {
        let mut m = DMatrix::zeros(10, 3);
        for i in 0..10 {
            let a = (i as f64 * 0.7).sin();
            let b = (i as f64 * 0.7).cos();
            m[(i, 0)] = a;
            m[(i, 1)] = b;
            m[(i, 2)] = a - 2.0 * b;
        }
        let lib = lib_from_matrix(m.clone());
        let ns = null_space_basis(&lib, RANK_TOL_REL).unwrap();
        let xi = DVector::from_row_slice(&[1.0, 2.0, 3.0]);
        let proj = ns.project(&xi);
        assert!((&m * &proj).norm() < 1e-9 * proj.norm().max(1.0));
        let twice = ns.project(&proj);
        assert_relative_eq!((proj - &twice).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn library_with_dependent_columns_from_data() {
        // evaluate a degree-2 library on points lying on the curve x2 = x1^2;
        // then the columns for x2 and x1^2 coincide, giving nullity >= 1
        let pts: Vec<[f64; 2]> = (0..30)
            .map(|i| {
                let x = -1.0 + 2.0 * i as f64 / 29.0;
                [x, x * x]
            })
            .collect();
        let states = DMatrix::from_fn(30, 2, |i, j| pts[i][j]);
        let lib = build_explicit_library(&states, 2, false, &[])
            .unwrap()
            .normalize_columns()
            .unwrap();
        let ns = null_space_basis(&lib, RANK_TOL_REL).unwrap();
        assert_eq!(ns.nullity(), 1);
    }
}
