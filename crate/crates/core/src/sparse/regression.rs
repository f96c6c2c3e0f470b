//! Explicit sparse regression: sequentially thresholded least squares (the
//! default) and coordinate-descent LASSO behind the same interface.

use nalgebra::{DMatrix, DVector};

use super::SparseCoefficients;
use crate::error::{Error, Result};
use crate::library::EvaluatedLibrary;

const RANK_TOL_REL: f64 = 1e-10;

fn check_shapes(lib: &EvaluatedLibrary, xdot: &DVector<f64>) -> Result<()> {
    if lib.n_samples() == 0 || lib.n_terms() == 0 {
        return Err(Error::EmptyData);
    }
    if xdot.len() != lib.n_samples() {
        return Err(Error::DimensionMismatch(format!(
            "{} derivative samples for a library with {} rows",
            xdot.len(),
            lib.n_samples()
        )));
    }
    Ok(())
}

/// Least squares on the active columns; errors if the submatrix is
/// numerically rank deficient.
fn active_least_squares(
    theta: &DMatrix<f64>,
    xdot: &DVector<f64>,
    active: &[usize],
) -> Result<DVector<f64>> {
    let m = theta.nrows();
    let mut sub = DMatrix::zeros(m, active.len());
    for (out, &j) in active.iter().enumerate() {
        sub.set_column(out, &theta.column(j));
    }
    let svd = sub.svd(true, true);
    let s_max = svd
        .singular_values
        .iter()
        .cloned()
        .fold(0.0f64, f64::max);
    if s_max == 0.0
        || svd
            .singular_values
            .iter()
            .any(|&s| s <= RANK_TOL_REL * s_max)
    {
        return Err(Error::RankDeficientActiveSet);
    }
    svd.solve(xdot, 0.0)
        .map_err(|e| Error::NumericalFailure(e.to_string()))
}

/// Sequentially thresholded least squares: alternate a least-squares solve on
/// the active columns with hard thresholding `|xi_j| < lambda -> 0` until the
/// active set is stable. Coefficients are returned in the coordinates of the
/// library as given (unnormalized for a raw library).
pub fn stlsq(
    lib: &EvaluatedLibrary,
    xdot: &DVector<f64>,
    lambda: f64,
    max_iters: usize,
) -> Result<SparseCoefficients> {
    check_shapes(lib, xdot)?;
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "lambda must be positive and finite, got {}",
            lambda
        )));
    }
    let theta = &lib.matrix;
    let p = theta.ncols();
    if theta.nrows() < p {
        log::warn!(
            "underdetermined regression ({} rows < {} columns)",
            theta.nrows(),
            p
        );
    }
    let mut active: Vec<usize> = (0..p).collect();
    let mut xi = DVector::zeros(p);
    let mut converged = false;
    for _ in 0..max_iters.max(1) {
        let coeffs = active_least_squares(theta, xdot, &active)?;
        let next: Vec<usize> = active
            .iter()
            .zip(coeffs.iter())
            .filter(|(_, &c)| c.abs() >= lambda)
            .map(|(&j, _)| j)
            .collect();
        if next.is_empty() {
            return Err(Error::AllTermsEliminated { lambda });
        }
        if next == active {
            xi = DVector::zeros(p);
            for (&j, &c) in active.iter().zip(coeffs.iter()) {
                xi[j] = c;
            }
            converged = true;
            break;
        }
        active = next;
    }
    if !converged {
        // active set still changing at the cap: report the last solve
        let coeffs = active_least_squares(theta, xdot, &active)?;
        xi = DVector::zeros(p);
        for (&j, &c) in active.iter().zip(coeffs.iter()) {
            xi[j] = c;
        }
    }
    let residual = (theta * &xi - xdot).norm() / (theta.nrows() as f64).sqrt();
    Ok(SparseCoefficients::from_vector(
        xi, lambda, residual, converged,
    ))
}

/// Coordinate-descent LASSO for `argmin 0.5 ||Theta xi - xdot||^2 + lambda ||xi||_1`,
/// provided for parity with the L1 form of the regression problem. Same
/// interface and return shape as [`stlsq`].
pub fn lasso(
    lib: &EvaluatedLibrary,
    xdot: &DVector<f64>,
    lambda: f64,
    max_iters: usize,
) -> Result<SparseCoefficients> {
    check_shapes(lib, xdot)?;
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "lambda must be positive and finite, got {}",
            lambda
        )));
    }
    let theta = &lib.matrix;
    let (m, p) = theta.shape();
    let col_sq: Vec<f64> = (0..p).map(|j| theta.column(j).norm_squared()).collect();
    if col_sq.iter().any(|&c| c == 0.0) {
        return Err(Error::ZeroColumn(
            col_sq.iter().position(|&c| c == 0.0).unwrap(),
        ));
    }
    let mut xi: DVector<f64> = DVector::zeros(p);
    let mut resid = xdot.clone(); // r = xdot - Theta xi
    let mut converged = false;
    for _ in 0..max_iters.max(1) {
        let mut max_change = 0.0f64;
        for j in 0..p {
            let col = theta.column(j);
            let old = xi[j];
            // partial residual correlation with column j
            let rho = col.dot(&resid) + col_sq[j] * old;
            let new = soft_scalar(rho, lambda) / col_sq[j];
            if new != old {
                resid -= col * (new - old);
                xi[j] = new;
                max_change = max_change.max((new - old).abs());
            }
        }
        let scale = xi.amax().max(1.0);
        if max_change <= 1e-10 * scale {
            converged = true;
            break;
        }
    }
    if xi.iter().all(|&v| v == 0.0) {
        return Err(Error::AllTermsEliminated { lambda });
    }
    let residual = resid.norm() / (m as f64).sqrt();
    Ok(SparseCoefficients::from_vector(
        xi, lambda, residual, converged,
    ))
}

fn soft_scalar(v: f64, lambda: f64) -> f64 {
    if v > lambda {
        v - lambda
    } else if v < -lambda {
        v + lambda
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library::{build_explicit_library, LibraryMode};
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lib_from_matrix(matrix: DMatrix<f64>) -> EvaluatedLibrary {
        EvaluatedLibrary::from_matrix_for_tests(matrix, LibraryMode::Explicit)
    }

    fn random_states(m: usize, n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(m, n, |_, _| rng.gen_range(-2.0..2.0))
    }

    #[test]
    fn recovers_linear_combination_of_library_terms() {
        // xdot = 1.3 * x4 + (-3.1) * x5 over a degree-2 library in 2 states
        let states = random_states(200, 2, 42);
        let lib = build_explicit_library(&states, 2, false, &[]).unwrap();
        let xdot = DVector::from_fn(200, |i, _| {
            1.3 * states[(i, 0)] - 3.1 * states[(i, 1)]
        });
        let sc = stlsq(&lib, &xdot, 0.1, 20).unwrap();
        assert_eq!(sc.term_count, 2);
        // graded-lex order: [1, x1, x2, x1^2, x1 x2, x2^2]
        assert_relative_eq!(sc.xi[1], 1.3, epsilon = 1e-10);
        assert_relative_eq!(sc.xi[2], -3.1, epsilon = 1e-10);
        assert!(sc.converged);
        assert!(sc.residual < 1e-10);
    }

    #[test]
    fn planted_three_sparse_support_matches_exhaustive_search() {
        // oracle: brute-force least squares over all 3-subsets
        let m = 120;
        let p = 8;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let theta = DMatrix::from_fn(m, p, |_, _| rng.gen_range(-1.0..1.0));
        let true_support = [1usize, 4, 6];
        let true_coeffs = [2.0, -1.5, 0.7];
        let mut xdot = DVector::zeros(m);
        for (&j, &c) in true_support.iter().zip(true_coeffs.iter()) {
            xdot += theta.column(j) * c;
        }

        // exhaustive: the 3-subset with minimal residual
        let mut best: Option<(f64, [usize; 3])> = None;
        for a in 0..p {
            for b in (a + 1)..p {
                for c in (b + 1)..p {
                    let cols = [a, b, c];
                    let coeffs = active_least_squares(&theta, &xdot, &cols).unwrap();
                    let mut fit = DVector::zeros(m);
                    for (&j, &w) in cols.iter().zip(coeffs.iter()) {
                        fit += theta.column(j) * w;
                    }
                    let r = (&fit - &xdot).norm();
                    if best.is_none() || r < best.unwrap().0 {
                        best = Some((r, cols));
                    }
                }
            }
        }
        assert_eq!(best.unwrap().1, true_support);

        let lib = lib_from_matrix(theta);
        let sc = stlsq(&lib, &xdot, 0.3, 20).unwrap();
        let active: Vec<usize> = (0..p).filter(|&j| sc.xi[j] != 0.0).collect();
        assert_eq!(active, true_support.to_vec());
        for (&j, &c) in true_support.iter().zip(true_coeffs.iter()) {
            assert_relative_eq!(sc.xi[j], c, epsilon = 1e-9);
        }
    }

    #[test]
    fn zero_target_eliminates_everything() {
        let states = random_states(50, 2, 3);
        let lib = build_explicit_library(&states, 2, false, &[]).unwrap();
        let xdot = DVector::zeros(50);
        match stlsq(&lib, &xdot, 0.1, 20) {
            Err(Error::AllTermsEliminated { .. }) => {}
            other => panic!("expected AllTermsEliminated, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn duplicated_columns_are_rank_deficient() {
        let mut theta = DMatrix::zeros(30, 3);
        for i in 0..30 {
            let v = (i as f64 * 0.2).sin();
            theta[(i, 0)] = v;
            theta[(i, 1)] = v;
            theta[(i, 2)] = (i as f64 * 0.2).cos();
        }
        let xdot = DVector::from_fn(30, |i, _| (i as f64 * 0.2).cos());
        let lib = lib_from_matrix(theta);
        match stlsq(&lib, &xdot, 0.1, 20) {
            Err(Error::RankDeficientActiveSet) => {}
            other => panic!("expected RankDeficientActiveSet, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let states = random_states(50, 2, 4);
        let lib = build_explicit_library(&states, 2, false, &[]).unwrap();
        let xdot = DVector::zeros(49);
        assert!(matches!(
            stlsq(&lib, &xdot, 0.1, 20),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn lasso_matches_stlsq_support_on_clean_data() {
        let states = random_states(300, 2, 17);
        let lib = build_explicit_library(&states, 2, false, &[]).unwrap();
        let xdot = DVector::from_fn(300, |i, _| {
            0.8 * states[(i, 0)] + 1.1 * states[(i, 0)] * states[(i, 1)]
        });
        let sc = lasso(&lib, &xdot, 1e-4, 10_000).unwrap();
        // soft shrinkage biases coefficients by ~lambda / ||col||^2; loose tol
        assert_relative_eq!(sc.xi[1], 0.8, epsilon = 1e-3);
        assert_relative_eq!(sc.xi[4], 1.1, epsilon = 1e-3);
        let big: Vec<usize> = (0..6).filter(|&j| sc.xi[j].abs() > 1e-2).collect();
        assert_eq!(big, vec![1, 4]);
        assert!(sc.converged);
    }

    #[test]
    fn lasso_zero_solution_reported() {
        let states = random_states(50, 1, 5);
        let lib = build_explicit_library(&states, 2, false, &[]).unwrap();
        let xdot = DVector::from_fn(50, |i, _| states[(i, 0)] * 1e-4);
        // huge lambda drives everything to zero
        match lasso(&lib, &xdot, 1e6, 100) {
            Err(Error::AllTermsEliminated { .. }) => {}
            other => panic!("expected AllTermsEliminated, got {:?}", other.map(|_| ())),
        }
    }
}
