//! Sparsest vector in a subspace by alternating soft-thresholding in ambient
//! coordinates with projection back onto the subspace (Qu-style alternating
//! directions).

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{soft_threshold, NullSpaceBasis, SparseCoefficients};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdmConfig {
    pub max_iters: usize,
    /// Convergence threshold on the change of the subspace iterate q.
    pub tol: f64,
    /// How many starting points to try; drawn from the rows of N,
    /// largest-norm rows first. Clamped to p.
    pub n_initializations: usize,
    pub seed: u64,
}

impl Default for AdmConfig {
    fn default() -> Self {
        AdmConfig {
            max_iters: 1000,
            tol: 1e-6,
            n_initializations: 64,
            seed: 0,
        }
    }
}

struct Run {
    xi: DVector<f64>,
    term_count: usize,
    residual: f64,
    converged: bool,
}

/// One ADM descent from a fixed starting point. Returns None when the
/// iteration collapses to the zero vector (lambda too large for this start).
fn adm_single(ns: &NullSpaceBasis, lambda: f64, q0: DVector<f64>, cfg: &AdmConfig) -> Option<Run> {
    let n = &ns.basis;
    let mut q = q0;
    let mut converged = false;
    for _ in 0..cfg.max_iters {
        let x = soft_threshold(&(n * &q), lambda);
        let ntx = n.tr_mul(&x);
        let norm = ntx.norm();
        if norm == 0.0 {
            return None;
        }
        let q_new = ntx / norm;
        let delta = (&q_new - &q).norm();
        q = q_new;
        if delta < cfg.tol {
            converged = true;
            break;
        }
    }
    // the soft-threshold fixed point is biased O(lambda) away from the exact
    // sparse span vector; polish by re-solving on the identified support
    if let Some(polished) = polish_support(ns, &(n * &q), lambda) {
        q = polished;
    }
    // final candidate: back in the subspace, then hard-zero sub-lambda
    // entries and renormalize so term_count is unambiguous
    let mut xi = n * &q;
    for v in xi.iter_mut() {
        if v.abs() < lambda {
            *v = 0.0;
        }
    }
    let norm = xi.norm();
    if norm == 0.0 {
        return None;
    }
    xi /= norm;
    let term_count = xi.iter().filter(|&&v| v != 0.0).count();
    let residual = ns.residual(&xi);
    Some(Run {
        xi,
        term_count,
        residual,
        converged,
    })
}

/// Given a near-sparse span vector, find the unit q minimizing the energy of
/// N q outside the support {j : |v_j| >= lambda}: the smallest right singular
/// vector of the off-support rows of N. Returns None when the support is
/// empty or full, or when the polished vector would be farther from sparse.
fn polish_support(ns: &NullSpaceBasis, v: &DVector<f64>, lambda: f64) -> Option<DVector<f64>> {
    let n = &ns.basis;
    let (p, r) = n.shape();
    let off: Vec<usize> = (0..p).filter(|&j| v[j].abs() < lambda).collect();
    if off.is_empty() || off.len() == p {
        return None;
    }
    let mut m = nalgebra::DMatrix::zeros(off.len(), r);
    for (row, &j) in off.iter().enumerate() {
        m.row_mut(row).copy_from(&n.row(j));
    }
    let svd = m.svd(false, true);
    let vt = svd.v_t.as_ref()?;
    let sigma = &svd.singular_values;
    // gather right singular vectors at (numerically) the minimal value and
    // keep the combination closest to the current iterate; rows of vt may be
    // fewer than r when off.len() < r, in which case the null space of m is
    // nontrivial and any unresolved directions also qualify
    let q_cur = n.tr_mul(v);
    let s_min = sigma.iter().cloned().fold(f64::INFINITY, f64::min);
    let s_max = sigma.iter().cloned().fold(0.0, f64::max);
    let thresh = s_min + 1e-12 + 1e-8 * s_max;
    let mut q_new: DVector<f64> = DVector::zeros(r);
    for (i, &s) in sigma.iter().enumerate() {
        if s <= thresh {
            let dir = vt.row(i).transpose();
            q_new += &dir * dir.dot(&q_cur);
        }
    }
    if off.len() < r {
        // unresolved null directions of m: component of q_cur orthogonal to
        // every row of vt
        let mut resid = q_cur.clone();
        for i in 0..vt.nrows() {
            let dir = vt.row(i).transpose();
            resid -= &dir * dir.dot(&q_cur);
        }
        q_new += resid;
    }
    let norm = q_new.norm();
    if norm < 1e-8 {
        return None;
    }
    Some(q_new / norm)
}

/// Starting iterates: normalized rows of N, ordered by decreasing row norm
/// (ties by row index), zero rows skipped.
fn initializations(ns: &NullSpaceBasis, count: usize) -> Vec<DVector<f64>> {
    let n = &ns.basis;
    let mut rows: Vec<(usize, f64)> = (0..n.nrows())
        .map(|i| (i, n.row(i).norm()))
        .filter(|&(_, norm)| norm > 0.0)
        .collect();
    rows.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    rows.iter()
        .take(count)
        .map(|&(i, norm)| n.row(i).transpose() / norm)
        .collect()
}

/// Best sparse null-space vector over multiple row initializations: minimum
/// term count, ties broken by smaller residual. The sign is fixed so the
/// largest-magnitude entry is positive; callers with block structure may
/// re-fix it with [`fix_sign_by_block`].
pub fn adm_sparsest_vector(
    ns: &NullSpaceBasis,
    lambda: f64,
    cfg: &AdmConfig,
) -> Result<SparseCoefficients> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "lambda must be positive and finite, got {}",
            lambda
        )));
    }
    if ns.nullity() == 0 {
        return Err(Error::EmptyNullSpace { tol: ns.rank_tol });
    }
    let count = cfg.n_initializations.min(ns.n_terms()).max(1);
    let mut best: Option<Run> = None;
    for q0 in initializations(ns, count) {
        if let Some(run) = adm_single(ns, lambda, q0, cfg) {
            let better = match &best {
                None => true,
                Some(b) => {
                    run.term_count < b.term_count
                        || (run.term_count == b.term_count && run.residual < b.residual)
                }
            };
            if better {
                best = Some(run);
            }
        }
    }
    let run = best.ok_or(Error::DegenerateLambda { lambda })?;
    let mut xi = run.xi;
    fix_sign(&mut xi);
    Ok(SparseCoefficients::from_vector(
        xi,
        lambda,
        run.residual,
        run.converged,
    ))
}

/// Flip the whole vector so its largest-magnitude entry is positive.
pub fn fix_sign(xi: &mut DVector<f64>) {
    let mut idx = 0;
    let mut max = 0.0;
    for (i, v) in xi.iter().enumerate() {
        if v.abs() > max {
            max = v.abs();
            idx = i;
        }
    }
    if max > 0.0 && xi[idx] < 0.0 {
        *xi = -&*xi;
    }
}

/// Flip the whole vector so the largest-magnitude entry among the given
/// indices (e.g. the denominator block) is positive. Falls back to the full
/// vector when the block has no active entry.
pub fn fix_sign_by_block(xi: &mut DVector<f64>, block: &[usize]) {
    let mut idx = None;
    let mut max = 0.0;
    for &i in block {
        if xi[i].abs() > max {
            max = xi[i].abs();
            idx = Some(i);
        }
    }
    match idx {
        Some(i) if xi[i] < 0.0 => *xi = -&*xi,
        Some(_) => {}
        None => fix_sign(xi),
    }
}
