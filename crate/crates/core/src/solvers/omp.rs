use super::lstsq::fit_support;
use super::RecoveryResult;
use crate::error::{Error, Result};
use crate::gabor::{CoefficientVector, GaborDictionary};
use crate::tfcore::ComplexVector;
use num_complex::Complex64;

/// Orthogonal matching pursuit.
///
/// Each iteration adds the atom most correlated with the residual (lowest flat
/// index on exact ties, never an atom already chosen), refits all selected
/// coefficients by least squares and recomputes the residual. Stops after
/// `sparsity_limit` atoms or once `||r||_2 <= residual_tol`. A rank-deficient
/// support ends the loop with `converged = false`.
pub fn omp(
    dict: &GaborDictionary,
    y: &ComplexVector,
    sparsity_limit: usize,
    residual_tol: f64,
) -> Result<RecoveryResult> {
    let n = dict.n();
    if y.len() != n {
        return Err(Error::LengthMismatch { expected: n, actual: y.len() });
    }
    if sparsity_limit == 0 {
        return Err(Error::InvalidParameter("sparsity_limit must be at least 1".into()));
    }
    if !(residual_tol >= 0.0) {
        return Err(Error::InvalidParameter("residual_tol must be nonnegative".into()));
    }
    let p = n * n;
    let mut support: Vec<usize> = Vec::new();
    let mut selected = vec![false; p];
    let mut coefficients: Vec<Complex64> = Vec::new();
    let mut residual = y.clone();
    let mut residual_norm = residual.norm();
    let mut well_conditioned = true;

    while residual_norm > residual_tol && support.len() < sparsity_limit.min(p) {
        let correlations = dict.adjoint(&residual)?;
        let mut best: Option<(usize, f64)> = None;
        for (i, c) in correlations.as_slice().iter().enumerate() {
            if selected[i] {
                continue;
            }
            let m = c.norm();
            if best.map_or(true, |(_, bm)| m > bm) {
                best = Some((i, m));
            }
        }
        let Some((pick, _)) = best else { break };
        support.push(pick);
        selected[pick] = true;

        let mut sorted = support.clone();
        sorted.sort_unstable();
        let fit = fit_support(dict, &sorted, y.as_slice());
        if !fit.well_conditioned() {
            well_conditioned = false;
            break;
        }
        coefficients = fit.coefficients;
        support = sorted;
        residual = ComplexVector::new(fit.residual)?;
        residual_norm = fit.residual_norm;
    }

    let mut solution = CoefficientVector::zeros(n);
    if well_conditioned {
        for (&i, c) in support.iter().zip(&coefficients) {
            solution.as_mut_slice()[i] = *c;
        }
    } else {
        // keep the last well-conditioned fit
        let last = support.len() - 1;
        let kept: Vec<usize> = support[..last].to_vec();
        let fit = fit_support(dict, &kept, y.as_slice());
        for (&i, c) in kept.iter().zip(&fit.coefficients) {
            solution.as_mut_slice()[i] = *c;
        }
        residual_norm = fit.residual_norm;
        support = kept;
    }
    let converged = well_conditioned && residual_norm <= residual_tol;
    Ok(RecoveryResult::new(solution, support.len(), residual_norm, 0.0, converged))
}
