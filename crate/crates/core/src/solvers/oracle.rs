use super::lstsq::fit_support;
use super::RecoveryResult;
use crate::error::{Error, Result};
use crate::gabor::{CoefficientVector, GaborDictionary};
use crate::tfcore::ComplexVector;

/// Maximum number of supports [`l0_oracle`] will enumerate.
pub const L0_ENUMERATION_BUDGET: u128 = 10_000_000;

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n.saturating_sub(k));
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Advance `idx` to the next k-subset of `0..n` in lexicographic order.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for pos in (0..k).rev() {
        if idx[pos] < n - k + pos {
            idx[pos] += 1;
            for j in pos + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Exhaustive search over all supports of size at most `k_max`.
///
/// Returns the least-squares solution with the smallest residual. Residuals within
/// `1e-12 * max(1, ||y||)` count as tied; ties go to the smaller support, then to
/// the lexicographically first one. Rank-deficient supports are skipped.
/// `iterations` is the number of supports fitted.
pub fn l0_oracle(dict: &GaborDictionary, y: &ComplexVector, k_max: usize) -> Result<RecoveryResult> {
    let n = dict.n();
    if y.len() != n {
        return Err(Error::LengthMismatch { expected: n, actual: y.len() });
    }
    let p = n * n;
    let k_max = k_max.min(p);
    let total: u128 = (0..=k_max).map(|k| binomial(p as u128, k as u128)).sum();
    if total > L0_ENUMERATION_BUDGET {
        return Err(Error::EnumerationBudget(total));
    }
    let tie = 1e-12 * y.norm().max(1.0);
    let mut best_support: Vec<usize> = Vec::new();
    let mut best = fit_support(dict, &[], y.as_slice());
    let mut visited = 1usize;

    for k in 1..=k_max {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            let fit = fit_support(dict, &idx, y.as_slice());
            visited += 1;
            if fit.well_conditioned() && fit.residual_norm < best.residual_norm - tie {
                best = fit;
                best_support = idx.clone();
            }
            if !next_combination(&mut idx, p) {
                break;
            }
        }
    }

    let mut solution = CoefficientVector::zeros(n);
    for (&i, c) in best_support.iter().zip(&best.coefficients) {
        solution.as_mut_slice()[i] = *c;
    }
    Ok(RecoveryResult::new(solution, visited, best.residual_norm, 0.0, true))
}
