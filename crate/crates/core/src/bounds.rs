//! Closed-form sparsity bounds for Alltop Gabor dictionaries.
//!
//! All logarithms are natural unless a function name says otherwise.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

const PRIMALITY_LIMIT: usize = 1_000_000;

/// Trial-division primality. Values above 10^6 are rejected as non-prime.
pub fn is_prime(n: usize) -> bool {
    if n < 2 || n > PRIMALITY_LIMIT {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Primes p with lo <= p <= hi.
pub fn primes_between(lo: usize, hi: usize) -> Vec<usize> {
    (lo..=hi).filter(|&p| is_prime(p)).collect()
}

fn require_alltop_prime(n: usize) -> Result<()> {
    if n < 5 {
        Err(Error::DimensionTooSmall { n, min: 5 })
    } else if !is_prime(n) {
        Err(Error::NotPrime(n))
    } else {
        Ok(())
    }
}

/// Deterministic recovery bound `(sqrt N + 1) / 2`; any K strictly below it is recoverable.
pub fn thm1_bound(n: usize) -> Result<f64> {
    require_alltop_prime(n)?;
    Ok(0.5 * ((n as f64).sqrt() + 1.0))
}

/// Largest integer strictly below `bound`.
pub fn max_admissible_sparsity(bound: f64) -> usize {
    let c = bound.ceil();
    if c <= 0.0 {
        0
    } else {
        (c as usize).saturating_sub(1)
    }
}

/// Probabilistic bound `N / (16 ln(N / eps))` for `eps` in (0, 1).
pub fn thm2_bound(n: usize, eps: f64) -> Result<f64> {
    require_alltop_prime(n)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 1), got {eps}")));
    }
    let nf = n as f64;
    Ok(nf / (16.0 * (nf / eps).ln()))
}

/// Stability bound `((sqrt N + 1) / 2) / (1 + 2 eps N / t)`.
pub fn thm3_bound(n: usize, eps: f64, t: f64) -> Result<f64> {
    let base = thm1_bound(n)?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("t must be positive, got {t}")));
    }
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter(format!("eps must be nonnegative, got {eps}")));
    }
    Ok(base / (1.0 + 2.0 * eps * n as f64 / t))
}

fn check_empirical_domain(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::DimensionTooSmall { n, min: 3 });
    }
    Ok(n as f64)
}

/// Empirical phase-transition line `N / (2 ln N)`.
pub fn empirical_line(n: usize) -> Result<f64> {
    let nf = check_empirical_domain(n)?;
    Ok(nf / (2.0 * nf.ln()))
}

/// `N / (2 log2 N)`.
pub fn empirical_line_log2(n: usize) -> Result<f64> {
    let nf = check_empirical_domain(n)?;
    Ok(nf / (2.0 * nf.log2()))
}

/// `N / (2 log10 N)`.
pub fn empirical_line_log10(n: usize) -> Result<f64> {
    let nf = check_empirical_domain(n)?;
    Ok(nf / (2.0 * nf.log10()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: usize,
    pub thm1: f64,
    pub thm2: f64,
    pub thm2_eps: f64,
    pub thm3: f64,
    pub thm3_eps: f64,
    pub thm3_t: f64,
    pub empirical_line: f64,
    pub empirical_line_log2: f64,
    pub empirical_line_log10: f64,
}

impl BoundReport {
    /// `thm2_eps` is the failure-probability parameter, `(thm3_eps, thm3_t)` the
    /// per-entry noise bound and the l1 stability budget.
    pub fn evaluate(n: usize, thm2_eps: f64, thm3_eps: f64, thm3_t: f64) -> Result<Self> {
        Ok(Self {
            n,
            thm1: thm1_bound(n)?,
            thm2: thm2_bound(n, thm2_eps)?,
            thm2_eps,
            thm3: thm3_bound(n, thm3_eps, thm3_t)?,
            thm3_eps,
            thm3_t,
            empirical_line: empirical_line(n)?,
            empirical_line_log2: empirical_line_log2(n)?,
            empirical_line_log10: empirical_line_log10(n)?,
        })
    }
}
