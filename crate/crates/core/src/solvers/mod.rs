//! Sparse recovery: basis pursuit (equality and per-entry bounded residual),
//! orthogonal matching pursuit, and an exhaustive l0 search for small problems.
//!
//! Non-convergence is reported through [`RecoveryResult::converged`], never as an error.

mod admm;
mod lstsq;
mod omp;
mod oracle;

pub use admm::{basis_pursuit, bpdn_entrywise};
pub use omp::omp;
pub use oracle::{l0_oracle, L0_ENUMERATION_BUDGET};

use crate::error::{Error, Result};
use crate::gabor::CoefficientVector;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_iterations: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Initial ADMM penalty parameter rho.
    pub penalty: f64,
    /// Over-relaxation factor in (0, 2); 1 is plain ADMM.
    pub relaxation: f64,
    /// Rebalance rho from the primal/dual residual ratio.
    pub adaptive_penalty: bool,
    /// Try to finish basis pursuit with a least-squares refit on the current support,
    /// accepted only when it comes with a dual optimality certificate.
    pub polish: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { max_iterations: 20_000, abs_tol: 1e-8, rel_tol: 1e-8, penalty: 1.0, relaxation: 1.8, adaptive_penalty: true, polish: true }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be at least 1".into()));
        }
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidParameter("tolerances must be positive".into()));
        }
        if !(self.penalty > 0.0 && self.penalty.is_finite()) {
            return Err(Error::InvalidParameter("penalty must be positive".into()));
        }
        if !(self.relaxation > 0.0 && self.relaxation < 2.0) {
            return Err(Error::InvalidParameter("relaxation must lie in (0, 2)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub solution: CoefficientVector,
    pub iterations: usize,
    /// Constraint violation of the returned solution (`||Phi s - y||_2` for BP, OMP and
    /// the oracle; `max_n (|(Phi s - y)_n| - eps)^+` for the entrywise variant).
    pub primal_residual: f64,
    /// ADMM dual residual, or the dual-certificate violation for a polished solution.
    pub dual_residual: f64,
    pub converged: bool,
    /// `||solution||_1` (sum of complex moduli).
    pub objective: f64,
}

impl RecoveryResult {
    fn new(
        solution: CoefficientVector,
        iterations: usize,
        primal_residual: f64,
        dual_residual: f64,
        converged: bool,
    ) -> Self {
        let objective = solution.l1_norm();
        Self { solution, iterations, primal_residual, dual_residual, converged, objective }
    }
}
