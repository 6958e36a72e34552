//! Least squares on a column subset of the dictionary.

use crate::gabor::GaborDictionary;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Relative singular-value floor below which a support is treated as rank deficient.
pub(crate) const RANK_TOL: f64 = 1e-10;

pub(crate) struct SupportFit {
    pub coefficients: Vec<Complex64>,
    pub residual: Vec<Complex64>,
    pub residual_norm: f64,
    /// sigma_max / sigma_min of the support submatrix.
    pub condition: f64,
    svd: Option<nalgebra::SVD<Complex64, nalgebra::Dyn, nalgebra::Dyn>>,
}

impl SupportFit {
    pub fn well_conditioned(&self) -> bool {
        self.condition.is_finite() && self.condition <= 1.0 / RANK_TOL
    }

    /// Minimum-norm `w` with `Phi_S^* w = target`, i.e. `U Sigma^{-1} V^* target`.
    pub fn dual_vector(&self, target: &[Complex64]) -> Vec<Complex64> {
        let Some(svd) = &self.svd else {
            return vec![Complex64::new(0.0, 0.0); self.residual.len()];
        };
        let u = svd.u.as_ref().expect("u computed");
        let v_t = svd.v_t.as_ref().expect("v_t computed");
        let t = DVector::from_column_slice(target);
        let mut z = v_t * t;
        for (zi, s) in z.iter_mut().zip(svd.singular_values.iter()) {
            *zi /= Complex64::new(*s, 0.0);
        }
        (u * z).iter().copied().collect()
    }
}

/// Fit `y ~ Phi_S c` for the flat indices in `support`.
pub(crate) fn fit_support(dict: &GaborDictionary, support: &[usize], y: &[Complex64]) -> SupportFit {
    let n = dict.n();
    if support.is_empty() {
        return SupportFit {
            coefficients: Vec::new(),
            residual: y.to_vec(),
            residual_norm: crate::tfcore::norm2(y),
            condition: 1.0,
            svd: None,
        };
    }
    let mut a = DMatrix::<Complex64>::zeros(n, support.len());
    for (j, &flat) in support.iter().enumerate() {
        let atom = dict.atom_flat(flat).expect("support index in range");
        a.column_mut(j).copy_from_slice(atom.as_slice());
    }
    let b = DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let coeffs = svd
        .solve(&b, RANK_TOL * smax.max(f64::MIN_POSITIVE))
        .expect("u and v_t computed");
    let residual_vec = &b - &a * &coeffs;
    let residual: Vec<Complex64> = residual_vec.iter().copied().collect();
    SupportFit {
        coefficients: coeffs.iter().copied().collect(),
        residual_norm: crate::tfcore::norm2(&residual),
        residual,
        condition,
        svd: Some(svd),
    }
}
