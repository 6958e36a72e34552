//! ADMM for `min ||s||_1` over the affine set `Phi s = y` or the entrywise tube
//! `|(Phi s - y)_n| <= eps`.
//!
//! The splitting is `x in C`, `z` free, `x = z`. The projection onto `C` uses the
//! tight-frame identity `Phi Phi^* = c I`, so `P_C(v) = v - Phi^*(Phi v - t) / c`
//! with `t` the nearest admissible observation to `Phi v`. The z-step is complex
//! soft thresholding, which shrinks moduli and keeps phases.

use super::lstsq::fit_support;
use super::{RecoveryResult, SolverOptions};
use crate::error::{Error, Result};
use crate::gabor::{CoefficientVector, GaborDictionary, TransformScratch};
use crate::tfcore::ComplexVector;
use num_complex::Complex64;

/// Iterations between attempts to certify the current support.
const POLISH_EVERY: usize = 20;
/// Residual balancing: rescale rho by PENALTY_STEP when one residual exceeds
/// BALANCE_RATIO times the other, checked every ADAPT_EVERY iterations during the
/// first half of the iteration budget.
const ADAPT_EVERY: usize = 10;
const BALANCE_RATIO: f64 = 10.0;
const PENALTY_STEP: f64 = 2.0;
/// Slack allowed on the dual certificate `|Phi^* w|_inf <= 1`.
const CERTIFICATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
enum Constraint {
    Equality,
    Entrywise(f64),
}

/// Equality-constrained basis pursuit, `min ||s||_1 s.t. Phi s = y`.
pub fn basis_pursuit(
    dict: &GaborDictionary,
    y: &ComplexVector,
    opts: &SolverOptions,
) -> Result<RecoveryResult> {
    solve(dict, y, Constraint::Equality, opts)
}

/// `min ||s||_1 s.t. |(Phi s - y)_n| <= eps` for every n. `eps = 0` is basis pursuit.
pub fn bpdn_entrywise(
    dict: &GaborDictionary,
    y: &ComplexVector,
    eps: f64,
    opts: &SolverOptions,
) -> Result<RecoveryResult> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter(format!("eps must be nonnegative, got {eps}")));
    }
    if eps == 0.0 {
        return basis_pursuit(dict, y, opts);
    }
    solve(dict, y, Constraint::Entrywise(eps), opts)
}

/// Complex soft thresholding: `max(|v| - tau, 0) * v / |v|`.
pub(crate) fn soft_threshold(v: Complex64, tau: f64) -> Complex64 {
    let m = v.norm();
    if m <= tau {
        Complex64::new(0.0, 0.0)
    } else {
        v * ((m - tau) / m)
    }
}

/// Nearest point of the disc of radius `eps` to `r`.
fn clip(r: Complex64, eps: f64) -> Complex64 {
    let m = r.norm();
    if m <= eps {
        r
    } else {
        r * (eps / m)
    }
}

struct Workspace<'a> {
    dict: &'a GaborDictionary,
    y: &'a [Complex64],
    constraint: Constraint,
    inv_frame: f64,
    residual: Vec<Complex64>,
    back: Vec<Complex64>,
    scratch: TransformScratch,
}

impl Workspace<'_> {
    /// `x <- P_C(v)`.
    fn project(&mut self, v: &[Complex64], x: &mut [Complex64]) {
        self.dict.apply_into(v, &mut self.residual, &mut self.scratch);
        for (r, yv) in self.residual.iter_mut().zip(self.y) {
            let d = *r - yv;
            *r = match self.constraint {
                Constraint::Equality => d,
                Constraint::Entrywise(eps) => d - clip(d, eps),
            };
        }
        self.dict.adjoint_into(&self.residual, &mut self.back, &mut self.scratch);
        for ((xi, vi), bi) in x.iter_mut().zip(v).zip(&self.back) {
            *xi = vi - bi * self.inv_frame;
        }
    }

    /// `w = Phi (rho u) / c`: at a fixed point `rho u` lies in the range of `Phi^*`
    /// and is a subgradient of the l1 norm at `z`.
    fn dual_estimate(&mut self, u: &[Complex64], rho: f64) -> Vec<Complex64> {
        let scaled: Vec<Complex64> = u.iter().map(|ui| ui * rho).collect();
        let mut w = vec![Complex64::new(0.0, 0.0); self.residual.len()];
        self.dict.apply_into(&scaled, &mut w, &mut self.scratch);
        w.iter_mut().for_each(|wi| *wi *= self.inv_frame);
        w
    }

    fn violation(&mut self, s: &[Complex64]) -> f64 {
        self.dict.apply_into(s, &mut self.residual, &mut self.scratch);
        match self.constraint {
            Constraint::Equality => self
                .residual
                .iter()
                .zip(self.y)
                .map(|(r, yv)| (r - yv).norm_sqr())
                .sum::<f64>()
                .sqrt(),
            Constraint::Entrywise(eps) => self
                .residual
                .iter()
                .zip(self.y)
                .map(|(r, yv)| ((r - yv).norm() - eps).max(0.0))
                .fold(0.0, f64::max),
        }
    }
}

struct Certified {
    solution: Vec<Complex64>,
    primal: f64,
    violation: f64,
}

/// Least-squares refit `c` on `support`, accepted when some `w` with `Phi_S^* w = sign(c)`
/// also satisfies `|Phi^* w|_inf <= 1`, which proves `c` minimizes the l1 norm.
///
/// Without a hint `w` is the minimum-norm solution of the sign equations; with one it
/// is the hint plus the minimum-norm correction onto those equations.
fn certify(
    dict: &GaborDictionary,
    y: &[Complex64],
    support: &[usize],
    feasibility_tol: f64,
    dual_hint: Option<&[Complex64]>,
) -> Option<Certified> {
    let n = dict.n();
    if support.is_empty() || support.len() > n {
        return None;
    }
    let fit = fit_support(dict, support, y);
    if !fit.well_conditioned() || fit.residual_norm > feasibility_tol {
        return None;
    }
    if fit.coefficients.iter().any(|c| c.norm() == 0.0) {
        return None;
    }
    let sign: Vec<Complex64> = fit.coefficients.iter().map(|c| c / c.norm()).collect();
    let mut correlations = vec![Complex64::new(0.0, 0.0); n * n];
    let mut scratch = dict.scratch();
    let w = match dual_hint {
        None => fit.dual_vector(&sign),
        Some(hint) => {
            // smallest correction of the hint that matches the signs on the support
            dict.adjoint_into(hint, &mut correlations, &mut scratch);
            let gap: Vec<Complex64> =
                support.iter().zip(&sign).map(|(&i, sg)| sg - correlations[i]).collect();
            let correction = fit.dual_vector(&gap);
            hint.iter().zip(&correction).map(|(a, b)| a + b).collect()
        }
    };
    dict.adjoint_into(&w, &mut correlations, &mut scratch);
    let mut on_support = 0.0f64;
    for (&i, sg) in support.iter().zip(&sign) {
        on_support = on_support.max((correlations[i] - sg).norm());
        correlations[i] = Complex64::new(0.0, 0.0);
    }
    let off_support = correlations.iter().map(|g| g.norm()).fold(0.0, f64::max);
    if on_support > CERTIFICATE_TOL || off_support > 1.0 + CERTIFICATE_TOL {
        return None;
    }
    let mut solution = vec![Complex64::new(0.0, 0.0); n * n];
    for (&i, c) in support.iter().zip(&fit.coefficients) {
        solution[i] = *c;
    }
    Some(Certified {
        solution,
        primal: fit.residual_norm,
        violation: (off_support - 1.0).max(0.0),
    })
}

/// Relative magnitude cut-offs used to read a candidate support off the ADMM iterate.
const SUPPORT_CUTOFFS: [f64; 3] = [0.0, 1e-6, 1e-3];

/// Certify supports read off `z` at a few magnitude cut-offs, skipping any already tried.
/// `dual_hint` is the ADMM estimate of the dual variable in observation space.
fn try_polish(
    dict: &GaborDictionary,
    y: &[Complex64],
    z: &[Complex64],
    dual_hint: &[Complex64],
    feasibility_tol: f64,
    attempted: &mut Vec<Vec<usize>>,
) -> Option<Certified> {
    let peak = z.iter().map(|v| v.norm()).fold(0.0, f64::max);
    for cutoff in SUPPORT_CUTOFFS {
        let floor = cutoff * peak;
        let support: Vec<usize> =
            z.iter().enumerate().filter(|(_, v)| v.norm() > floor).map(|(i, _)| i).collect();
        if support.len() > dict.n() {
            continue;
        }
        // the hint-free certificate depends only on the support
        if !attempted.contains(&support) {
            if let Some(c) = certify(dict, y, &support, feasibility_tol, None) {
                return Some(c);
            }
            attempted.push(support.clone());
        }
        if let Some(c) = certify(dict, y, &support, feasibility_tol, Some(dual_hint)) {
            return Some(c);
        }
    }
    None
}

/// Feasible least-squares refit on a support read off `z` whose l1 norm does not
/// exceed `objective_bound`; the smallest such objective wins.
fn best_refit(
    dict: &GaborDictionary,
    y: &[Complex64],
    z: &[Complex64],
    feasibility_tol: f64,
    objective_bound: f64,
) -> Option<(Vec<Complex64>, f64)> {
    let n = dict.n();
    let peak = z.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut best: Option<(f64, Vec<usize>, Vec<Complex64>, f64)> = None;
    for cutoff in SUPPORT_CUTOFFS {
        let floor = cutoff * peak;
        let support: Vec<usize> =
            z.iter().enumerate().filter(|(_, v)| v.norm() > floor).map(|(i, _)| i).collect();
        if support.is_empty() || support.len() > n {
            continue;
        }
        let fit = fit_support(dict, &support, y);
        if !fit.well_conditioned() || fit.residual_norm > feasibility_tol {
            continue;
        }
        let l1: f64 = fit.coefficients.iter().map(|c| c.norm()).sum();
        if l1 <= objective_bound * (1.0 + 1e-12) && best.as_ref().map_or(true, |b| l1 < b.0) {
            best = Some((l1, support, fit.coefficients, fit.residual_norm));
        }
    }
    best.map(|(_, support, coefficients, residual)| {
        let mut solution = vec![Complex64::new(0.0, 0.0); n * n];
        for (&i, c) in support.iter().zip(&coefficients) {
            solution[i] = *c;
        }
        (solution, residual)
    })
}

fn solve(
    dict: &GaborDictionary,
    y: &ComplexVector,
    constraint: Constraint,
    opts: &SolverOptions,
) -> Result<RecoveryResult> {
    opts.validate()?;
    let n = dict.n();
    if y.len() != n {
        return Err(Error::LengthMismatch { expected: n, actual: y.len() });
    }
    let p = n * n;
    let mut rho = opts.penalty;
    let sqrt_p = (p as f64).sqrt();
    let y_norm = y.norm();
    let feasibility_tol = match constraint {
        Constraint::Equality => opts.abs_tol * (n as f64).sqrt() + opts.rel_tol * y_norm,
        Constraint::Entrywise(_) => opts.abs_tol,
    };
    let alpha = opts.relaxation;
    let polish = opts.polish && matches!(constraint, Constraint::Equality);

    let mut ws = Workspace {
        dict,
        y: y.as_slice(),
        constraint,
        inv_frame: 1.0 / dict.frame_bound(),
        residual: vec![Complex64::new(0.0, 0.0); n],
        back: vec![Complex64::new(0.0, 0.0); p],
        scratch: dict.scratch(),
    };
    let zero = Complex64::new(0.0, 0.0);
    let mut x = vec![zero; p];
    let mut z = vec![zero; p];
    let mut u = vec![zero; p];
    let mut v = vec![zero; p];
    let mut attempted: Vec<Vec<usize>> = Vec::new();
    let mut dual_res = f64::INFINITY;
    let mut residuals_met = false;
    let mut iterations = 0;

    let finish_certified = |c: Certified, iterations: usize| {
        let solution = CoefficientVector::new(n, c.solution).expect("length n^2");
        RecoveryResult::new(solution, iterations, c.primal, c.violation, true)
    };

    for it in 1..=opts.max_iterations {
        iterations = it;
        for ((vi, zi), ui) in v.iter_mut().zip(&z).zip(&u) {
            *vi = zi - ui;
        }
        ws.project(&v, &mut x);

        let mut dz = 0.0;
        let mut xz = 0.0;
        let mut x_sq = 0.0;
        let mut z_sq = 0.0;
        let mut u_sq = 0.0;
        for ((xi, zi), ui) in x.iter().zip(z.iter_mut()).zip(u.iter_mut()) {
            let relaxed = xi * alpha + *zi * (1.0 - alpha);
            let z_new = soft_threshold(relaxed + *ui, 1.0 / rho);
            dz += (z_new - *zi).norm_sqr();
            *zi = z_new;
            *ui += relaxed - z_new;
            let gap = xi - z_new;
            xz += gap.norm_sqr();
            x_sq += xi.norm_sqr();
            z_sq += z_new.norm_sqr();
            u_sq += ui.norm_sqr();
        }
        let primal_res = xz.sqrt();
        dual_res = rho * dz.sqrt();
        let eps_pri = sqrt_p * opts.abs_tol + opts.rel_tol * x_sq.sqrt().max(z_sq.sqrt());
        let eps_dual = sqrt_p * opts.abs_tol + opts.rel_tol * rho * u_sq.sqrt();

        if polish && it % POLISH_EVERY == 0 {
            let hint = ws.dual_estimate(&u, rho);
            if let Some(c) = try_polish(dict, y.as_slice(), &z, &hint, feasibility_tol, &mut attempted) {
                return Ok(finish_certified(c, it));
            }
        }

        if primal_res <= eps_pri && dual_res <= eps_dual {
            residuals_met = true;
            break;
        }

        if opts.adaptive_penalty && it % ADAPT_EVERY == 0 && it <= opts.max_iterations / 2 {
            let scale = if primal_res > BALANCE_RATIO * dual_res {
                PENALTY_STEP
            } else if dual_res > BALANCE_RATIO * primal_res {
                1.0 / PENALTY_STEP
            } else {
                1.0
            };
            if scale != 1.0 {
                rho *= scale;
                u.iter_mut().for_each(|ui| *ui /= scale);
            }
        }
    }

    if polish {
        let hint = ws.dual_estimate(&u, rho);
        if let Some(c) = try_polish(dict, y.as_slice(), &z, &hint, feasibility_tol, &mut attempted) {
            return Ok(finish_certified(c, iterations));
        }
    }

    let violation = ws.violation(&x);
    let converged = residuals_met && violation <= feasibility_tol;
    if polish && converged {
        let admm_objective: f64 = x.iter().map(|v| v.norm()).sum();
        if let Some((solution, residual)) =
            best_refit(dict, y.as_slice(), &z, feasibility_tol, admm_objective)
        {
            let solution = CoefficientVector::new(n, solution).expect("length n^2");
            return Ok(RecoveryResult::new(solution, iterations, residual, dual_res, true));
        }
    }
    let solution = CoefficientVector::new(n, x).expect("length n^2");
    Ok(RecoveryResult::new(solution, iterations, violation, dual_res, converged))
}
