//! Reproducible experiments: the recovery phase-transition sweep, the radar
//! demo over several SNRs, and the matched-filter-vs-Alltop l1 comparison.
//!
//! Every random draw comes from a seed derived as a pure function of the
//! experiment coordinates, so results do not depend on thread count or
//! execution order.

use crate::bounds::{is_prime, primes_between, thm1_bound, BoundReport};
use crate::classical::{ambiguity_map, footprint_width, AmbiguityMap};
use crate::error::{Error, Result};
use crate::gabor::{CoefficientVector, GaborDictionary};
use crate::rng::derive_seed;
use crate::scenes::{
    add_awgn_detailed, random_scene, scene_error, vectorize, NoiseSpec, SparseScene, SUCCESS_THRESHOLD,
};
use crate::solvers::{basis_pursuit, bpdn_entrywise, omp, RecoveryResult, SolverOptions};
use crate::tfcore::{
    alltop_sequence, default_pulse_width, gaussian_pulse, random_gaussian_probe, random_phase_probe,
    ComplexVector,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

// stream tags mixed into derived seeds
const PROBE_STREAM: u64 = 0x7072_6f62;
const NOISE_STREAM: u64 = 0x6e6f_6973;

/// Bound parameters reported next to every phase-transition cell.
pub const DEFAULT_THM2_EPS: f64 = 0.1;
pub const DEFAULT_THM3_EPS: f64 = 0.01;
pub const DEFAULT_THM3_T: f64 = 1.0;

/// Initial ADMM penalty used by the experiments. Scene coefficients are unit-power,
/// and a threshold of 0.1 reaches the solution markedly faster than 1.
pub const EXPERIMENT_PENALTY: f64 = 10.0;

pub fn experiment_solver_options() -> SolverOptions {
    SolverOptions { penalty: EXPERIMENT_PENALTY, ..SolverOptions::default() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepSolver {
    Bp,
    Omp,
}

impl SweepSolver {
    pub fn name(self) -> &'static str {
        match self {
            SweepSolver::Bp => "bp",
            SweepSolver::Omp => "omp",
        }
    }
}

impl std::str::FromStr for SweepSolver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bp" => Ok(SweepSolver::Bp),
            "omp" => Ok(SweepSolver::Omp),
            other => Err(Error::InvalidParameter(format!("unknown sweep solver '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTransitionConfig {
    pub primes: Vec<usize>,
    /// Sparsities per prime; `None` sweeps 1..=N.
    pub k_values: Option<Vec<usize>>,
    pub trials: usize,
    pub success_threshold: f64,
    pub solver: SweepSolver,
    pub base_seed: u64,
    pub solver_options: SolverOptions,
}

impl PhaseTransitionConfig {
    /// Primes 5..=47, 20 trials per cell.
    pub fn desk(base_seed: u64) -> Self {
        Self {
            primes: primes_between(5, 47),
            k_values: None,
            trials: 20,
            success_threshold: SUCCESS_THRESHOLD,
            solver: SweepSolver::Bp,
            base_seed,
            solver_options: experiment_solver_options(),
        }
    }

    /// Primes 5..=127, 100 trials per cell. Hours of compute.
    pub fn full_grid(base_seed: u64) -> Self {
        Self { primes: primes_between(5, 127), trials: 100, ..Self::desk(base_seed) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.primes.is_empty() {
            return Err(Error::InvalidParameter("no primes given".into()));
        }
        for &n in &self.primes {
            if n < 5 {
                return Err(Error::DimensionTooSmall { n, min: 5 });
            }
            if !is_prime(n) {
                return Err(Error::NotPrime(n));
            }
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if !(self.success_threshold > 0.0) {
            return Err(Error::InvalidParameter("success threshold must be positive".into()));
        }
        if let Some(ks) = &self.k_values {
            let smallest = self.primes.iter().min().copied().unwrap_or(0);
            if let Some(&k) = ks.iter().find(|&&k| k > smallest * smallest) {
                return Err(Error::SparsityOutOfRange { k, max: smallest * smallest });
            }
        }
        self.solver_options.validate()
    }

    fn k_values_for(&self, n: usize) -> Vec<usize> {
        match &self.k_values {
            Some(ks) => ks.clone(),
            None => (1..=n).collect(),
        }
    }
}

impl Default for PhaseTransitionConfig {
    fn default() -> Self {
        Self::desk(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseTransitionCell {
    pub n: usize,
    pub k: usize,
    pub trials: usize,
    pub successes: usize,
    pub fraction: f64,
    /// Mean of `||s - s*||_2` over the trials.
    pub mean_error: f64,
    /// Trials whose solver did not report convergence (all counted as failures).
    pub not_converged: usize,
    pub bounds: BoundReport,
}

/// Seed of trial `t` in cell `(n, k)`.
pub fn trial_seed(base_seed: u64, n: usize, k: usize, trial: usize) -> u64 {
    derive_seed(&[base_seed, n as u64, k as u64, trial as u64])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub error: f64,
    pub converged: bool,
    pub success: bool,
}

/// One noiseless recovery trial on the Alltop dictionary `dict`.
pub fn run_trial(
    dict: &GaborDictionary,
    k: usize,
    seed: u64,
    solver: SweepSolver,
    threshold: f64,
    opts: &SolverOptions,
) -> Result<TrialOutcome> {
    let n = dict.n();
    let scene = random_scene(n, k, seed)?;
    let s = vectorize(&scene);
    let y = dict.apply(&s)?;
    let result = match solver {
        SweepSolver::Bp => basis_pursuit(dict, &y, opts)?,
        SweepSolver::Omp => omp(dict, &y, k.max(1), 1e-10 * y.norm())?,
    };
    let error = scene_error(&s, &result.solution)?;
    Ok(TrialOutcome { error, converged: result.converged, success: result.converged && error <= threshold })
}

/// Fraction of exact recoveries for every `(N, K)` pair of the config.
///
/// Trials run in parallel on the current rayon pool; aggregation follows the
/// `(N, K, trial)` order. A solver error counts as a failed trial with infinite error.
pub fn run_phase_transition(cfg: &PhaseTransitionConfig) -> Result<Vec<PhaseTransitionCell>> {
    cfg.validate()?;
    let mut cells = Vec::new();
    for &n in &cfg.primes {
        let dict = GaborDictionary::new(alltop_sequence(n)?)?;
        let bounds = BoundReport::evaluate(n, DEFAULT_THM2_EPS, DEFAULT_THM3_EPS, DEFAULT_THM3_T)?;
        let ks = cfg.k_values_for(n);
        let tasks: Vec<(usize, usize)> =
            ks.iter().flat_map(|&k| (0..cfg.trials).map(move |t| (k, t))).collect();
        let outcomes: Vec<TrialOutcome> = tasks
            .par_iter()
            .map(|&(k, t)| {
                let seed = trial_seed(cfg.base_seed, n, k, t);
                run_trial(&dict, k, seed, cfg.solver, cfg.success_threshold, &cfg.solver_options)
                    .unwrap_or(TrialOutcome { error: f64::INFINITY, converged: false, success: false })
            })
            .collect();
        for (&k, chunk) in ks.iter().zip(outcomes.chunks(cfg.trials)) {
            let successes = chunk.iter().filter(|o| o.success).count();
            let error_sum: f64 = chunk.iter().map(|o| o.error).sum();
            cells.push(PhaseTransitionCell {
                n,
                k,
                trials: cfg.trials,
                successes,
                fraction: successes as f64 / cfg.trials as f64,
                mean_error: error_sum / cfg.trials as f64,
                not_converged: chunk.iter().filter(|o| !o.converged).count(),
                bounds: bounds.clone(),
            });
        }
    }
    Ok(cells)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeKind {
    Alltop,
    GaussianPulse,
    GaussianRandom,
    RandomPhase,
}

impl ProbeKind {
    pub fn name(self) -> &'static str {
        match self {
            ProbeKind::Alltop => "alltop",
            ProbeKind::GaussianPulse => "gaussian-pulse",
            ProbeKind::GaussianRandom => "gaussian-random",
            ProbeKind::RandomPhase => "random-phase",
        }
    }

    /// Unit-norm probe of length `n`. Random probes draw from a stream derived from `seed`;
    /// the pulse uses `pulse_width` or the default width for `n`.
    pub fn build(self, n: usize, seed: u64, pulse_width: Option<f64>) -> Result<ComplexVector> {
        let probe_seed = derive_seed(&[seed, PROBE_STREAM]);
        match self {
            ProbeKind::Alltop => alltop_sequence(n),
            ProbeKind::GaussianPulse => gaussian_pulse(n, pulse_width.unwrap_or_else(|| default_pulse_width(n))),
            ProbeKind::GaussianRandom => random_gaussian_probe(n, probe_seed),
            ProbeKind::RandomPhase => random_phase_probe(n, probe_seed),
        }
    }
}

impl std::str::FromStr for ProbeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alltop" => Ok(ProbeKind::Alltop),
            "gaussian-pulse" => Ok(ProbeKind::GaussianPulse),
            "gaussian-random" => Ok(ProbeKind::GaussianRandom),
            "random-phase" => Ok(ProbeKind::RandomPhase),
            other => Err(Error::InvalidParameter(format!("unknown probe '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecoveryMethod {
    Bp,
    Bpdn,
    Omp,
    MatchedFilter,
}

impl RecoveryMethod {
    pub fn name(self) -> &'static str {
        match self {
            RecoveryMethod::Bp => "bp",
            RecoveryMethod::Bpdn => "bpdn",
            RecoveryMethod::Omp => "omp",
            RecoveryMethod::MatchedFilter => "matched-filter",
        }
    }
}

impl std::str::FromStr for RecoveryMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bp" => Ok(RecoveryMethod::Bp),
            "bpdn" => Ok(RecoveryMethod::Bpdn),
            "omp" => Ok(RecoveryMethod::Omp),
            "matched-filter" => Ok(RecoveryMethod::MatchedFilter),
            other => Err(Error::InvalidParameter(format!("unknown recovery method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarDemoConfig {
    pub n: usize,
    pub k: usize,
    /// SNRs in dB; `f64::INFINITY` is the noiseless case.
    pub snr_list: Vec<f64>,
    pub probe: ProbeKind,
    pub recovery: RecoveryMethod,
    pub seed: u64,
    pub pulse_width: Option<f64>,
    pub solver_options: SolverOptions,
}

impl Default for RadarDemoConfig {
    fn default() -> Self {
        Self {
            n: 47,
            k: 8,
            snr_list: vec![f64::INFINITY, 15.0, 5.0],
            probe: ProbeKind::Alltop,
            recovery: RecoveryMethod::Bp,
            seed: 0,
            pulse_width: None,
            solver_options: experiment_solver_options(),
        }
    }
}

impl RadarDemoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 5 {
            return Err(Error::DimensionTooSmall { n: self.n, min: 5 });
        }
        if self.probe == ProbeKind::Alltop && !is_prime(self.n) {
            return Err(Error::NotPrime(self.n));
        }
        if self.k > self.n * self.n {
            return Err(Error::SparsityOutOfRange { k: self.k, max: self.n * self.n });
        }
        if self.snr_list.is_empty() {
            return Err(Error::InvalidParameter("snr list is empty".into()));
        }
        for &snr in &self.snr_list {
            NoiseSpec::new(snr, 0)?;
        }
        if let Some(w) = self.pulse_width {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidParameter(format!("pulse width must be positive, got {w}")));
            }
        }
        self.solver_options.validate()
    }
}

/// Metrics of one SNR point of the demo.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnrOutcome {
    pub snr_db: f64,
    pub noise_energy: f64,
    pub noise_max_entry: f64,
    /// `||s - s*||_2`; absent for the matched filter, which gives an image, not coefficients.
    pub error: Option<f64>,
    pub converged: Option<bool>,
    pub iterations: Option<usize>,
    /// True targets among the K largest recovered magnitudes (or map values).
    pub true_positives: usize,
    /// Matched filter only: delay-axis FWHM at each target cell, in scene order.
    pub footprints: Vec<f64>,
    /// Matched filter only: weakest map value on a target cell.
    pub weakest_target_peak: Option<f64>,
    /// Matched filter only: strongest map value off the target cells.
    pub strongest_off_target: Option<f64>,
    /// Set when this SNR point failed; the other fields are then zero/empty.
    pub failure: Option<String>,
    #[serde(skip)]
    pub recovered: Option<CoefficientVector>,
    #[serde(skip)]
    pub map: Option<AmbiguityMap>,
}

impl SnrOutcome {
    fn failed(snr_db: f64, err: Error) -> Self {
        Self {
            snr_db,
            noise_energy: 0.0,
            noise_max_entry: 0.0,
            error: None,
            converged: None,
            iterations: None,
            true_positives: 0,
            footprints: Vec::new(),
            weakest_target_peak: None,
            strongest_off_target: None,
            failure: Some(err.to_string()),
            recovered: None,
            map: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoResult {
    pub config: RadarDemoConfig,
    pub scene: SparseScene,
    pub probe: ComplexVector,
    pub outcomes: Vec<SnrOutcome>,
}

/// Number of true support cells among the `k` largest entries of `values`.
fn top_k_overlap(values: &[f64], support: &[usize], k: usize) -> usize {
    let mut order: Vec<usize> = (0..values.len()).collect();
    // stable sort: ties go to the lower index
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    order[..k.min(order.len())].iter().filter(|i| support.binary_search(i).is_ok()).count()
}

fn magnitudes(s: &CoefficientVector) -> Vec<f64> {
    s.as_slice().iter().map(|c| c.norm()).collect()
}

/// One fixed scene observed at every SNR of the config, then recovered or imaged.
pub fn run_radar_demo(cfg: &RadarDemoConfig) -> Result<DemoResult> {
    cfg.validate()?;
    let probe = cfg.probe.build(cfg.n, cfg.seed, cfg.pulse_width)?;
    let dict = GaborDictionary::new(probe.clone())?;
    let scene = random_scene(cfg.n, cfg.k, cfg.seed)?;
    let s = vectorize(&scene);
    let clean = dict.apply(&s)?;
    let outcomes = cfg
        .snr_list
        .iter()
        .map(|&snr| demo_point(cfg, &dict, &probe, &scene, &s, &clean, snr).unwrap_or_else(|e| SnrOutcome::failed(snr, e)))
        .collect();
    Ok(DemoResult { config: cfg.clone(), scene, probe, outcomes })
}

fn demo_point(
    cfg: &RadarDemoConfig,
    dict: &GaborDictionary,
    probe: &ComplexVector,
    scene: &SparseScene,
    s: &CoefficientVector,
    clean: &ComplexVector,
    snr: f64,
) -> Result<SnrOutcome> {
    let noise = NoiseSpec::new(snr, derive_seed(&[cfg.seed, NOISE_STREAM, snr.to_bits()]))?;
    let observed = add_awgn_detailed(clean, noise)?;
    let y = &observed.observation;
    let support = scene.support();
    let mut out = SnrOutcome {
        snr_db: snr,
        noise_energy: observed.noise_energy,
        noise_max_entry: observed.noise_max_entry,
        error: None,
        converged: None,
        iterations: None,
        true_positives: 0,
        footprints: Vec::new(),
        weakest_target_peak: None,
        strongest_off_target: None,
        failure: None,
        recovered: None,
        map: None,
    };
    let result: RecoveryResult = match cfg.recovery {
        RecoveryMethod::MatchedFilter => {
            let map = ambiguity_map(probe, y)?;
            out.true_positives = top_k_overlap(map.values(), &support, cfg.k);
            out.footprints = scene
                .targets()
                .iter()
                .map(|t| footprint_width(&map, t.cell))
                .collect::<Result<_>>()?;
            let (mut weakest, mut strongest) = (f64::INFINITY, 0.0f64);
            for (i, &v) in map.values().iter().enumerate() {
                if support.binary_search(&i).is_ok() {
                    weakest = weakest.min(v);
                } else {
                    strongest = strongest.max(v);
                }
            }
            out.weakest_target_peak = (!support.is_empty()).then_some(weakest);
            out.strongest_off_target = Some(strongest);
            out.map = Some(map);
            return Ok(out);
        }
        RecoveryMethod::Bp => basis_pursuit(dict, y, &cfg.solver_options)?,
        // the per-entry bound is the realized noise maximum
        RecoveryMethod::Bpdn => bpdn_entrywise(dict, y, observed.noise_max_entry, &cfg.solver_options)?,
        RecoveryMethod::Omp => omp(dict, y, cfg.k.max(1), observed.noise_energy.sqrt().max(1e-10 * y.norm()))?,
    };
    out.error = Some(scene_error(s, &result.solution)?);
    out.converged = Some(result.converged);
    out.iterations = Some(result.iterations);
    out.true_positives = top_k_overlap(&magnitudes(&result.solution), &support, cfg.k);
    out.recovered = Some(result.solution);
    Ok(out)
}

/// Basis-pursuit outcome on one dictionary of the comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DictionaryOutcome {
    pub probe: ProbeKind,
    pub error: f64,
    pub converged: bool,
    pub iterations: usize,
    /// True targets among the K largest recovered magnitudes.
    pub true_positives: usize,
    #[serde(skip)]
    pub recovered: CoefficientVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonResult {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub pulse_width: f64,
    pub scene: SparseScene,
    pub gaussian: DictionaryOutcome,
    pub alltop: DictionaryOutcome,
}

/// The same K-sparse scene recovered by basis pursuit over a Gaussian-pulse
/// dictionary and over the Alltop dictionary.
pub fn run_classical_l1_failure(
    n: usize,
    k: usize,
    pulse_width: f64,
    seed: u64,
    opts: &SolverOptions,
) -> Result<ComparisonResult> {
    let bound = thm1_bound(n)?;
    if k as f64 >= bound {
        return Err(Error::InvalidParameter(format!("k = {k} is not below the coherence bound {bound}")));
    }
    let scene = random_scene(n, k, seed)?;
    let s = vectorize(&scene);
    let support = scene.support();
    let run = |kind: ProbeKind, probe: ComplexVector| -> Result<DictionaryOutcome> {
        let dict = GaborDictionary::new(probe)?;
        let y = dict.apply(&s)?;
        let result = basis_pursuit(&dict, &y, opts)?;
        Ok(DictionaryOutcome {
            probe: kind,
            error: scene_error(&s, &result.solution)?,
            converged: result.converged,
            iterations: result.iterations,
            true_positives: top_k_overlap(&magnitudes(&result.solution), &support, k),
            recovered: result.solution,
        })
    };
    let gaussian = run(ProbeKind::GaussianPulse, gaussian_pulse(n, pulse_width)?)?;
    let alltop = run(ProbeKind::Alltop, alltop_sequence(n)?)?;
    Ok(ComparisonResult { n, k, seed, pulse_width, scene, gaussian, alltop })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlap_counts_top_entries() {
        let values = [0.1, 5.0, 0.3, 4.0, 0.0];
        assert_eq!(top_k_overlap(&values, &[1, 3], 2), 2);
        assert_eq!(top_k_overlap(&values, &[0, 2], 2), 0);
        assert_eq!(top_k_overlap(&values, &[2], 3), 1);
        assert_eq!(top_k_overlap(&values, &[], 0), 0);
    }

    #[test]
    fn trial_seeds_depend_on_every_coordinate() {
        let base = trial_seed(1, 47, 3, 0);
        assert_ne!(base, trial_seed(2, 47, 3, 0));
        assert_ne!(base, trial_seed(1, 43, 3, 0));
        assert_ne!(base, trial_seed(1, 47, 4, 0));
        assert_ne!(base, trial_seed(1, 47, 3, 1));
        assert_eq!(base, trial_seed(1, 47, 3, 0));
    }

    #[test]
    fn probe_names_round_trip() {
        for kind in [ProbeKind::Alltop, ProbeKind::GaussianPulse, ProbeKind::GaussianRandom, ProbeKind::RandomPhase] {
            assert_eq!(kind.name().parse::<ProbeKind>().unwrap(), kind);
        }
        for m in [RecoveryMethod::Bp, RecoveryMethod::Bpdn, RecoveryMethod::Omp, RecoveryMethod::MatchedFilter] {
            assert_eq!(m.name().parse::<RecoveryMethod>().unwrap(), m);
        }
    }
}
