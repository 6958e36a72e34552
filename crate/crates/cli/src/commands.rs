//! Default resolution, dispatch to the library, and artifact writing.

use crate::config::{
    BoundsParams, ClassicalCompareParams, Parameters, PhaseTransitionParams, PropertiesParams, RadarDemoParams,
    RunConfig, Snr, UsageError,
};
use radar_cs::bounds::BoundReport;
use radar_cs::classical::self_ambiguity;
use radar_cs::gabor::{verify_mub_properties, GaborDictionary, PropertyReport};
use radar_cs::harness::{
    experiment_solver_options, run_classical_l1_failure, run_phase_transition, run_radar_demo, PhaseTransitionCell,
    PhaseTransitionConfig, ProbeKind, RadarDemoConfig, SnrOutcome, SweepSolver,
};
use radar_cs::scenes::{devectorize, SUCCESS_THRESHOLD};
use radar_cs::tfcore::{alltop_sequence, default_pulse_width, gaussian_pulse};
use radar_cs::SolverOptions;
use serde::Serialize;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

pub const PHASE_TRANSITION_HEADER: &str = "n,k,trials,successes,fraction,mean_error,thm1,thm2,empirical_line";
pub const BOUNDS_HEADER: &str =
    "n,thm1,thm2,thm2_eps,thm3,thm3_eps,thm3_t,empirical_line,empirical_line_log2,empirical_line_log10";

/// Recovered coefficients at or below this modulus are left out of scene files.
pub const RECOVERED_THRESHOLD: f64 = 1e-9;

const DEFAULT_TOL: f64 = 1e-10;

/// Any failure while running an experiment or writing its artifacts.
#[derive(Debug)]
pub struct RunError(pub String);

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<radar_cs::Error> for RunError {
    fn from(e: radar_cs::Error) -> Self {
        RunError(e.to_string())
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError(e.to_string())
    }
}

fn usage(e: radar_cs::Error) -> UsageError {
    UsageError(e.to_string())
}

fn solver_options(max_iterations: Option<usize>, penalty: Option<f64>) -> SolverOptions {
    let base = experiment_solver_options();
    SolverOptions {
        max_iterations: max_iterations.unwrap_or(base.max_iterations),
        penalty: penalty.unwrap_or(base.penalty),
        ..base
    }
}

/// Fill every unset parameter with its default and validate the result.
pub fn resolve(mut cfg: RunConfig) -> Result<RunConfig, UsageError> {
    cfg.parameters = match cfg.parameters {
        Parameters::PhaseTransition(p) => {
            let full = p.full_grid.unwrap_or(false);
            let base = if full {
                PhaseTransitionConfig::full_grid(cfg.base_seed)
            } else {
                PhaseTransitionConfig::desk(cfg.base_seed)
            };
            let opts = solver_options(p.max_iterations, p.penalty);
            let resolved = PhaseTransitionParams {
                primes: Some(p.primes.unwrap_or(base.primes)),
                k_values: p.k_values,
                trials: Some(p.trials.unwrap_or(base.trials)),
                threshold: Some(p.threshold.unwrap_or(SUCCESS_THRESHOLD)),
                solver: Some(p.solver.unwrap_or(SweepSolver::Bp)),
                full_grid: Some(full),
                max_iterations: Some(opts.max_iterations),
                penalty: Some(opts.penalty),
            };
            phase_transition_config(&resolved, cfg.base_seed).validate().map_err(usage)?;
            Parameters::PhaseTransition(resolved)
        }
        Parameters::RadarDemo(p) => {
            let d = RadarDemoConfig::default();
            let opts = solver_options(p.max_iterations, p.penalty);
            let n = p.n.unwrap_or(d.n);
            let probe = p.probe.unwrap_or(d.probe);
            let resolved = RadarDemoParams {
                n: Some(n),
                k: Some(p.k.unwrap_or(d.k)),
                snr: Some(p.snr.unwrap_or_else(|| d.snr_list.iter().map(|&v| Snr(v)).collect())),
                probe: Some(probe),
                recovery: Some(p.recovery.unwrap_or(d.recovery)),
                pulse_width: Some(p.pulse_width.unwrap_or_else(|| default_pulse_width(n))),
                max_iterations: Some(opts.max_iterations),
                penalty: Some(opts.penalty),
            };
            radar_demo_config(&resolved, cfg.base_seed).validate().map_err(usage)?;
            Parameters::RadarDemo(resolved)
        }
        Parameters::ClassicalCompare(p) => {
            let n = p.n.unwrap_or(47);
            let opts = solver_options(p.max_iterations, p.penalty);
            let resolved = ClassicalCompareParams {
                n: Some(n),
                k: Some(p.k.unwrap_or(3)),
                pulse_width: Some(p.pulse_width.unwrap_or_else(|| default_pulse_width(n))),
                max_iterations: Some(opts.max_iterations),
                penalty: Some(opts.penalty),
            };
            alltop_sequence(n).map_err(usage)?;
            let bound = radar_cs::bounds::thm1_bound(n).map_err(usage)?;
            if resolved.k.unwrap() as f64 >= bound {
                return Err(UsageError(format!("k must be below the coherence bound {bound:.4} for n = {n}")));
            }
            opts.validate().map_err(usage)?;
            Parameters::ClassicalCompare(resolved)
        }
        Parameters::Properties(p) => {
            let probe = p.probe.unwrap_or(ProbeKind::Alltop);
            let n = p.n.unwrap_or(47);
            let tol = p.tol.unwrap_or(DEFAULT_TOL);
            if probe == ProbeKind::Alltop {
                alltop_sequence(n).map_err(usage)?;
            } else if n == 0 {
                return Err(UsageError("n must be positive".into()));
            }
            if !(tol > 0.0) {
                return Err(UsageError("tol must be positive".into()));
            }
            Parameters::Properties(PropertiesParams { probe: Some(probe), n: Some(n), tol: Some(tol) })
        }
        Parameters::Bounds(p) => {
            let eps = p.eps.unwrap_or(0.1);
            let resolved = BoundsParams {
                n: Some(p.n.unwrap_or_else(|| vec![47])),
                eps: Some(eps),
                thm3_eps: Some(p.thm3_eps.unwrap_or(eps)),
                t: Some(p.t.unwrap_or(1.0)),
            };
            if resolved.n.as_ref().unwrap().is_empty() {
                return Err(UsageError("no dimensions given".into()));
            }
            for &n in resolved.n.as_ref().unwrap() {
                BoundReport::evaluate(n, eps, resolved.thm3_eps.unwrap(), resolved.t.unwrap()).map_err(usage)?;
            }
            Parameters::Bounds(resolved)
        }
    };
    Ok(cfg)
}

fn phase_transition_config(p: &PhaseTransitionParams, base_seed: u64) -> PhaseTransitionConfig {
    let base = PhaseTransitionConfig::desk(base_seed);
    PhaseTransitionConfig {
        primes: p.primes.clone().unwrap_or(base.primes),
        k_values: p.k_values.clone(),
        trials: p.trials.unwrap_or(base.trials),
        success_threshold: p.threshold.unwrap_or(base.success_threshold),
        solver: p.solver.unwrap_or(base.solver),
        base_seed,
        solver_options: solver_options(p.max_iterations, p.penalty),
    }
}

fn radar_demo_config(p: &RadarDemoParams, base_seed: u64) -> RadarDemoConfig {
    let d = RadarDemoConfig::default();
    RadarDemoConfig {
        n: p.n.unwrap_or(d.n),
        k: p.k.unwrap_or(d.k),
        snr_list: p.snr.as_ref().map(|v| v.iter().map(|s| s.0).collect()).unwrap_or(d.snr_list),
        probe: p.probe.unwrap_or(d.probe),
        recovery: p.recovery.unwrap_or(d.recovery),
        seed: base_seed,
        pulse_width: p.pulse_width,
        solver_options: solver_options(p.max_iterations, p.penalty),
    }
}

fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), RunError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| RunError(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Run a resolved config and write its artifacts under `output_dir`.
pub fn execute(cfg: &RunConfig) -> Result<(), RunError> {
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(|e| RunError(format!("cannot create {}: {e}", dir.display())))?;
    fs::write(dir.join("config.json"), cfg.to_json())?;
    match &cfg.parameters {
        Parameters::PhaseTransition(p) => phase_transition(p, cfg.base_seed, dir),
        Parameters::RadarDemo(p) => radar_demo(p, cfg.base_seed, dir),
        Parameters::ClassicalCompare(p) => classical_compare(p, cfg.base_seed, dir),
        Parameters::Properties(p) => properties(p, cfg.base_seed, dir),
        Parameters::Bounds(p) => bounds(p, dir),
    }
}

pub fn phase_transition_csv(cells: &[PhaseTransitionCell]) -> String {
    let mut out = String::new();
    writeln!(out, "{PHASE_TRANSITION_HEADER}").unwrap();
    for c in cells {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            c.n,
            c.k,
            c.trials,
            c.successes,
            sci(c.fraction),
            sci(c.mean_error),
            sci(c.bounds.thm1),
            sci(c.bounds.thm2),
            sci(c.bounds.empirical_line)
        )
        .unwrap();
    }
    out
}

#[derive(Serialize)]
struct TransitionLine {
    n: usize,
    empirical_line: f64,
    empirical_line_log2: f64,
    empirical_line_log10: f64,
    thm1: f64,
    thm2: f64,
    thm2_eps: f64,
}

#[derive(Serialize)]
struct PhaseTransitionSummary<'a> {
    trials: usize,
    success_threshold: f64,
    solver: &'static str,
    lines: Vec<TransitionLine>,
    cells: &'a [PhaseTransitionCell],
}

fn phase_transition(p: &PhaseTransitionParams, base_seed: u64, dir: &Path) -> Result<(), RunError> {
    let cfg = phase_transition_config(p, base_seed);
    let cells = run_phase_transition(&cfg)?;
    fs::write(dir.join("phase_transition.csv"), phase_transition_csv(&cells))?;
    let mut lines: Vec<TransitionLine> = Vec::new();
    for c in &cells {
        if lines.last().map_or(true, |l| l.n != c.n) {
            lines.push(TransitionLine {
                n: c.n,
                empirical_line: c.bounds.empirical_line,
                empirical_line_log2: c.bounds.empirical_line_log2,
                empirical_line_log10: c.bounds.empirical_line_log10,
                thm1: c.bounds.thm1,
                thm2: c.bounds.thm2,
                thm2_eps: c.bounds.thm2_eps,
            });
        }
    }
    let summary = PhaseTransitionSummary {
        trials: cfg.trials,
        success_threshold: cfg.success_threshold,
        solver: cfg.solver.name(),
        lines,
        cells: &cells,
    };
    write_json(&dir.join("phase_transition_summary.json"), &summary)
}

#[derive(Serialize)]
struct DemoSummary<'a> {
    n: usize,
    k: usize,
    probe: &'static str,
    recovery: &'static str,
    seed: u64,
    outcomes: &'a [SnrOutcome],
}

fn radar_demo(p: &RadarDemoParams, base_seed: u64, dir: &Path) -> Result<(), RunError> {
    let cfg = radar_demo_config(p, base_seed);
    let result = run_radar_demo(&cfg)?;
    fs::write(dir.join("scene.json"), result.scene.to_json() + "\n")?;
    let mut failures = Vec::new();
    for o in &result.outcomes {
        let label = Snr(o.snr_db).to_string();
        if let Some(map) = &o.map {
            fs::write(dir.join(format!("ambiguity_snr_{label}.csv")), map.to_csv(cfg.probe.name()))?;
        }
        if let Some(s) = &o.recovered {
            fs::write(
                dir.join(format!("recovered_snr_{label}.json")),
                devectorize(s, RECOVERED_THRESHOLD).to_json() + "\n",
            )?;
        }
        if let Some(f) = &o.failure {
            failures.push(format!("SNR {label}: {f}"));
        }
    }
    let summary = DemoSummary {
        n: cfg.n,
        k: cfg.k,
        probe: cfg.probe.name(),
        recovery: cfg.recovery.name(),
        seed: cfg.seed,
        outcomes: &result.outcomes,
    };
    write_json(&dir.join("demo_summary.json"), &summary)?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(RunError(failures.join("; ")))
    }
}

#[derive(Serialize)]
struct ComparisonSummary<'a> {
    n: usize,
    k: usize,
    seed: u64,
    pulse_width: f64,
    gaussian: &'a radar_cs::harness::DictionaryOutcome,
    alltop: &'a radar_cs::harness::DictionaryOutcome,
}

fn classical_compare(p: &ClassicalCompareParams, base_seed: u64, dir: &Path) -> Result<(), RunError> {
    let n = p.n.unwrap_or(47);
    let width = p.pulse_width.unwrap_or_else(|| default_pulse_width(n));
    let opts = solver_options(p.max_iterations, p.penalty);
    let result = run_classical_l1_failure(n, p.k.unwrap_or(3), width, base_seed, &opts)?;
    fs::write(dir.join("scene.json"), result.scene.to_json() + "\n")?;
    for o in [&result.gaussian, &result.alltop] {
        let name = o.probe.name();
        fs::write(
            dir.join(format!("recovered_{name}.json")),
            devectorize(&o.recovered, RECOVERED_THRESHOLD).to_json() + "\n",
        )?;
    }
    fs::write(dir.join("ambiguity_gaussian-pulse.csv"), self_ambiguity(&gaussian_pulse(n, width)?)?.to_csv("gaussian-pulse"))?;
    fs::write(dir.join("ambiguity_alltop.csv"), self_ambiguity(&alltop_sequence(n)?)?.to_csv("alltop"))?;
    let summary = ComparisonSummary {
        n,
        k: result.k,
        seed: result.seed,
        pulse_width: width,
        gaussian: &result.gaussian,
        alltop: &result.alltop,
    };
    write_json(&dir.join("comparison.json"), &summary)
}

#[derive(Serialize)]
struct PropertiesOutput<'a> {
    probe: &'static str,
    #[serde(flatten)]
    report: &'a PropertyReport,
    pass: bool,
}

fn properties(p: &PropertiesParams, base_seed: u64, dir: &Path) -> Result<(), RunError> {
    let kind = p.probe.unwrap_or(ProbeKind::Alltop);
    let probe = kind.build(p.n.unwrap_or(47), base_seed, None)?;
    let dict = GaborDictionary::new(probe)?;
    let report = verify_mub_properties(&dict, p.tol.unwrap_or(DEFAULT_TOL))?;
    let out = PropertiesOutput { probe: kind.name(), report: &report, pass: report.pass() };
    write_json(&dir.join("properties.json"), &out)
}

pub fn bounds_csv(reports: &[BoundReport]) -> String {
    let mut out = String::new();
    writeln!(out, "{BOUNDS_HEADER}").unwrap();
    for r in reports {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.n,
            sci(r.thm1),
            sci(r.thm2),
            sci(r.thm2_eps),
            sci(r.thm3),
            sci(r.thm3_eps),
            sci(r.thm3_t),
            sci(r.empirical_line),
            sci(r.empirical_line_log2),
            sci(r.empirical_line_log10)
        )
        .unwrap();
    }
    out
}

fn bounds(p: &BoundsParams, dir: &Path) -> Result<(), RunError> {
    let eps = p.eps.unwrap_or(0.1);
    let reports = p
        .n
        .clone()
        .unwrap_or_else(|| vec![47])
        .into_iter()
        .map(|n| BoundReport::evaluate(n, eps, p.thm3_eps.unwrap_or(eps), p.t.unwrap_or(1.0)))
        .collect::<radar_cs::Result<Vec<_>>>()?;
    fs::write(dir.join("bounds.csv"), bounds_csv(&reports))?;
    Ok(())
}
