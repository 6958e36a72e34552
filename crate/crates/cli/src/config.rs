//! Command-line flags, JSON config files and their merge into a resolved [`RunConfig`].

use clap::{Args, Parser, Subcommand};
use radar_cs::harness::{ProbeKind, RecoveryMethod, SweepSolver};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub const DEFAULT_OUTPUT_DIR: &str = "radar-cs-out";

/// Signal-to-noise ratio in dB; `inf` means noiseless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Snr(pub f64);

impl FromStr for Snr {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "inf" | "+inf" | "infinity" => Ok(Snr(f64::INFINITY)),
            _ => match t.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(Snr(v)),
                _ => Err(format!("invalid SNR '{s}': expected a number of dB or 'inf'")),
            },
        }
    }
}

impl fmt::Display for Snr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == f64::INFINITY {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for Snr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            serializer.serialize_f64(self.0)
        } else {
            serializer.serialize_str("inf")
        }
    }
}

impl<'de> Deserialize<'de> for Snr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Number(v) => Ok(Snr(v)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "radar-cs", version, about = "Compressed-sensing radar experiments over Gabor dictionaries")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Clone, Args, Default)]
pub struct CommonArgs {
    /// JSON config file; flags given on the command line override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory receiving all artifacts (created if missing).
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    /// Seed from which every random draw of the run is derived.
    #[arg(long, global = true)]
    pub base_seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Success fraction of exact recovery over an (N, K) grid.
    PhaseTransition {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        params: PhaseTransitionParams,
    },
    /// One sparse scene observed at several SNRs and recovered or imaged.
    RadarDemo {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        params: RadarDemoParams,
    },
    /// Basis pursuit over a Gaussian-pulse dictionary against the Alltop dictionary.
    ClassicalCompare {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        params: ClassicalCompareParams,
    },
    /// Orthonormality, mutual unbiasedness and coherence of a Gabor dictionary.
    Properties {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        params: PropertiesParams,
    },
    /// Sparsity bounds for the given dimensions.
    Bounds {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        params: BoundsParams,
    },
}

/// Overlay: fields set in `self` win over those of `base`.
trait Overlay: Sized {
    fn overlay(self, base: Self) -> Self;
}

macro_rules! params {
    ($(#[$meta:meta])* $name:ident { $($(#[$fmeta:meta])* $field:ident : $ty:ty),* $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct $name {
            $($(#[$fmeta])* pub $field: Option<$ty>,)*
        }

        impl Overlay for $name {
            fn overlay(self, base: Self) -> Self {
                Self { $($field: self.$field.or(base.$field),)* }
            }
        }
    };
}

params!(PhaseTransitionParams {
    /// Comma-separated primes (default 5..=47, or 5..=127 with --full-grid).
    #[arg(long, value_delimiter = ',')]
    primes: Vec<usize>,
    /// Comma-separated sparsities used for every prime (default 1..=N).
    #[arg(long, value_delimiter = ',')]
    k_values: Vec<usize>,
    #[arg(long)]
    trials: usize,
    /// Recovery counts as exact when ||s - s*||_2 <= threshold.
    #[arg(long)]
    threshold: f64,
    /// bp or omp.
    #[arg(long)]
    solver: SweepSolver,
    /// Primes up to 127 and 100 trials per cell.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    full_grid: bool,
    #[arg(long)]
    max_iterations: usize,
    /// Initial ADMM penalty.
    #[arg(long)]
    penalty: f64,
});

params!(RadarDemoParams {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    /// Comma-separated SNRs in dB; `inf` is noiseless.
    #[arg(long, value_delimiter = ',')]
    snr: Vec<Snr>,
    /// alltop, gaussian-pulse, gaussian-random or random-phase.
    #[arg(long)]
    probe: ProbeKind,
    /// bp, bpdn, omp or matched-filter.
    #[arg(long)]
    recovery: RecoveryMethod,
    /// Gaussian pulse width in samples (default scales with sqrt N).
    #[arg(long)]
    pulse_width: f64,
    #[arg(long)]
    max_iterations: usize,
    #[arg(long)]
    penalty: f64,
});

params!(ClassicalCompareParams {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    pulse_width: f64,
    #[arg(long)]
    max_iterations: usize,
    #[arg(long)]
    penalty: f64,
});

params!(PropertiesParams {
    /// alltop, gaussian-pulse, gaussian-random or random-phase.
    #[arg(long)]
    probe: ProbeKind,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    tol: f64,
});

params!(BoundsParams {
    /// Comma-separated dimensions.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    /// Failure probability of the random-support bound; also the default per-entry noise bound.
    #[arg(long)]
    eps: f64,
    /// Per-entry noise bound of the stability bound (defaults to --eps).
    #[arg(long)]
    thm3_eps: f64,
    /// l1 stability budget.
    #[arg(long)]
    t: f64,
});

#[derive(Debug, Clone, PartialEq)]
pub enum Parameters {
    PhaseTransition(PhaseTransitionParams),
    RadarDemo(RadarDemoParams),
    ClassicalCompare(ClassicalCompareParams),
    Properties(PropertiesParams),
    Bounds(BoundsParams),
}

impl Parameters {
    pub fn command(&self) -> &'static str {
        match self {
            Parameters::PhaseTransition(_) => "phase-transition",
            Parameters::RadarDemo(_) => "radar-demo",
            Parameters::ClassicalCompare(_) => "classical-compare",
            Parameters::Properties(_) => "properties",
            Parameters::Bounds(_) => "bounds",
        }
    }
}

/// A fully resolved run: every parameter has a concrete value.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub output_dir: PathBuf,
    pub base_seed: u64,
    pub parameters: Parameters,
}

#[derive(Serialize)]
struct RunConfigRef<'a> {
    command: &'static str,
    output_dir: &'a Path,
    base_seed: u64,
    parameters: serde_json::Value,
}

impl RunConfig {
    pub fn to_json(&self) -> String {
        let parameters = match &self.parameters {
            Parameters::PhaseTransition(p) => serde_json::to_value(p),
            Parameters::RadarDemo(p) => serde_json::to_value(p),
            Parameters::ClassicalCompare(p) => serde_json::to_value(p),
            Parameters::Properties(p) => serde_json::to_value(p),
            Parameters::Bounds(p) => serde_json::to_value(p),
        }
        .expect("parameters serialize");
        let doc = RunConfigRef {
            command: self.parameters.command(),
            output_dir: &self.output_dir,
            base_seed: self.base_seed,
            parameters,
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("config serializes");
        text.push('\n');
        text
    }
}

/// Contents of a `--config` file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    command: Option<String>,
    output_dir: Option<PathBuf>,
    base_seed: Option<u64>,
    #[serde(default)]
    parameters: serde_json::Value,
}

/// Usage-level problem: bad flags, unreadable or malformed config, invalid values.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn file_params<T: for<'de> Deserialize<'de> + Default>(value: serde_json::Value) -> Result<T, UsageError> {
    if value.is_null() {
        return Ok(T::default());
    }
    serde_json::from_value(value).map_err(|e| UsageError(format!("config parameters: {e}")))
}

/// Merge parsed flags with the optional config file. Defaults are filled in later
/// by [`crate::commands::resolve`].
pub fn merge(args: CommandArgs) -> Result<RunConfig, UsageError> {
    let (common, command) = match &args {
        CommandArgs::PhaseTransition { common, .. } => (common.clone(), "phase-transition"),
        CommandArgs::RadarDemo { common, .. } => (common.clone(), "radar-demo"),
        CommandArgs::ClassicalCompare { common, .. } => (common.clone(), "classical-compare"),
        CommandArgs::Properties { common, .. } => (common.clone(), "properties"),
        CommandArgs::Bounds { common, .. } => (common.clone(), "bounds"),
    };
    let file = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
            let file: FileConfig = serde_json::from_str(&text)
                .map_err(|e| UsageError(format!("config {}: {e}", path.display())))?;
            if let Some(c) = &file.command {
                if c != command {
                    return Err(UsageError(format!("config file is for '{c}', not '{command}'")));
                }
            }
            Some(file)
        }
        None => None,
    };
    let (file_dir, file_seed, file_parameters) = match file {
        Some(f) => (f.output_dir, f.base_seed, f.parameters),
        None => (None, None, serde_json::Value::Null),
    };
    let parameters = match args {
        CommandArgs::PhaseTransition { params, .. } => {
            Parameters::PhaseTransition(params.overlay(file_params(file_parameters)?))
        }
        CommandArgs::RadarDemo { params, .. } => Parameters::RadarDemo(params.overlay(file_params(file_parameters)?)),
        CommandArgs::ClassicalCompare { params, .. } => {
            Parameters::ClassicalCompare(params.overlay(file_params(file_parameters)?))
        }
        CommandArgs::Properties { params, .. } => Parameters::Properties(params.overlay(file_params(file_parameters)?)),
        CommandArgs::Bounds { params, .. } => Parameters::Bounds(params.overlay(file_params(file_parameters)?)),
    };
    Ok(RunConfig {
        output_dir: common.output_dir.or(file_dir).unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
        base_seed: common.base_seed.or(file_seed).unwrap_or(0),
        parameters,
    })
}
