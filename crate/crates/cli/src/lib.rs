//! Front end of the `radar-cs` binary: argument and config-file parsing,
//! experiment dispatch and artifact output.
//!
//! Exit codes: 0 success, 1 experiment or I/O failure, 2 usage error.

pub mod commands;
pub mod config;

use clap::error::ErrorKind;
use clap::Parser;
use std::ffi::OsString;

pub use commands::{execute, resolve, RunError};
pub use config::{merge, Cli, RunConfig, UsageError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable capping the worker threads of the harness (0 = one per core).
pub const THREADS_ENV: &str = "RADAR_CS_THREADS";

/// Parse `argv` (including the program name) and the optional config file into a resolved config.
pub fn parse_config<I, T>(argv: I) -> Result<RunConfig, ParseOutcome>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(ParseOutcome::Clap)?;
    let cfg = merge(cli.command).map_err(ParseOutcome::Usage)?;
    resolve(cfg).map_err(ParseOutcome::Usage)
}

#[derive(Debug)]
pub enum ParseOutcome {
    Clap(clap::Error),
    Usage(UsageError),
}

fn thread_count() -> Result<usize, UsageError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| UsageError(format!("{THREADS_ENV} must be a nonnegative integer, got '{v}'"))),
        Err(_) => Ok(0),
    }
}

/// Full program run; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    if argv.len() <= 1 {
        let _ = Cli::try_parse_from(["radar-cs", "--help"]).map_err(|e| eprint!("{}", e.render()));
        return EXIT_USAGE;
    }
    let cfg = match parse_config(argv) {
        Ok(cfg) => cfg,
        Err(ParseOutcome::Clap(e)) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
        Err(ParseOutcome::Usage(e)) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let threads = match thread_count() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return EXIT_FAILURE;
        }
    };
    match pool.install(|| execute(&cfg)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}
