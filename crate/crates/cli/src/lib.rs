//! Command-line front end: CSV ingestion, run configuration, and JSON or
//! aligned-text reports.
//!
//! Exit codes are 0 on success, 2 for configuration errors, 3 for data
//! errors and 4 for numerical failures.

pub mod args;
pub mod commands;
pub mod config;
pub mod ingest;
pub mod output;

pub use config::{BandwidthFlags, BandwidthMode, KernelOptions, RunConfig};
pub use ingest::{ingest_csv, parse_csv, Ingested};

use std::path::PathBuf;

/// Version of the JSON report layout.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Environment variable overriding the bundled W-quantile table.
pub const W_TABLE_ENV: &str = "SPHERICITY_W_TABLE";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] sphericity::Error),
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },
    #[error("configuration error: {0}")]
    Config(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use sphericity::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Write { .. } => 2,
            CliError::Core(e) => match e {
                E::Config(_) | E::Domain(_) | E::Table(_) => 2,
                E::ZeroVector { .. } | E::Dimension(_) | E::Parse { .. } => 3,
                E::Degenerate(_) | E::Factorization | E::QuadratureBudget(_) => 4,
            },
        }
    }
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    use clap::Parser;
    let cli = match args::Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match commands::run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
