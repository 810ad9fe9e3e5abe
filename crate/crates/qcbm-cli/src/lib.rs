//! Experiment orchestration for the `qcbm` library: JSON configs with
//! schema validation, target construction, regime labelling, multi-seed
//! training sweeps on a worker pool, and CSV/SVG/manifest emission.
//!
//! The binary exposes three subcommands: `run` executes a training or
//! estimator experiment from a config file (or from a manifest written by
//! an earlier run), `estimate-ft` runs an `ft_estimate` config, and
//! `list-divergences` prints the stable generator identifiers. Every random
//! draw in a run is derived from seeds stored in the manifest, so re-running
//! a manifest reproduces all CSV output bit for bit.

use std::fmt;
use std::io::{self, Write};

use qcbm::fdiv::Divergence;

pub mod charts;
pub mod config;
pub mod runner;

/// Failures split by exit status: config errors exit 2, runtime errors 3.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Runtime(msg) => write!(f, "runtime error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;

/// Package name, version, and the git hash the binary was built from.
pub fn version() -> String {
    format!(
        "{} {} ({})",
        env!("CARGO_PKG_NAME"),
        env!("CARGO_PKG_VERSION"),
        env!("GIT_HASH")
    )
}

/// Writes the stable divergence identifiers accepted in configs, one per
/// line, in registry order.
pub fn list_divergences(mut out: impl Write) -> io::Result<()> {
    for divergence in Divergence::ALL {
        writeln!(out, "{}", divergence.name())?;
    }
    Ok(())
}
