use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qcbm_cli::config::{load_experiment, Experiment, Overrides};
use qcbm_cli::runner::{run_experiment, RunOptions};
use qcbm_cli::{CliError, CliResult};

#[derive(Parser)]
#[command(
    name = "qcbm",
    version = qcbm_cli::version(),
    about = "Born-machine training sweeps and query-counted divergence estimation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a JSON config, or re-run a manifest.
    Run {
        config: PathBuf,
        /// Replace the config's seed list with 1..=N.
        #[arg(long, value_name = "N")]
        seed_count: Option<usize>,
        /// Output directory, overriding the config's `output`.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Validate the config and write the manifest without running.
        #[arg(long)]
        dry_run: bool,
        /// Also emit SVG convergence charts from the summary.
        #[arg(long)]
        charts: bool,
    },
    /// Run a query-counted estimator config (kind must be ft_estimate).
    EstimateFt { config: PathBuf },
    /// List the stable divergence identifiers accepted in configs.
    ListDivergences,
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run {
            config,
            seed_count,
            out,
            dry_run,
            charts,
        } => {
            let overrides = Overrides { seed_count, out };
            let experiment = load_experiment(&config, &overrides)?;
            run_experiment(&experiment, &RunOptions { dry_run, charts })
        }
        Command::EstimateFt { config } => {
            let experiment = load_experiment(&config, &Overrides::default())?;
            if let Experiment::Training(cfg) = &experiment {
                return Err(CliError::Config(format!(
                    "estimate-ft requires kind ft_estimate, got `{}` (use `run`)",
                    cfg.kind
                )));
            }
            run_experiment(&experiment, &RunOptions::default())
        }
        Command::ListDivergences => qcbm_cli::list_divergences(io::stdout())
            .map_err(|e| CliError::Runtime(e.to_string())),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("{error}");
            ExitCode::from(error.exit_code())
        }
    }
}
