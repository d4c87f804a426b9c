//! Library side of the `ncbt` binary: configuration, commands and the
//! verification suite. `main` only parses arguments and maps errors to exit
//! codes.

pub mod args;
mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod verify;

use std::path::PathBuf;

use args::{Cli, Command, Common, RunArgs};
use config::RunConfig;
use error::CliError;

/// Output directory when neither `--out` nor `output.dir` is given.
pub const DEFAULT_OUT_DIR: &str = "ncbt-out";

/// A loaded configuration together with the resolved command-line overrides.
pub struct Run {
    pub config: RunConfig,
    pub seed: u64,
    pub out: PathBuf,
}

impl Run {
    pub fn prepare(args: &RunArgs) -> Result<Self, CliError> {
        let config = RunConfig::load(&args.config)?;
        let seed = args.common.seed.unwrap_or(config.invariant.seed);
        let out = args
            .common
            .out
            .clone()
            .or_else(|| config.output.dir.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
        Ok(Run { config, seed, out })
    }
}

fn common(command: &Command) -> &Common {
    match command {
        Command::Spectrum(a) | Command::Butterfly(a) | Command::Chern(a) | Command::Winding(a) => &a.common,
        Command::Verify(a) => &a.common,
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let jobs = common(&cli.command).jobs;
    if jobs == Some(0) {
        return Err(CliError::Config("--jobs must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {} worker threads: {e}", jobs.unwrap_or(0))))?;
    pool.install(|| match &cli.command {
        Command::Spectrum(a) => commands::spectrum(&Run::prepare(a)?),
        Command::Butterfly(a) => commands::butterfly(&Run::prepare(a)?),
        Command::Chern(a) => commands::chern(&Run::prepare(a)?),
        Command::Winding(a) => commands::winding(&Run::prepare(a)?),
        Command::Verify(a) => verify::command(a),
    })
}
