use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "ncbt", version, about = "Spectra, butterflies and non-commutative Chern numbers of lattice models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues of each disorder sample and the gaps of their union.
    Spectrum(RunArgs),
    /// Clean Hofstadter spectra over a list of fluxes.
    Butterfly(RunArgs),
    /// Even Chern number of the Fermi projection.
    Chern(RunArgs),
    /// Odd Chern number (winding) of a chiral model.
    Winding(RunArgs),
    /// Runs the built-in property and calibration suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Worker threads; falls back to NCBT_JOBS, then to all cores.
    #[arg(long, env = "NCBT_JOBS")]
    pub jobs: Option<usize>,
    /// Overrides invariant.seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; overrides output.dir.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML run configuration (JSON when the name ends in .json).
    #[arg(long)]
    pub config: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Accepted for interface symmetry; the suites need no configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
    /// Deliberately breaks one convention to show the suite catches it.
    #[arg(long, value_enum, hide = true)]
    pub mutate: Option<Mutation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mutation {
    /// Flip the sign of the even prefactor `Λ₂`.
    Lambda2Sign,
}
