//! Experiment drivers behind the `douba` binary.
//!
//! Every command reads one JSON config (unknown keys rejected, relative paths
//! resolved against the config's directory), writes its outputs to a
//! directory and reports an [`Outcome`]. [`exit_code`] maps results onto the
//! process contract: 0 certified, 1 usage or I/O error, 2 numerical failure,
//! non-convergence or bound violation.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod output;

#[derive(Debug, Parser)]
#[command(name = "douba", version, about = "Doubly regularized entropic Wasserstein barycenters")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Grid barycenter by dual ascent or the τ = λ alternating scheme.
    Barycenter(RunArgs),
    /// Noisy particle gradient descent.
    Npgd(RunArgs),
    /// KL between empirical and population barycenters as the sample size grows.
    RateStudy(RunArgs),
    /// Distance between Gaussian barycenter and marginal over a (λ, τ) lattice.
    GaussianMap(RunArgs),
    /// Barycenter sensitivity to displaced marginals against the W1 bound.
    StabilityProbe(RunArgs),
    /// Single EOT solve between two measures.
    Eot(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// JSON configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Record the optimizer trace.
    #[arg(long)]
    pub trace: bool,
    /// Save a snapshot every S iterations (0 disables).
    #[arg(long, default_value_t = 0)]
    pub snapshot_every: usize,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RunArgs {
    pub fn new(config: impl Into<PathBuf>) -> Self {
        RunArgs { config: config.into(), trace: false, snapshot_every: 0, out: None }
    }
}

/// What a command achieved once its outputs are written.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Certified,
    /// Outputs were written but a tolerance or bound was not met.
    Flagged(String),
}

/// Error raised by the drivers for failures that are numerical rather than
/// usage or I/O related.
#[derive(Debug)]
pub struct NumericalError(pub String);

impl std::fmt::Display for NumericalError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for NumericalError {}

pub fn run(command: &Command) -> anyhow::Result<Outcome> {
    match command {
        Command::Barycenter(a) => commands::barycenter::run(a),
        Command::Npgd(a) => commands::npgd::run(a),
        Command::RateStudy(a) => commands::rate_study::run(a),
        Command::GaussianMap(a) => commands::gaussian_map::run(a),
        Command::StabilityProbe(a) => commands::stability::run(a),
        Command::Eot(a) => commands::eot::run(a),
    }
}

pub fn exit_code(result: &anyhow::Result<Outcome>) -> i32 {
    match result {
        Ok(Outcome::Certified) => 0,
        Ok(Outcome::Flagged(_)) => 2,
        Err(e) if is_numerical(e) => 2,
        Err(_) => 1,
    }
}

fn is_numerical(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        if c.is::<NumericalError>() {
            return true;
        }
        matches!(
            c.downcast_ref::<douba::Error>(),
            Some(
                douba::Error::NumericalFailure(_)
                    | douba::Error::StepSize(_)
                    | douba::Error::Consistency(_)
                    | douba::Error::CertificateUndefined(_)
            )
        )
    })
}

/// Sets the global rayon pool size from `DOUBA_THREADS` when present.
pub fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("DOUBA_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| anyhow::anyhow!("DOUBA_THREADS=`{v}` is not a positive integer"))?;
        if n == 0 {
            anyhow::bail!("DOUBA_THREADS must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

pub(crate) fn config_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}
