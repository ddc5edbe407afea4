//! Command-line front end: `fit`, `estimate`, `screen` and `simulate`.

mod estimate;
mod fit;
mod output;
mod screen;
mod simulate;

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hazard_core::data::CsvSchema;
use hazard_core::{CvWeighting, KernelKind};

pub use estimate::EstimateArgs;
pub use fit::{FitArgs, FitReport};
pub use screen::ScreenArgs;
pub use simulate::{SimulateArgs, SimulationConfig};

#[derive(Debug, Parser)]
#[command(name = "hazard", version, about = "Lasso Cox regression with adaptive kernel estimation of the baseline hazard")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Seed for cross-validation folds and simulated replications.
    #[arg(long, global = true, default_value_t = 2024)]
    pub seed: u64,
    /// Worker threads; 0 uses every available core. Outputs do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Directory that receives every output file.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    /// Number of points M of the uniform evaluation grid on [0, tau].
    #[arg(long, global = true, default_value_t = hazard_core::estimate::DEFAULT_GRID_POINTS)]
    pub grid_points: usize,
    /// GL variance constant kappa'; values from 1e-4 to 1000 are sensible.
    #[arg(long, global = true, default_value_t = hazard_core::bandwidth::DEFAULT_KAPPA_PRIME)]
    pub kappa_prime: f64,
    /// Analysis horizon tau (default: 90% quantile of the observed times; ignored by `simulate`).
    #[arg(long, global = true)]
    pub tau: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the Lasso Cox model, with a cross-validated penalty unless --gamma is given.
    Fit(FitArgs),
    /// Kernel baseline hazard estimates with GL- and CV-selected bandwidths.
    Estimate(EstimateArgs),
    /// Univariate score-test screening of the covariates.
    Screen(ScreenArgs),
    /// Monte-Carlo MISE experiments for one or more designs.
    Simulate(SimulateArgs),
}

/// Columns of the input CSV.
#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// Column holding the observed times X_i.
    #[arg(long, default_value = "time")]
    pub time_col: String,
    /// Column holding the event indicators (1 = event, 0 = censored).
    #[arg(long, default_value = "status")]
    pub status_col: String,
    /// Comma-separated covariate columns (default: every other column).
    #[arg(long, value_delimiter = ',')]
    pub covariates: Option<Vec<String>>,
    /// Skip rows with missing values instead of failing.
    #[arg(long)]
    pub drop_incomplete: bool,
}

impl DataArgs {
    fn schema(&self, tau: Option<f64>) -> CsvSchema {
        CsvSchema {
            time: self.time_col.clone(),
            status: self.status_col.clone(),
            covariates: self.covariates.clone(),
            tau,
            drop_incomplete: self.drop_incomplete,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    #[default]
    Epanechnikov,
    Biweight,
    Triangular,
}

impl From<KernelArg> for KernelKind {
    fn from(k: KernelArg) -> Self {
        match k {
            KernelArg::Epanechnikov => KernelKind::Epanechnikov,
            KernelArg::Biweight => KernelKind::Biweight,
            KernelArg::Triangular => KernelKind::Triangular,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum CvWeightingArg {
    /// Raw at-risk counts in the cross term.
    #[default]
    AtRisk,
    /// Cox risk sums n S_n(beta_hat, t).
    Cox,
}

impl From<CvWeightingArg> for CvWeighting {
    fn from(w: CvWeightingArg) -> Self {
        match w {
            CvWeightingArg::AtRisk => CvWeighting::AtRiskCount,
            CvWeightingArg::Cox => CvWeighting::CoxRiskSum,
        }
    }
}

/// Runs a parsed command inside a worker pool of the requested size.
pub fn run(cli: Cli) -> Result<()> {
    let global = cli.global;
    if global.grid_points < 2 {
        anyhow::bail!("--grid-points: need at least 2, got {}", global.grid_points);
    }
    if !(global.kappa_prime > 0.0 && global.kappa_prime.is_finite()) {
        anyhow::bail!("--kappa-prime: must be positive, got {}", global.kappa_prime);
    }
    if let Some(tau) = global.tau {
        if !(tau > 0.0 && tau.is_finite()) {
            anyhow::bail!("--tau: must be positive, got {tau}");
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(global.threads)
        .build()
        .context("building the worker pool")?;
    pool.install(|| match cli.command {
        Command::Fit(args) => fit::run(&global, &args),
        Command::Estimate(args) => estimate::run(&global, &args),
        Command::Screen(args) => screen::run(&global, &args),
        Command::Simulate(args) => simulate::run(&global, &args),
    })
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run(Cli::try_parse_from(args)?)
}
