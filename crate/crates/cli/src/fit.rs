use anyhow::{bail, Context, Result};
use clap::Args;
use hazard_core::cox::{default_gamma_ratio, gamma_grid, GammaSelection};
use hazard_core::{fit_lasso, load_csv, score_screen, select_gamma, CoxFit, LassoOptions, ScreenMode};
use serde::{Deserialize, Serialize};

use crate::output::Outputs;
use crate::screen::screening_csv;
use crate::{DataArgs, GlobalArgs};

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Fixed penalty Gamma_n; skips cross-validation.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Length of the log-spaced penalty grid searched by cross-validation.
    #[arg(long, default_value_t = 20)]
    pub gamma_grid_len: usize,
    /// Cross-validation folds for the penalty.
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Radius R of the l1 ball constraint (default: unconstrained).
    #[arg(long)]
    pub radius: Option<f64>,
    /// Fit on unit-variance columns and map the coefficients back.
    #[arg(long)]
    pub standardize: bool,
    /// Convergence threshold on the largest coefficient change.
    #[arg(long, default_value_t = LassoOptions::default().tol)]
    pub tol: f64,
    /// Cap on outer Newton iterations.
    #[arg(long, default_value_t = LassoOptions::default().max_iter)]
    pub max_iter: usize,
    /// Screen covariates first, keeping the k largest score statistics.
    #[arg(long, conflicts_with = "screen_alpha")]
    pub screen_top_k: Option<usize>,
    /// Screen covariates first at this chi-square(1) level.
    #[arg(long)]
    pub screen_alpha: Option<f64>,
}

/// Contents of `fit.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// Covariates entering the model, in `beta` order.
    pub covariates: Vec<String>,
    pub n: usize,
    pub tau: f64,
    #[serde(flatten)]
    pub fit: CoxFit,
    #[serde(default)]
    pub gamma_selection: Option<GammaSelectionReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaSelectionReport {
    pub folds: usize,
    pub folds_used: usize,
    pub seed: u64,
    pub grid: Vec<f64>,
    pub cv_scores: Vec<f64>,
}

pub(crate) fn run(global: &GlobalArgs, args: &FitArgs) -> Result<()> {
    let opts = LassoOptions { tol: args.tol, max_iter: args.max_iter, standardize: args.standardize };
    let mut sample = load_csv(&args.data.data, &args.data.schema(global.tau))?;
    if sample.n_events_in_window() == 0 {
        bail!("no events in [0, tau]");
    }
    let mut out = Outputs::default();

    let mode = match (args.screen_top_k, args.screen_alpha) {
        (Some(k), _) => Some(ScreenMode::TopK(k)),
        (None, Some(alpha)) => Some(ScreenMode::Level(alpha)),
        (None, None) => None,
    };
    if let Some(mode) = mode {
        let screened = score_screen(&sample, mode).context("screening")?;
        out.add("screening.csv", screening_csv(sample.covariate_names(), &screened)?);
        if screened.kept.is_empty() {
            bail!("screening kept no covariates (threshold {})", screened.threshold);
        }
        log::info!("screening kept {} of {} covariates", screened.kept.len(), sample.p());
        sample = sample.select_covariates(&screened.kept)?;
    }

    let radius = args.radius.unwrap_or(f64::INFINITY);
    let (gamma, selection) = match args.gamma {
        Some(g) => (g, None),
        None => {
            if args.gamma_grid_len == 0 {
                bail!("--gamma-grid-len: must be at least 1");
            }
            let grid = gamma_grid(&sample, args.gamma_grid_len, default_gamma_ratio(&sample));
            let GammaSelection { selected, grid, cv_scores, folds_used } =
                select_gamma(&sample, &grid, args.folds, global.seed, &opts).context("selecting the penalty")?;
            log::info!("cross-validation chose gamma_n = {selected}");
            let report = GammaSelectionReport { folds: args.folds, folds_used, seed: global.seed, grid, cv_scores };
            (selected, Some(report))
        }
    };
    let fit = fit_lasso(&sample, gamma, radius, &opts).context("fitting the lasso")?;
    if !fit.converged {
        log::warn!("lasso stopped after {} iterations without converging", fit.iterations);
    }
    let report = FitReport {
        covariates: sample.covariate_names().to_vec(),
        n: sample.n(),
        tau: sample.tau(),
        fit,
        gamma_selection: selection,
    };
    let mut json = serde_json::to_vec_pretty(&report)?;
    json.push(b'\n');
    out.add("fit.json", json);
    out.commit(&global.out_dir)?;
    Ok(())
}
