use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use hazard_core::estimate::uniform_grid;
use hazard_core::{load_csv, make_grid, select_cv, select_gl, CvSelection, Error, KernelSpec};

use crate::fit::FitReport;
use crate::output::Outputs;
use crate::screen::csv_writer;
use crate::{CvWeightingArg, DataArgs, GlobalArgs, KernelArg};

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    /// `fit.json` written by `hazard fit`.
    #[arg(long)]
    pub fit: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    /// Smoothing kernel.
    #[arg(long, value_enum, default_value_t = KernelArg::Epanechnikov)]
    pub kernel: KernelArg,
    /// Risk denominators of the cross-validation criterion.
    #[arg(long, value_enum, default_value_t = CvWeightingArg::AtRisk)]
    pub cv_weighting: CvWeightingArg,
}

fn cv_csv(cv: &CvSelection) -> Result<Vec<u8>> {
    let mut writer = csv_writer();
    writer.write_record(["h", "criterion", "selected"])?;
    for (h, c) in cv.bandwidths.iter().zip(&cv.criteria) {
        writer.write_record([h.to_string(), c.to_string(), u8::from(*h == cv.selected).to_string()])?;
    }
    Ok(writer.into_inner()?)
}

pub(crate) fn run(global: &GlobalArgs, args: &EstimateArgs) -> Result<()> {
    let raw = fs::read_to_string(&args.fit).with_context(|| format!("reading {}", args.fit.display()))?;
    let report: FitReport = serde_json::from_str(&raw).with_context(|| format!("parsing {}", args.fit.display()))?;
    if report.covariates.len() != report.fit.beta.len() {
        bail!("{}: {} covariates but {} coefficients", args.fit.display(), report.covariates.len(), report.fit.beta.len());
    }
    if args.data.covariates.is_some() {
        log::warn!("--covariates is ignored; the columns named in the fit are used");
    }
    let mut schema = args.data.schema(Some(global.tau.unwrap_or(report.tau)));
    schema.covariates = Some(report.covariates.clone());
    let sample = load_csv(&args.data.data, &schema)?;
    if sample.n_events_in_window() == 0 {
        return Err(Error::NoEvents.into());
    }

    let kernel = KernelSpec::new(args.kernel.into());
    let beta = &report.fit.beta;
    let eval_grid = uniform_grid(sample.tau(), global.grid_points)?;
    let gl = select_gl(&sample, beta, &kernel, global.kappa_prime, &eval_grid).context("GL bandwidth selection")?;
    let cv = select_cv(&sample, beta, &kernel, &make_grid(sample.n())?, &eval_grid, args.cv_weighting.into())
        .context("cross-validation bandwidth selection")?;
    log::info!("GL selected h = {}, CV selected h = {}", gl.selected, cv.selected);

    let mut out = Outputs::default();
    let mut buf = Vec::new();
    gl.selected_estimate().write_csv(&mut buf)?;
    out.add("curve_gl.csv", buf);
    let mut buf = Vec::new();
    cv.selected_estimate().write_csv(&mut buf)?;
    out.add("curve_cv.csv", buf);
    let mut buf = Vec::new();
    gl.write_csv(&mut buf)?;
    out.add("gl_selection.csv", buf);
    out.add("cv_selection.csv", cv_csv(&cv)?);
    out.commit(&global.out_dir)?;
    Ok(())
}
