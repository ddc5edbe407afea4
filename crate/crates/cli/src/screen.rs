use anyhow::{Context, Result};
use clap::Args;
use hazard_core::{load_csv, score_screen, ScreenMode, ScreeningResult};

use crate::output::Outputs;
use crate::{DataArgs, GlobalArgs};

#[derive(Debug, Clone, Args)]
pub struct ScreenArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Keep covariates whose score statistic exceeds the chi-square(1) quantile at 1 - alpha.
    #[arg(long, default_value_t = 0.05, conflicts_with = "top_k")]
    pub alpha: f64,
    /// Keep the k covariates with the largest statistics instead.
    #[arg(long)]
    pub top_k: Option<usize>,
}

pub(crate) fn screening_csv(names: &[String], result: &ScreeningResult) -> Result<Vec<u8>> {
    let mut writer = csv_writer();
    writer.write_record(["name", "score", "kept"])?;
    for (j, (name, score)) in names.iter().zip(&result.scores).enumerate() {
        let kept = result.kept.binary_search(&j).is_ok();
        writer.write_record([name.as_str(), &score.to_string(), if kept { "1" } else { "0" }])?;
    }
    Ok(writer.into_inner()?)
}

pub(crate) fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::Writer::from_writer(Vec::new())
}

pub(crate) fn run(global: &GlobalArgs, args: &ScreenArgs) -> Result<()> {
    let sample = load_csv(&args.data.data, &args.data.schema(global.tau))?;
    let mode = match args.top_k {
        Some(k) => ScreenMode::TopK(k),
        None => ScreenMode::Level(args.alpha),
    };
    let result = score_screen(&sample, mode).context("screening")?;
    log::info!("kept {} of {} covariates (threshold {})", result.kept.len(), sample.p(), result.threshold);
    let mut out = Outputs::default();
    out.add("screening.csv", screening_csv(sample.covariate_names(), &result)?);
    out.commit(&global.out_dir)?;
    Ok(())
}
