use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use hazard_core::{run_experiment, HarnessOptions, KernelKind, MiseReport, SimDesign};
use serde::Deserialize;

use crate::output::Outputs;
use crate::screen::csv_writer;
use crate::{CvWeightingArg, GlobalArgs, KernelArg};

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// TOML or JSON file listing the designs (see docs/config.md).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Sample size of the single design run when no --config is given.
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// Number of covariates; the first three carry the effects 0.1, 0.3, 0.5.
    #[arg(long, default_value_t = 15)]
    pub p: usize,
    /// Weibull shape a of the baseline hazard a lambda^a t^(a-1).
    #[arg(long, default_value_t = 1.5)]
    pub weibull_a: f64,
    /// Weibull scale lambda.
    #[arg(long, default_value_t = 1.0)]
    pub weibull_lambda: f64,
    /// Censoring calibration gamma (4.5 gives about 20% censoring, 1.2 about 50%).
    #[arg(long, default_value_t = 4.5)]
    pub gamma_cens: f64,
    /// Replications N_e per design.
    #[arg(long, default_value_t = 100)]
    pub n_rep: usize,
    /// Smoothing kernel.
    #[arg(long, value_enum, default_value_t = KernelArg::Epanechnikov)]
    pub kernel: KernelArg,
    /// Risk denominators of the cross-validation criterion.
    #[arg(long, value_enum, default_value_t = CvWeightingArg::AtRisk)]
    pub cv_weighting: CvWeightingArg,
    /// Cross-validation folds for the lasso penalty.
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Length of the log-spaced penalty grid.
    #[arg(long, default_value_t = 20)]
    pub gamma_grid_len: usize,
}

/// A design file: shared defaults plus one `[[design]]` table per cell.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    #[serde(default)]
    pub options: ConfigOptions,
    #[serde(default)]
    pub design: Vec<DesignEntry>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOptions {
    pub kernel: Option<KernelKind>,
    pub cv_weighting: Option<String>,
    pub folds: Option<usize>,
    pub gamma_grid_len: Option<usize>,
    pub kappa_prime: Option<f64>,
    pub grid_points: Option<usize>,
    pub n_rep: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignEntry {
    pub name: Option<String>,
    pub n: usize,
    pub p: usize,
    pub beta0: Option<Vec<f64>>,
    pub weibull_a: f64,
    pub weibull_lambda: f64,
    pub gamma_cens: f64,
    pub n_rep: Option<usize>,
    pub seed: Option<u64>,
}

impl SimulationConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let raw = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let config: Self = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => serde_json::from_str(&raw).with_context(|| format!("parsing {}", path.display()))?,
            _ => toml::from_str(&raw).with_context(|| format!("parsing {}", path.display()))?,
        };
        if config.design.is_empty() {
            bail!("{}: no [[design]] entries", path.display());
        }
        Ok(config)
    }
}

fn label(d: &SimDesign) -> String {
    d.name.clone().unwrap_or_else(|| {
        format!("W({},{})_n{}_p{}_gamma{}", d.weibull_a, d.weibull_lambda, d.n, d.p, d.gamma_cens)
    })
}

fn parse_weighting(raw: &str) -> Result<CvWeightingArg> {
    match raw {
        "at-risk" | "at_risk" => Ok(CvWeightingArg::AtRisk),
        "cox" => Ok(CvWeightingArg::Cox),
        other => bail!("options.cv_weighting: expected `at-risk` or `cox`, got `{other}`"),
    }
}

fn resolve(global: &GlobalArgs, args: &SimulateArgs) -> Result<(Vec<SimDesign>, HarnessOptions)> {
    let config = match &args.config {
        Some(path) => SimulationConfig::load(path)?,
        None => SimulationConfig {
            options: ConfigOptions::default(),
            design: vec![DesignEntry {
                name: None,
                n: args.n,
                p: args.p,
                beta0: None,
                weibull_a: args.weibull_a,
                weibull_lambda: args.weibull_lambda,
                gamma_cens: args.gamma_cens,
                n_rep: None,
                seed: None,
            }],
        },
    };
    let o = &config.options;
    let cv_weighting = match &o.cv_weighting {
        Some(raw) => parse_weighting(raw)?,
        None => args.cv_weighting,
    };
    let options = HarnessOptions {
        kernel: o.kernel.unwrap_or(args.kernel.into()),
        kappa_prime: o.kappa_prime.unwrap_or(global.kappa_prime),
        grid_points: o.grid_points.unwrap_or(global.grid_points),
        gamma_grid_len: o.gamma_grid_len.unwrap_or(args.gamma_grid_len),
        folds: o.folds.unwrap_or(args.folds),
        cv_weighting: cv_weighting.into(),
        ..HarnessOptions::default()
    };
    if !(options.kappa_prime > 0.0 && options.kappa_prime.is_finite()) {
        bail!("kappa_prime: must be positive, got {}", options.kappa_prime);
    }
    if options.grid_points < 2 || options.folds < 2 || options.gamma_grid_len == 0 {
        bail!("grid_points and folds must be at least 2 and gamma_grid_len at least 1");
    }
    let designs = config
        .design
        .iter()
        .map(|e| SimDesign {
            name: e.name.clone(),
            n: e.n,
            p: e.p,
            beta0: e.beta0.clone(),
            weibull_a: e.weibull_a,
            weibull_lambda: e.weibull_lambda,
            gamma_cens: e.gamma_cens,
            n_rep: e.n_rep.or(o.n_rep).unwrap_or(args.n_rep),
            seed: e.seed.or(o.seed).unwrap_or(global.seed),
        })
        .collect::<Vec<_>>();
    for d in &designs {
        d.validate().with_context(|| format!("design `{}`", label(d)))?;
    }
    Ok((designs, options))
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    sum / count as f64
}

fn summary_csv(reports: &[MiseReport]) -> Result<Vec<u8>> {
    let mut w = csv_writer();
    w.write_record([
        "design", "n", "p", "weibull_a", "weibull_lambda", "gamma_cens", "n_rep", "seed",
        "empirical_censoring_rate", "observed_censoring_rate", "mise_stand_gl", "mise_stand_cv",
        "mise_total_gl", "mise_total_cv", "mean_h_gl", "mean_h_cv",
    ])?;
    for r in reports {
        let d = &r.design;
        w.write_record([
            label(d),
            d.n.to_string(),
            d.p.to_string(),
            d.weibull_a.to_string(),
            d.weibull_lambda.to_string(),
            d.gamma_cens.to_string(),
            d.n_rep.to_string(),
            d.seed.to_string(),
            r.empirical_censoring_rate.to_string(),
            r.observed_censoring_rate.to_string(),
            r.mise_stand_gl.to_string(),
            r.mise_stand_cv.to_string(),
            r.mise_total_gl.to_string(),
            r.mise_total_cv.to_string(),
            mean(r.per_rep.iter().map(|x| x.h_gl)).to_string(),
            mean(r.per_rep.iter().map(|x| x.h_cv)).to_string(),
        ])?;
    }
    Ok(w.into_inner()?)
}

/// One row per (distribution, n, p) and four MISE columns (stand/total ×
/// GL/CV) per censoring level.
fn table_csv(reports: &[MiseReport]) -> Result<Vec<u8>> {
    let mut levels: Vec<String> = Vec::new();
    let mut rows: Vec<(String, usize, usize)> = Vec::new();
    let mut cells: BTreeMap<(usize, usize), &MiseReport> = BTreeMap::new();
    for r in reports {
        let d = &r.design;
        let level = d.gamma_cens.to_string();
        let row = (format!("W({},{})", d.weibull_a, d.weibull_lambda), d.n, d.p);
        let li = levels.iter().position(|l| *l == level).unwrap_or_else(|| {
            levels.push(level);
            levels.len() - 1
        });
        let ri = rows.iter().position(|x| *x == row).unwrap_or_else(|| {
            rows.push(row);
            rows.len() - 1
        });
        cells.insert((ri, li), r);
    }
    let mut w = csv_writer();
    let mut header = vec!["distribution".to_string(), "n".into(), "p".into()];
    for l in &levels {
        for col in ["stand_gl", "stand_cv", "total_gl", "total_cv"] {
            header.push(format!("gamma{l}_{col}"));
        }
    }
    w.write_record(&header)?;
    for (ri, (dist, n, p)) in rows.iter().enumerate() {
        let mut record = vec![dist.clone(), n.to_string(), p.to_string()];
        for li in 0..levels.len() {
            match cells.get(&(ri, li)) {
                Some(r) => record.extend(
                    [r.mise_stand_gl, r.mise_stand_cv, r.mise_total_gl, r.mise_total_cv].map(|v| v.to_string()),
                ),
                None => record.extend(std::iter::repeat(String::new()).take(4)),
            }
        }
        w.write_record(&record)?;
    }
    Ok(w.into_inner()?)
}

pub(crate) fn run(global: &GlobalArgs, args: &SimulateArgs) -> Result<()> {
    if global.tau.is_some() {
        log::warn!("--tau is ignored by simulate; tau follows the simulation protocol");
    }
    let (designs, options) = resolve(global, args)?;
    let mut reports = Vec::with_capacity(designs.len());
    for d in &designs {
        log::info!("running design `{}` ({} replications)", label(d), d.n_rep);
        let report = run_experiment(d, &options).with_context(|| format!("design `{}`", label(d)))?;
        log::info!(
            "design `{}`: MISE_stand GL {} CV {}, censoring {:.3}",
            label(d),
            report.mise_stand_gl,
            report.mise_stand_cv,
            report.empirical_censoring_rate
        );
        reports.push(report);
    }

    let mut per_rep = Vec::new();
    for (k, r) in reports.iter().enumerate() {
        r.write_per_rep_csv(&mut per_rep, &label(&r.design), k == 0)?;
    }
    let mut out = Outputs::default();
    out.add("summary.csv", summary_csv(&reports)?);
    out.add("table.csv", table_csv(&reports)?);
    out.add("per_rep.csv", per_rep);
    out.commit(&global.out_dir)?;
    Ok(())
}
