//! Runs one simulation cell and prints its MISEs.
//!
//! `cargo run --release --example mise_cell -- <n> <p> <gamma_cens> [n_rep] [seed]`

use std::time::Instant;

use hazard_core::sim::{run_experiment, HarnessOptions, SimDesign};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |k: usize, default: &str| args.get(k).cloned().unwrap_or_else(|| default.to_string());
    let n: usize = arg(0, "200").parse()?;
    let p: usize = arg(1, "15").parse()?;
    let gamma: f64 = arg(2, "4.5").parse()?;
    let reps: usize = arg(3, "100").parse()?;
    let seed: u64 = arg(4, "1").parse()?;
    let design = SimDesign::weibull(n, p, 1.5, 1.0, gamma).with_reps(reps).with_seed(seed);
    let start = Instant::now();
    let report = run_experiment(&design, &HarnessOptions::default())?;
    println!(
        "n={n} p={p} gamma={gamma}: stand GL {:.4} CV {:.4} | total GL {:.4} CV {:.4} | censoring {:.3} (observed {:.3}) | {:.1?}",
        report.mise_stand_gl,
        report.mise_stand_cv,
        report.mise_total_gl,
        report.mise_total_cv,
        report.empirical_censoring_rate,
        report.observed_censoring_rate,
        start.elapsed()
    );
    let mean = |f: fn(&hazard_core::sim::ReplicationResult) -> f64| {
        report.per_rep.iter().map(f).sum::<f64>() / report.per_rep.len() as f64
    };
    println!(
        "mean h_gl {:.4} h_cv {:.4} |beta-beta0|_1 {:.3} gamma_n {:.4}",
        mean(|r| r.h_gl),
        mean(|r| r.h_cv),
        mean(|r| r.beta_l1_error),
        mean(|r| r.gamma_n)
    );
    Ok(())
}
