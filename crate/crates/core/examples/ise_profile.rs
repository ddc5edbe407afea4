//! Mean ISE of the fixed-bandwidth kernel estimator for every dyadic bandwidth,
//! plus the GL table averages. Diagnostic companion to `mise_cell`.
//!
//! `cargo run --release --example ise_profile -- <n> <p> <gamma_cens> [n_rep]`

use hazard_core::bandwidth::{make_grid, select_gl};
use hazard_core::estimate::uniform_grid;
use hazard_core::kernel::epanechnikov;
use hazard_core::sim::{ise_stand, PreparedDesign, SimDesign};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |k: usize, default: &str| args.get(k).cloned().unwrap_or_else(|| default.to_string());
    let n: usize = arg(0, "200").parse()?;
    let p: usize = arg(1, "15").parse()?;
    let gamma: f64 = arg(2, "4.5").parse()?;
    let reps: u64 = arg(3, "20").parse()?;
    let design = SimDesign::weibull(n, p, 1.5, 1.0, gamma).with_seed(1);
    let prepared = PreparedDesign::new(design.clone())?;
    let hs = make_grid(n)?;
    let k = epanechnikov();
    let m = hs.len();
    let mut ise = vec![0.0; m];
    let (mut a, mut v, mut crit) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    for rep in 0..reps {
        let sim = prepared.generate(rep)?;
        let grid = uniform_grid(sim.sample.tau(), 512)?;
        let gl = select_gl(&sim.sample, &sim.beta0, &k, 1.0, &grid)?;
        for (j, row) in gl.per_h.iter().enumerate() {
            ise[j] += ise_stand(&gl.estimates[j], &design) / reps as f64;
            a[j] += row.a / reps as f64;
            v[j] += row.v / reps as f64;
            crit[j] += row.criterion / reps as f64;
        }
    }
    println!("{:>10} {:>10} {:>10} {:>10} {:>10}", "h", "ISE", "A", "V", "A+V");
    for j in 0..m {
        println!("{:>10.5} {:>10.4} {:>10.4} {:>10.4} {:>10.4}", hs.values()[j], ise[j], a[j], v[j], crit[j]);
    }
    Ok(())
}
