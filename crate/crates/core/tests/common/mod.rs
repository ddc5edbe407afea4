#![allow(dead_code)]

use hazard_core::sim::{PreparedDesign, SimDesign};
use hazard_core::SurvivalSample;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Exponential event and censoring times, uniform covariates, mild effects.
pub fn random_sample(seed: u64, n: usize, p: usize) -> SurvivalSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = Array2::from_shape_simple_fn((n, p), || rng.random_range(-1.0..=1.0));
    let mut times = Vec::with_capacity(n);
    let mut events = Vec::with_capacity(n);
    for i in 0..n {
        let eta: f64 = z.row(i).iter().enumerate().map(|(j, v)| v * 0.5 / (j + 1) as f64).sum();
        let t = -(1.0 - rng.random::<f64>()).ln() * (-eta).exp();
        let c = -(1.0 - rng.random::<f64>()).ln() * 2.0;
        times.push(t.min(c));
        events.push(t <= c);
    }
    SurvivalSample::new(times, events, z).unwrap()
}

pub fn weibull_design(n: usize, gamma_cens: f64, seed: u64) -> PreparedDesign {
    PreparedDesign::new(SimDesign::weibull(n, 15, 1.5, 1.0, gamma_cens).with_seed(seed)).unwrap()
}
