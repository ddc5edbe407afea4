mod common;

use std::sync::Arc;

use common::random_sample;
use hazard_core::estimate::{smooth_jumps, uniform_grid};
use hazard_core::quadrature::trapezoid;
use hazard_core::{
    breslow, double_smooth, epanechnikov, kernel_baseline, l2_dist_sq, CurveEstimate, Error, JumpRepresentation,
    KernelKind, KernelSpec,
};
use proptest::prelude::*;

fn kernels() -> [KernelSpec; 3] {
    [KernelKind::Epanechnikov, KernelKind::Biweight, KernelKind::Triangular].map(KernelSpec::new)
}

#[test]
fn beta_zero_reduces_to_smoothed_nelson_aalen() {
    let k = epanechnikov();
    for seed in 0..10 {
        let s = random_sample(seed, 80, 3);
        let grid = uniform_grid(s.tau(), 101).unwrap();
        let h = 0.3;
        let est = kernel_baseline(&s, &[0.0; 3], &k, h, &grid).unwrap();
        let x = s.times();
        for (t, v) in grid.iter().zip(&est.values) {
            let direct: f64 = (0..s.n())
                .filter(|&i| s.events()[i] && x[i] <= s.tau())
                .map(|i| {
                    let at_risk = x.iter().filter(|&&y| y >= x[i]).count() as f64;
                    k.evaluate((t - x[i]) / h) / (h * at_risk)
                })
                .sum();
            assert!((v - direct).abs() < 1e-12, "seed {seed}, t = {t}: {v} vs {direct}");
        }
    }
}

#[test]
fn breslow_steps_sum_the_jump_weights() {
    let s = random_sample(11, 60, 2);
    let beta = [0.4, -0.2];
    let jumps = JumpRepresentation::new(&s, &beta).unwrap();
    let b = breslow(&s, &beta).unwrap();
    let total: f64 = jumps.weights.iter().sum();
    assert!((b.evaluate(s.tau()) - total).abs() < 1e-12);
    assert_eq!(b.evaluate(0.0), 0.0);
}

#[test]
fn estimator_is_linear_in_the_weights() {
    let times = vec![0.2, 0.5, 0.9, 1.4, 1.7];
    let w1 = vec![0.1, 0.4, 0.2, 0.3, 0.05];
    let w2 = vec![0.3, 0.0, 0.6, 0.1, 0.2];
    let (a, b) = (1.7, 0.4);
    let combo: Vec<f64> = w1.iter().zip(&w2).map(|(x, y)| a * x + b * y).collect();
    let grid = uniform_grid(2.0, 201).unwrap();
    for k in kernels() {
        let smooth = |w: &[f64]| {
            let jumps = Arc::new(JumpRepresentation::from_parts(times.clone(), w.to_vec()).unwrap());
            smooth_jumps(jumps, &k, 0.35, &grid).unwrap().values
        };
        let (e1, e2, ec) = (smooth(&w1), smooth(&w2), smooth(&combo));
        for i in 0..grid.len() {
            assert!((ec[i] - (a * e1[i] + b * e2[i])).abs() < 1e-12);
        }
    }
}

#[test]
fn kernel_convolution_is_symmetric() {
    for k in kernels() {
        for &(h, hp) in &[(0.3, 0.1), (0.5, 0.5), (0.2, 0.7)] {
            for i in 0..21 {
                let x = -1.0 + 0.1 * i as f64;
                let c = k.convolve(h, &k, hp, x);
                assert!((c - k.convolve(hp, &k, h, x)).abs() < 1e-9 * c.abs().max(1e-6));
                assert!((c - k.convolve(h, &k, hp, -x)).abs() < 1e-9 * c.abs().max(1e-6));
            }
        }
    }
}

#[test]
fn tiny_second_bandwidth_recovers_the_single_smooth() {
    let s = random_sample(5, 150, 2);
    let grid = uniform_grid(s.tau(), 257).unwrap();
    let h = 0.4;
    for k in kernels() {
        let single = kernel_baseline(&s, &[0.3, -0.1], &k, h, &grid).unwrap();
        let double = double_smooth(&single, &k, 1e-3 * h).unwrap();
        let scale = single.sup_norm();
        for (a, b) in single.values.iter().zip(&double.values) {
            assert!((a - b).abs() < 0.01 * scale, "{:?}: {a} vs {b}", k.kind);
        }
    }
}

#[test]
fn double_smoothing_needs_a_kernel_estimate() {
    let plain = CurveEstimate::new(vec![0.0, 1.0], vec![1.0, 1.0]).unwrap();
    assert!(double_smooth(&plain, &epanechnikov(), 0.1).is_err());
}

#[test]
fn interior_mass_is_conserved() {
    let times = vec![1.0, 1.3, 2.0, 2.6];
    let weights = vec![0.2, 0.5, 0.1, 0.4];
    let jumps = Arc::new(JumpRepresentation::from_parts(times, weights.clone()).unwrap());
    let grid = uniform_grid(4.0, 4001).unwrap();
    for k in kernels() {
        let est = smooth_jumps(jumps.clone(), &k, 0.5, &grid).unwrap();
        let mass = trapezoid(&est.grid, &est.values);
        assert!((mass - weights.iter().sum::<f64>()).abs() < 1e-5, "{:?}: {mass}", k.kind);
    }
}

#[test]
fn smoothing_error_shrinks_with_the_bandwidth() {
    // Dense jumps carrying a smooth hazard f(u) = 1 + u².
    let m = 20_000;
    let du = 3.0 / m as f64;
    let times: Vec<f64> = (0..m).map(|k| (k as f64 + 0.5) * du).collect();
    let weights: Vec<f64> = times.iter().map(|u| (1.0 + u * u) * du).collect();
    let jumps = Arc::new(JumpRepresentation::from_parts(times, weights).unwrap());
    let grid: Vec<f64> = (0..201).map(|i| 1.0 + i as f64 / 200.0).collect();
    let truth = CurveEstimate::new(grid.clone(), grid.iter().map(|t| 1.0 + t * t).collect()).unwrap();
    let k = epanechnikov();
    let errors: Vec<f64> = [0.8, 0.4, 0.2, 0.1]
        .iter()
        .map(|&h| {
            let est = smooth_jumps(jumps.clone(), &k, h, &grid).unwrap();
            l2_dist_sq(&CurveEstimate::new(grid.clone(), est.values).unwrap(), &truth).unwrap()
        })
        .collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
}

#[test]
fn l2_distance_examples() {
    let grid = uniform_grid(0.5, 11).unwrap();
    let one = CurveEstimate::new(grid.clone(), vec![1.0; 11]).unwrap();
    let minus = CurveEstimate::new(grid, vec![-1.0; 11]).unwrap();
    assert!((l2_dist_sq(&one, &minus).unwrap() - 2.0).abs() < 1e-14);

    let grid = uniform_grid(1.0, 1025).unwrap();
    let line = CurveEstimate::new(grid.clone(), grid.clone()).unwrap();
    let zero = CurveEstimate::new(grid, vec![0.0; 1025]).unwrap();
    assert!((l2_dist_sq(&line, &zero).unwrap() - 1.0 / 3.0).abs() < 1e-6);

    let other = CurveEstimate::new(uniform_grid(1.0, 11).unwrap(), vec![0.0; 11]).unwrap();
    assert!(matches!(l2_dist_sq(&line, &other), Err(Error::GridMismatch(_))));
}

#[test]
fn single_jump_peak() {
    let jumps = Arc::new(JumpRepresentation::from_parts(vec![1.0], vec![0.8]).unwrap());
    let est = smooth_jumps(jumps, &epanechnikov(), 0.5, &[0.5, 1.0, 1.25]).unwrap();
    assert!((est.values[1] - 1.5 * 0.8).abs() < 1e-15);
    assert_eq!(est.values[0], 0.0);
    assert!((est.values[2] - 0.8 * 0.75 * 0.75 / 0.5).abs() < 1e-15);
}

#[test]
fn zero_weights_give_zero_curve() {
    let jumps = Arc::new(JumpRepresentation::from_parts(vec![0.1, 0.4, 0.4], vec![0.0; 3]).unwrap());
    let est = smooth_jumps(jumps, &epanechnikov(), 0.2, &uniform_grid(1.0, 50).unwrap()).unwrap();
    assert!(est.values.iter().all(|v| *v == 0.0 && v.is_sign_positive()));
    let dbl = double_smooth(&est, &epanechnikov(), 0.1).unwrap();
    assert!(dbl.values.iter().all(|v| *v == 0.0));
}

#[test]
fn invalid_inputs_are_rejected() {
    assert!(JumpRepresentation::from_parts(vec![0.5, 0.1], vec![1.0, 1.0]).is_err());
    assert!(JumpRepresentation::from_parts(vec![0.1], vec![-1.0]).is_err());
    let s = random_sample(1, 20, 1);
    let grid = uniform_grid(s.tau(), 10).unwrap();
    assert!(kernel_baseline(&s, &[0.0], &epanechnikov(), 0.0, &grid).is_err());
    assert!(kernel_baseline(&s, &[f64::NAN], &epanechnikov(), 0.1, &grid).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn estimates_are_non_negative(seed in 0u64..100_000, n in 5usize..80, h in 0.01f64..2.0, b in -2.0f64..2.0) {
        let s = random_sample(seed, n, 2);
        let grid = uniform_grid(s.tau(), 64).unwrap();
        for k in kernels() {
            let est = kernel_baseline(&s, &[b, -b], &k, h, &grid).unwrap();
            prop_assert!(est.values.iter().all(|v| *v >= 0.0));
            let dbl = double_smooth(&est, &k, 0.5 * h).unwrap();
            prop_assert!(dbl.values.iter().all(|v| *v >= -1e-12));
        }
    }
}
