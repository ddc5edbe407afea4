//! Univariate Cox score-test screening for very wide covariate matrices.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::data::SurvivalSample;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScreeningResult {
    pub scores: Vec<f64>,
    pub threshold: f64,
    /// Indices `j` with `scores[j] > threshold`, ascending.
    pub kept: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScreenMode {
    /// Keep covariates whose statistic exceeds the χ²₁ quantile at `1 − alpha`.
    Level(f64),
    /// Tune the threshold so that the `k` largest statistics are kept.
    TopK(usize),
}

/// `U_j(0)² / I_j(0)` for every covariate, with the Breslow tie convention.
///
/// A covariate with zero observed information gets statistic 0.
pub fn score_statistics(sample: &SurvivalSample) -> Vec<f64> {
    let index = sample.risk_index();
    let order = index.order();
    let sorted = index.sorted_times();
    let tau = sample.tau();
    let n = sample.n();

    // Sorted positions grouped by distinct time, walked from the latest.
    let mut blocks: Vec<(usize, usize)> = Vec::new();
    let mut k = 0;
    while k < n {
        let mut end = k;
        while end < n && sorted[end] == sorted[k] {
            end += 1;
        }
        blocks.push((k, end));
        k = end;
    }

    (0..sample.p())
        .map(|j| {
            let z = sample.covariates().column(j);
            let (mut s0, mut s1, mut s2) = (0.0f64, 0.0f64, 0.0f64);
            let (mut u, mut info) = (0.0, 0.0);
            for &(start, end) in blocks.iter().rev() {
                let mut events = 0usize;
                let mut event_sum = 0.0;
                for &i in &order[start..end] {
                    let zi = z[i];
                    s0 += 1.0;
                    s1 += zi;
                    s2 += zi * zi;
                    if sample.events()[i] && sample.times()[i] <= tau {
                        events += 1;
                        event_sum += zi;
                    }
                }
                if events > 0 {
                    let d = events as f64;
                    let mean = s1 / s0;
                    u += event_sum - d * mean;
                    info += d * (s2 / s0 - mean * mean);
                }
            }
            if info > 1e-12 * (1.0 + u.abs()) {
                u * u / info
            } else {
                if u == 0.0 {
                    log::warn!("covariate {j} has zero variance over the risk sets; statistic set to 0");
                }
                0.0
            }
        })
        .collect()
}

/// `χ²₁` quantile at probability `1 − alpha`.
pub fn chi2_1_threshold(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid("alpha_level", format!("must lie in (0, 1), got {alpha}")));
    }
    let chi2 = ChiSquared::new(1.0).expect("one degree of freedom");
    Ok(chi2.inverse_cdf(1.0 - alpha))
}

pub fn score_screen(sample: &SurvivalSample, mode: ScreenMode) -> Result<ScreeningResult> {
    let scores = score_statistics(sample);
    let threshold = match mode {
        ScreenMode::Level(alpha) => chi2_1_threshold(alpha)?,
        ScreenMode::TopK(k) => {
            if k == 0 || k > scores.len() {
                return Err(invalid("k", format!("must lie in 1..={}, got {k}", scores.len())));
            }
            let mut sorted = scores.clone();
            sorted.sort_by(|a, b| b.total_cmp(a));
            if k == sorted.len() {
                f64::NEG_INFINITY
            } else if sorted[k - 1] > sorted[k] {
                0.5 * (sorted[k - 1] + sorted[k])
            } else {
                log::warn!("tied statistics at rank {k}; fewer than {k} covariates kept");
                sorted[k]
            }
        }
    };
    let kept = scores
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > threshold)
        .map(|(j, _)| j)
        .collect();
    Ok(ScreeningResult { scores, threshold, kept })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    #[test]
    fn zero_covariate_never_kept() {
        let s = SurvivalSample::new(
            vec![1.0, 2.0, 3.0, 4.0],
            vec![true, true, false, true],
            array![[0.0, 1.0], [0.0, -1.0], [0.0, 0.5], [0.0, 2.0]],
        )
        .unwrap();
        let r = score_screen(&s, ScreenMode::Level(0.5)).unwrap();
        assert_eq!(r.scores[0], 0.0);
        assert!(!r.kept.contains(&0));
    }

    #[test]
    fn top_k_equal_to_p_keeps_all() {
        let s = SurvivalSample::new(vec![1.0, 2.0, 3.0], vec![true; 3], array![[0.0, 1.0], [0.0, 3.0], [0.0, 2.0]])
            .unwrap();
        let r = score_screen(&s, ScreenMode::TopK(2)).unwrap();
        assert_eq!(r.kept, vec![0, 1]);
    }

    #[test]
    fn top_k_keeps_exactly_k() {
        let z = Array2::from_shape_fn((6, 4), |(i, j)| ((i * 7 + j * 3) % 5) as f64 * (j as f64 + 1.0).sqrt());
        let s = SurvivalSample::new(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0], vec![true; 6], z).unwrap();
        let r = score_screen(&s, ScreenMode::TopK(2)).unwrap();
        assert_eq!(r.kept.len(), 2);
        assert!(score_screen(&s, ScreenMode::TopK(0)).is_err());
    }

    #[test]
    fn score_matches_log_rank_for_binary_covariate() {
        // Two groups, no ties: U = O − E for group 1, I = Σ p(1−p).
        let s = SurvivalSample::with_tau(vec![1.0, 2.0, 3.0, 4.0], vec![true; 4], array![[1.0], [0.0], [1.0], [0.0]], 4.0)
            .unwrap();
        let u: f64 = (1.0 - 0.5) + (0.0 - 1.0 / 3.0) + (1.0 - 0.5) + 0.0;
        let i: f64 = 0.25 + (1.0 / 3.0) * (2.0 / 3.0) + 0.25 + 0.0;
        assert!((score_statistics(&s)[0] - u * u / i).abs() < 1e-12);
    }

    #[test]
    fn alpha_out_of_range() {
        assert!(chi2_1_threshold(0.0).is_err());
        assert!(chi2_1_threshold(1.0).is_err());
    }
}
