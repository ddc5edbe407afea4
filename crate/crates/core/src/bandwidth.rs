//! Data-driven bandwidth selection for the kernel baseline estimator.
//!
//! Two selectors share the dyadic grid `H_n = {2^{−j} : j = 1..⌊log₂ n⌋}`:
//!
//! * Goldenshluger–Lepski: `ĥ = argmin_h A(h) + V̂(h)` with
//!   `A(h) = max_{h'} ( ||K_{h'} ⋆ α̂_h − α̂_{h'}||²₂ − V̂(h') )_+` and the
//!   bounded-process variance proxy `V̂(h) = κ′ ||α̂_{max H}||_{∞,τ} ||K||²₂ / (nh)`.
//! * Least-squares cross-validation on the smoothed Breslow increments.
//!
//! Both break ties toward the larger bandwidth.

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::data::SurvivalSample;
use crate::error::{invalid, Error, Result};
use crate::estimate::{double_smooth, l2_dist_sq, smooth_jumps, CurveEstimate, JumpRepresentation};
use crate::kernel::KernelSpec;
use crate::quadrature::trapezoid;

/// Default variance-proxy constant κ′.
pub const DEFAULT_KAPPA_PRIME: f64 = 1.0;

/// Strictly decreasing set of candidate bandwidths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandwidthGrid {
    values: Vec<f64>,
}

impl BandwidthGrid {
    /// Any finite positive bandwidths; duplicates are merged, order is normalized.
    pub fn from_values(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("bandwidths", "grid must not be empty"));
        }
        if values.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            return Err(invalid("bandwidths", "every bandwidth must be finite and positive"));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        values.dedup();
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values[0]
    }
}

/// Dyadic grid `{1/2, 1/4, …, 2^{−⌊log₂ n⌋}}`.
pub fn make_grid(n: usize) -> Result<BandwidthGrid> {
    if n < 2 {
        return Err(invalid("n", format!("bandwidth grid needs n >= 2, got {n}")));
    }
    let levels = (usize::BITS - 1 - n.leading_zeros()) as i32;
    Ok(BandwidthGrid { values: (1..=levels).map(|j| 0.5f64.powi(j)).collect() })
}

/// `V̂(h) = κ′ sup_t |α̂_{max H}(t)| ||K||²₂ / (n h)`.
pub fn v_hat(n: usize, kernel: &KernelSpec, h: f64, h_max_estimate: &CurveEstimate, kappa_prime: f64) -> f64 {
    kappa_prime * h_max_estimate.sup_norm() * kernel.l2_norm_sq / (n as f64 * h)
}

/// `A(h)` for the estimate at `index`, given every single-bandwidth estimate
/// (same order as `variances`) on a shared evaluation grid.
pub fn a_of_h(estimates: &[CurveEstimate], index: usize, kernel: &KernelSpec, variances: &[f64]) -> Result<f64> {
    if estimates.len() != variances.len() {
        return Err(Error::DimensionMismatch { expected: estimates.len(), got: variances.len() });
    }
    let est_h = &estimates[index];
    let mut worst: f64 = 0.0;
    for (other, v) in estimates.iter().zip(variances) {
        let h_prime = other.bandwidth.ok_or_else(|| invalid("estimates", "missing bandwidth"))?;
        let smoothed = double_smooth(est_h, kernel, h_prime)?;
        worst = worst.max(l2_dist_sq(&smoothed, other)? - v);
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlRow {
    pub h: f64,
    pub a: f64,
    pub v: f64,
    pub criterion: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GLSelection {
    /// One row per bandwidth, largest first.
    pub per_h: Vec<GlRow>,
    pub selected: f64,
    pub kappa_prime: f64,
    /// Single-bandwidth estimates in `per_h` order.
    #[serde(skip)]
    pub estimates: Vec<CurveEstimate>,
}

impl GLSelection {
    pub fn selected_index(&self) -> usize {
        self.per_h.iter().position(|r| r.h == self.selected).expect("selected bandwidth is on the grid")
    }

    pub fn selected_estimate(&self) -> &CurveEstimate {
        &self.estimates[self.selected_index()]
    }

    /// `h,A,V,criterion,selected` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["h", "A", "V", "criterion", "selected"])?;
        for row in &self.per_h {
            writer.write_record([
                row.h.to_string(),
                row.a.to_string(),
                row.v.to_string(),
                row.criterion.to_string(),
                u8::from(row.h == self.selected).to_string(),
            ])?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// First index of the minimum; with candidates ordered largest-bandwidth
/// first this breaks ties toward the larger bandwidth.
fn argmin_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, v) in values.iter().enumerate().skip(1) {
        if *v < values[best] {
            best = k;
        }
    }
    best
}

/// Goldenshluger–Lepski selection on the dyadic grid for `sample.n()`.
pub fn select_gl(
    sample: &SurvivalSample,
    beta: &[f64],
    kernel: &KernelSpec,
    kappa_prime: f64,
    eval_grid: &[f64],
) -> Result<GLSelection> {
    let grid = make_grid(sample.n())?;
    select_gl_with_grid(sample, beta, kernel, kappa_prime, &grid, eval_grid)
}

pub fn select_gl_with_grid(
    sample: &SurvivalSample,
    beta: &[f64],
    kernel: &KernelSpec,
    kappa_prime: f64,
    grid: &BandwidthGrid,
    eval_grid: &[f64],
) -> Result<GLSelection> {
    if sample.n_events_in_window() == 0 {
        return Err(Error::NoEvents);
    }
    let jumps = Arc::new(JumpRepresentation::new(sample, beta)?);
    select_gl_from_jumps(jumps, sample.n(), kernel, kappa_prime, grid, eval_grid)
}

/// GL selection from a precomputed jump representation.
pub fn select_gl_from_jumps(
    jumps: Arc<JumpRepresentation>,
    n: usize,
    kernel: &KernelSpec,
    kappa_prime: f64,
    grid: &BandwidthGrid,
    eval_grid: &[f64],
) -> Result<GLSelection> {
    if !(kappa_prime >= 0.0 && kappa_prime.is_finite()) {
        return Err(invalid("kappa_prime", format!("must be finite and non-negative, got {kappa_prime}")));
    }
    let hs = grid.values();
    let estimates = hs
        .iter()
        .map(|&h| smooth_jumps(jumps.clone(), kernel, h, eval_grid))
        .collect::<Result<Vec<_>>>()?;
    let pilot = &estimates[0];
    let variances: Vec<f64> = hs.iter().map(|&h| v_hat(n, kernel, h, pilot, kappa_prime)).collect();

    let m = hs.len();
    let distances: Vec<f64> = (0..m * m)
        .into_par_iter()
        .map(|pair| {
            let (i, j) = (pair / m, pair % m);
            let smoothed = double_smooth(&estimates[i], kernel, hs[j])?;
            l2_dist_sq(&smoothed, &estimates[j])
        })
        .collect::<Result<Vec<_>>>()?;

    let per_h: Vec<GlRow> = (0..m)
        .map(|i| {
            let a = (0..m).map(|j| distances[i * m + j] - variances[j]).fold(0.0, f64::max);
            GlRow { h: hs[i], a, v: variances[i], criterion: a + variances[i] }
        })
        .collect();
    let criteria: Vec<f64> = per_h.iter().map(|r| r.criterion).collect();
    let selected = hs[argmin_first(&criteria)];
    Ok(GLSelection { per_h, selected, kappa_prime, estimates })
}

/// Risk denominator used in the cross-validation cross term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum CvWeighting {
    /// Raw at-risk count `Σ_i 1{X_i ≥ t}`.
    #[default]
    AtRiskCount,
    /// Cox risk sum `n S_n(β̂, t)`, matching the estimator's own weights.
    CoxRiskSum,
}

#[derive(Debug, Clone, Serialize)]
pub struct CvSelection {
    pub bandwidths: Vec<f64>,
    pub criteria: Vec<f64>,
    pub selected: f64,
    #[serde(skip)]
    pub estimates: Vec<CurveEstimate>,
}

impl CvSelection {
    pub fn selected_estimate(&self) -> &CurveEstimate {
        let k = self.bandwidths.iter().position(|h| *h == self.selected).expect("selected bandwidth is on the grid");
        &self.estimates[k]
    }
}

/// Least-squares cross-validation:
///
/// ```text
/// CV(h) = ∫_0^τ α̂_h(t)² dt − 2 Σ_{i ≠ j} (1/h) K((X_i − X_j)/h) δ_i δ_j / (Ȳ(X_i) Ȳ(X_j))
/// ```
///
/// with `Ȳ` the unnormalized at-risk count (or `n S_n(β̂, ·)` under
/// [`CvWeighting::CoxRiskSum`]). The integral is the empirical one on `eval_grid`.
pub fn select_cv(
    sample: &SurvivalSample,
    beta: &[f64],
    kernel: &KernelSpec,
    grid: &BandwidthGrid,
    eval_grid: &[f64],
    weighting: CvWeighting,
) -> Result<CvSelection> {
    let jumps = Arc::new(JumpRepresentation::new(sample, beta)?);
    if jumps.is_empty() {
        return Err(Error::NoEvents);
    }
    if jumps.len() < 2 && grid.len() > 1 {
        return Err(invalid("sample", format!("cross-validation needs at least 2 events, got {}", jumps.len())));
    }
    let cross_weights: Vec<f64> = match weighting {
        CvWeighting::CoxRiskSum => jumps.weights.clone(),
        CvWeighting::AtRiskCount => {
            let index = sample.risk_index();
            jumps.jump_times.iter().map(|&u| 1.0 / index.count_at_risk(u) as f64).collect()
        }
    };
    let hs = grid.values().to_vec();
    let (criteria, estimates): (Vec<f64>, Vec<CurveEstimate>) = hs
        .iter()
        .map(|&h| -> Result<(f64, CurveEstimate)> {
            let est = smooth_jumps(jumps.clone(), kernel, h, eval_grid)?;
            let sq: Vec<f64> = est.values.iter().map(|v| v * v).collect();
            let integral = trapezoid(&est.grid, &sq);
            let radius = kernel.support_radius * h;
            let times = &jumps.jump_times;
            let mut cross = 0.0;
            for i in 0..times.len() {
                let lo = times.partition_point(|&u| u < times[i] - radius);
                let hi = times.partition_point(|&u| u <= times[i] + radius);
                for j in lo..hi {
                    if j != i {
                        cross += kernel.evaluate((times[i] - times[j]) / h) * cross_weights[i] * cross_weights[j];
                    }
                }
            }
            Ok((integral - 2.0 * cross / h, est))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    let selected = hs[argmin_first(&criteria)];
    Ok(CvSelection { bandwidths: hs, criteria, selected, estimates })
}
