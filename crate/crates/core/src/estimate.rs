//! Breslow and kernel estimators of the baseline hazard.
//!
//! With right-censored data the counting-process integral in the kernel
//! estimator collapses to a finite sum over the observed events in `[0, τ]`:
//!
//! ```text
//! α̂_h(t) = (1/h) Σ_k w_k K((t − u_k)/h),   w_k = 1 / (n S_n(β̂, u_k))
//! ```
//!
//! The pair `(u_k, w_k)` is kept as a [`JumpRepresentation`] so that the
//! estimate can be smoothed a second time exactly, `K_{h'} ⋆ α̂_h(t) =
//! Σ_k w_k (K_{h'} ⋆ K_h)(t − u_k)`.

use std::sync::Arc;

use rayon::prelude::*;

use crate::data::SurvivalSample;
use crate::error::{invalid, Error, Result};
use crate::kernel::KernelSpec;
use crate::quadrature::trapezoid;

/// Default number of evaluation points on `[0, τ]`.
pub const DEFAULT_GRID_POINTS: usize = 512;

/// Uniform evaluation grid on `[0, τ]`.
pub fn uniform_grid(tau: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(invalid("grid_points", format!("need at least 2, got {points}")));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(invalid("tau", format!("must be positive, got {tau}")));
    }
    let last = (points - 1) as f64;
    let mut grid: Vec<f64> = (0..points).map(|k| tau * k as f64 / last).collect();
    grid[points - 1] = tau;
    Ok(grid)
}

/// Event times in `[0, τ]` with their Breslow increments, sorted by time.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpRepresentation {
    pub jump_times: Vec<f64>,
    pub weights: Vec<f64>,
}

impl JumpRepresentation {
    pub fn new(sample: &SurvivalSample, beta: &[f64]) -> Result<Self> {
        if beta.iter().any(|b| !b.is_finite()) {
            return Err(invalid("beta", "must be finite"));
        }
        let eta = sample.linear_predictor(beta)?;
        let index = sample.risk_index();
        let order = index.order();
        let sorted = index.sorted_times();
        let n = order.len();
        // suffix[k] = Σ_{positions ≥ k} exp(η); the risk set at time t starts
        // at the first position with X ≥ t.
        let mut suffix = vec![0.0; n + 1];
        for k in (0..n).rev() {
            suffix[k] = suffix[k + 1] + eta[order[k]].exp();
        }
        let tau = sample.tau();
        let mut jump_times = Vec::new();
        let mut weights = Vec::new();
        let mut start = 0;
        for (k, &i) in order.iter().enumerate() {
            if k == 0 || sorted[k] != sorted[k - 1] {
                start = k;
            }
            let x = sorted[k];
            if sample.events()[i] && x <= tau {
                let risk = suffix[start];
                jump_times.push(x);
                // 1{Ȳ(u) > 0} / (n S_n(u)); the risk set always contains the subject itself.
                weights.push(if risk > 0.0 { 1.0 / risk } else { 0.0 });
            }
        }
        Ok(Self { jump_times, weights })
    }

    pub fn from_parts(jump_times: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if jump_times.len() != weights.len() {
            return Err(Error::DimensionMismatch { expected: jump_times.len(), got: weights.len() });
        }
        if jump_times.windows(2).any(|w| w[0] > w[1]) {
            return Err(invalid("jump_times", "must be sorted"));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(invalid("weights", "must be finite and non-negative"));
        }
        Ok(Self { jump_times, weights })
    }

    pub fn len(&self) -> usize {
        self.jump_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jump_times.is_empty()
    }

    /// Indices of jumps with `|t − u_k| ≤ radius`.
    fn window(&self, t: f64, radius: f64) -> std::ops::Range<usize> {
        let lo = self.jump_times.partition_point(|&u| u < t - radius);
        let hi = self.jump_times.partition_point(|&u| u <= t + radius);
        lo..hi
    }
}

/// Cumulative hazard as a right-continuous step function.
#[derive(Debug, Clone, PartialEq)]
pub struct BreslowEstimate {
    /// Distinct jump times.
    pub times: Vec<f64>,
    /// `Â_0` just after each jump time.
    pub cumulative: Vec<f64>,
    pub tau: f64,
}

impl BreslowEstimate {
    pub fn evaluate(&self, t: f64) -> f64 {
        let k = self.times.partition_point(|&u| u <= t);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }

    /// Tabulates on `grid ∪ jump times`.
    pub fn tabulate(&self, grid: &[f64]) -> CurveEstimate {
        let mut points: Vec<f64> = grid.iter().chain(&self.times).copied().filter(|t| *t <= self.tau).collect();
        points.sort_by(f64::total_cmp);
        points.dedup();
        let values = points.iter().map(|&t| self.evaluate(t)).collect();
        CurveEstimate { grid: points, values, bandwidth: None, smoothing: None }
    }
}

/// `Â_0(t) = Σ_{i: δ_i = 1, X_i ≤ t} 1 / (n S_n(β, X_i))`.
pub fn breslow(sample: &SurvivalSample, beta: &[f64]) -> Result<BreslowEstimate> {
    let jumps = JumpRepresentation::new(sample, beta)?;
    let mut times: Vec<f64> = Vec::new();
    let mut cumulative: Vec<f64> = Vec::new();
    let mut running = 0.0;
    for (&u, &w) in jumps.jump_times.iter().zip(&jumps.weights) {
        running += w;
        if times.last() == Some(&u) {
            *cumulative.last_mut().unwrap() = running;
        } else {
            times.push(u);
            cumulative.push(running);
        }
    }
    Ok(BreslowEstimate { times, cumulative, tau: sample.tau() })
}

/// The kernel and jumps behind a single-bandwidth estimate.
#[derive(Debug, Clone)]
pub struct Smoothing {
    pub jumps: Arc<JumpRepresentation>,
    pub kernel: KernelSpec,
}

/// A curve tabulated on a strictly increasing grid over `[0, τ]`.
#[derive(Debug, Clone)]
pub struct CurveEstimate {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub bandwidth: Option<f64>,
    pub smoothing: Option<Smoothing>,
}

impl CurveEstimate {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), got: values.len() });
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::GridMismatch("grid must be strictly increasing".into()));
        }
        Ok(Self { grid, values, bandwidth: None, smoothing: None })
    }

    /// `sup_t |value(t)|` over the grid.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Writes `t,value` rows with shortest round-trip formatting.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["t", "value"])?;
        for (t, v) in self.grid.iter().zip(&self.values) {
            writer.write_record([t.to_string(), v.to_string()])?;
        }
        writer.flush()?;
        Ok(())
    }
}

fn check_bandwidth(name: &'static str, h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid(name, format!("bandwidth must be positive, got {h}")));
    }
    Ok(())
}

/// `α̂_h(t) = (1/h) Σ_k w_k K((t − u_k)/h)` on `grid`.
pub fn kernel_baseline(
    sample: &SurvivalSample,
    beta: &[f64],
    kernel: &KernelSpec,
    h: f64,
    grid: &[f64],
) -> Result<CurveEstimate> {
    check_bandwidth("h", h)?;
    let jumps = Arc::new(JumpRepresentation::new(sample, beta)?);
    smooth_jumps(jumps, kernel, h, grid)
}

/// Kernel smoother applied to a precomputed jump representation.
pub fn smooth_jumps(jumps: Arc<JumpRepresentation>, kernel: &KernelSpec, h: f64, grid: &[f64]) -> Result<CurveEstimate> {
    check_bandwidth("h", h)?;
    let radius = kernel.support_radius * h;
    let values = grid
        .iter()
        .map(|&t| {
            jumps
                .window(t, radius)
                .fold(0.0, |acc, k| acc + jumps.weights[k] * kernel.evaluate((t - jumps.jump_times[k]) / h))
                / h
        })
        .collect();
    Ok(CurveEstimate {
        grid: grid.to_vec(),
        values,
        bandwidth: Some(h),
        smoothing: Some(Smoothing { jumps, kernel: *kernel }),
    })
}

/// `α̂_{h,h'}(t) = (K_{h'} ⋆ α̂_h)(t) = Σ_k w_k (K_h ⋆ K_{h'})(t − u_k)`, with the
/// convolution taken over the whole real line.
pub fn double_smooth(est: &CurveEstimate, kernel: &KernelSpec, h_prime: f64) -> Result<CurveEstimate> {
    check_bandwidth("h_prime", h_prime)?;
    let (Some(h), Some(smoothing)) = (est.bandwidth, est.smoothing.as_ref()) else {
        return Err(invalid("est", "double smoothing needs a single-bandwidth kernel estimate"));
    };
    let jumps = &smoothing.jumps;
    let inner = smoothing.kernel;
    let radius = inner.support_radius * h + kernel.support_radius * h_prime;
    let values = est
        .grid
        .par_iter()
        .map(|&t| {
            jumps
                .window(t, radius)
                .fold(0.0, |acc, k| acc + jumps.weights[k] * inner.convolve(h, kernel, h_prime, t - jumps.jump_times[k]))
        })
        .collect();
    Ok(CurveEstimate { grid: est.grid.clone(), values, bandwidth: Some(h), smoothing: None })
}

/// `∫_0^τ (a − b)²` by the trapezoid rule on the shared grid.
pub fn l2_dist_sq(a: &CurveEstimate, b: &CurveEstimate) -> Result<f64> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch(format!(
            "grids differ ({} vs {} points)",
            a.grid.len(),
            b.grid.len()
        )));
    }
    let sq: Vec<f64> = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).powi(2)).collect();
    Ok(trapezoid(&a.grid, &sq))
}
