//! ℓ1-penalized Cox regression.
//!
//! The estimator minimizes `−l*_n(β) + Γ_n |β|_1` over the ℓ1 ball of radius
//! `R`, where
//!
//! ```text
//! l*_n(β) = (1/n) Σ_{i: δ_i = 1, X_i ≤ τ} [ β·Z_i − log S_n(β, X_i) ]
//! ```
//!
//! uses the normalized risk sum `S_n`. The solver is a proximal Newton scheme:
//! each outer step builds the diagonal (in the linear predictor) quadratic
//! approximation of the partial likelihood, solves the resulting weighted
//! Lasso by cyclic coordinate descent with soft-thresholding, and takes a
//! backtracking step on the exact penalized objective so that the objective
//! never increases between outer iterations.
//!
//! Tied event times share a denominator (Breslow convention).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::SurvivalSample;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LassoOptions {
    /// Convergence threshold on the largest coordinate change.
    pub tol: f64,
    pub max_iter: usize,
    /// Fit on unit-variance columns and map the coefficients back.
    pub standardize: bool,
}

impl Default for LassoOptions {
    fn default() -> Self {
        Self { tol: 1e-7, max_iter: 10_000, standardize: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoxFit {
    pub beta: Vec<f64>,
    pub gamma_n: f64,
    /// `f64::INFINITY` for the unconstrained problem (serialized as `null`).
    #[serde(with = "radius_serde")]
    pub radius: f64,
    /// `−l*_n(β̂)`.
    pub neg_loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Penalized objective after each outer iteration (starting point first).
    #[serde(skip)]
    pub objective_trace: Vec<f64>,
}

impl CoxFit {
    /// Number of nonzero coefficients.
    pub fn support_size(&self) -> usize {
        self.beta.iter().filter(|b| **b != 0.0).count()
    }

    pub fn l1_norm(&self) -> f64 {
        self.beta.iter().map(|b| b.abs()).sum()
    }
}

mod radius_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &f64, s: S) -> Result<S::Ok, S::Error> {
        if r.is_finite() {
            s.serialize_some(r)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// Event groups (distinct event times inside `[0, τ]`) over the time-sorted
/// subjects. Precomputed once per sample and reused across iterations.
#[derive(Debug, Clone)]
struct RiskLayout {
    /// Subjects sorted by ascending time.
    order: Vec<usize>,
    /// Per event group: (first sorted position at risk, number of events).
    groups: Vec<(usize, usize)>,
    /// Per sorted position: number of event groups with time ≤ that subject's time.
    groups_before: Vec<usize>,
    counted: Vec<bool>,
}

impl RiskLayout {
    fn new(sample: &SurvivalSample) -> Self {
        let index = sample.risk_index();
        let order = index.order().to_vec();
        let sorted = index.sorted_times();
        let tau = sample.tau();
        let counted: Vec<bool> = sample
            .times()
            .iter()
            .zip(sample.events())
            .map(|(&x, &d)| d && x <= tau)
            .collect();
        let mut groups: Vec<(usize, usize)> = Vec::new();
        let mut groups_before = vec![0usize; order.len()];
        let mut k = 0;
        while k < order.len() {
            let t = sorted[k];
            let mut end = k;
            let mut events = 0;
            while end < order.len() && sorted[end] == t {
                events += usize::from(counted[order[end]]);
                end += 1;
            }
            if events > 0 {
                groups.push((k, events));
            }
            for slot in &mut groups_before[k..end] {
                *slot = groups.len();
            }
            k = end;
        }
        Self { order, groups, groups_before, counted }
    }

    /// Risk sums `Σ_{X_j ≥ t_g} exp(η_j − shift)` per event group.
    fn risk_sums(&self, eta: &[f64], shift: f64) -> Vec<f64> {
        let n = self.order.len();
        let mut suffix = vec![0.0; n + 1];
        for k in (0..n).rev() {
            suffix[k] = suffix[k + 1] + (eta[self.order[k]] - shift).exp();
        }
        self.groups.iter().map(|&(start, _)| suffix[start]).collect()
    }
}

fn max_finite(eta: &[f64]) -> f64 {
    eta.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(0.0)
}

/// Unnormalized log partial likelihood `Σ δ_i [η_i − log Σ_{X_j ≥ X_i} e^{η_j}]`.
fn log_partial_likelihood(layout: &RiskLayout, eta: &[f64]) -> f64 {
    let shift = max_finite(eta);
    let sums = layout.risk_sums(eta, shift);
    let mut total: f64 = eta
        .iter()
        .zip(&layout.counted)
        .filter(|(_, &c)| c)
        .map(|(e, _)| *e)
        .sum();
    for (&(_, d), r) in layout.groups.iter().zip(&sums) {
        total -= d as f64 * (r.ln() + shift);
    }
    total
}

/// `l*_n(β)` with the normalized risk sum. Returns 0 when there are no events.
pub fn partial_loglik(sample: &SurvivalSample, beta: &[f64]) -> Result<f64> {
    if beta.iter().any(|b| !b.is_finite()) {
        return Err(invalid("beta", "must be finite"));
    }
    let eta = sample.linear_predictor(beta)?;
    let layout = RiskLayout::new(sample);
    let n = sample.n() as f64;
    let n_events: usize = layout.groups.iter().map(|g| g.1).sum();
    Ok((log_partial_likelihood(&layout, &eta) + n_events as f64 * n.ln()) / n)
}

/// Gradient of `l*_n` with respect to β.
pub fn partial_loglik_grad(sample: &SurvivalSample, beta: &[f64]) -> Result<Vec<f64>> {
    let eta = sample.linear_predictor(beta)?;
    let layout = RiskLayout::new(sample);
    let cols = columns(sample);
    let residual = eta_gradient(&layout, &eta);
    let n = sample.n() as f64;
    Ok(cols.iter().map(|c| dot(c, &residual) / n).collect())
}

/// `∂ (n · l*_n) / ∂η_i = δ_i − e^{η_i} Σ_{g: t_g ≤ X_i} d_g / R_g`.
fn eta_gradient(layout: &RiskLayout, eta: &[f64]) -> Vec<f64> {
    let (grad, _) = eta_gradient_and_weights(layout, eta);
    grad
}

fn eta_gradient_and_weights(layout: &RiskLayout, eta: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let shift = max_finite(eta);
    let sums = layout.risk_sums(eta, shift);
    let mut c1 = Vec::with_capacity(sums.len() + 1);
    let mut c2 = Vec::with_capacity(sums.len() + 1);
    c1.push(0.0);
    c2.push(0.0);
    for (&(_, d), r) in layout.groups.iter().zip(&sums) {
        let d = d as f64;
        c1.push(c1.last().unwrap() + d / r);
        c2.push(c2.last().unwrap() + d / (r * r));
    }
    let n = eta.len();
    let mut grad = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for (pos, &i) in layout.order.iter().enumerate() {
        let g = layout.groups_before[pos];
        let r = (eta[i] - shift).exp();
        let mu = r * c1[g];
        grad[i] = f64::from(u8::from(layout.counted[i])) - mu;
        weights[i] = (mu - r * r * c2[g]).max(0.0);
    }
    (grad, weights)
}

fn columns(sample: &SurvivalSample) -> Vec<Vec<f64>> {
    sample.covariates().columns().into_iter().map(|c| c.to_vec()).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// Smallest penalty at which `β = 0` is optimal: `max_j |∂_j l*_n(0)|`.
pub fn gamma_max(sample: &SurvivalSample) -> f64 {
    let zero = vec![0.0; sample.p()];
    partial_loglik_grad(sample, &zero)
        .expect("zero vector has length p")
        .iter()
        .fold(0.0, |m, g| m.max(g.abs()))
}

/// Largest KKT violation of the penalized problem at `beta` (unconstrained ball).
pub fn kkt_residual(sample: &SurvivalSample, beta: &[f64], gamma_n: f64) -> Result<f64> {
    let grad = partial_loglik_grad(sample, beta)?;
    Ok(grad
        .iter()
        .zip(beta)
        .map(|(g, &b)| {
            // subgradient of −l* + Γ|β|_1
            if b == 0.0 {
                (g.abs() - gamma_n).max(0.0)
            } else {
                (-g + gamma_n * b.signum()).abs()
            }
        })
        .fold(0.0, f64::max))
}

/// Working problem on (possibly standardized) columns.
struct Problem {
    layout: RiskLayout,
    cols: Vec<Vec<f64>>,
    n: f64,
    n_events: usize,
    gamma: f64,
}

impl Problem {
    fn new(sample: &SurvivalSample, cols: Vec<Vec<f64>>, gamma: f64) -> Self {
        let layout = RiskLayout::new(sample);
        let n_events = layout.groups.iter().map(|g| g.1).sum();
        Self { layout, cols, n: sample.n() as f64, n_events, gamma }
    }

    fn eta(&self, beta: &[f64]) -> Vec<f64> {
        let mut eta = vec![0.0; self.n as usize];
        for (c, &b) in self.cols.iter().zip(beta) {
            if b != 0.0 {
                for (e, z) in eta.iter_mut().zip(c) {
                    *e += b * z;
                }
            }
        }
        eta
    }

    fn neg_loglik(&self, eta: &[f64]) -> f64 {
        -(log_partial_likelihood(&self.layout, eta) + self.n_events as f64 * self.n.ln()) / self.n
    }

    fn objective(&self, beta: &[f64], eta: &[f64]) -> f64 {
        self.neg_loglik(eta) + self.gamma * beta.iter().map(|b| b.abs()).sum::<f64>()
    }
}

/// Fits the Lasso Cox model at penalty `gamma_n` inside the ℓ1 ball of `radius`.
pub fn fit_lasso(sample: &SurvivalSample, gamma_n: f64, radius: f64, opts: &LassoOptions) -> Result<CoxFit> {
    fit_lasso_from(sample, gamma_n, radius, opts, None)
}

/// Same as [`fit_lasso`], starting from `init` (warm start) when given.
pub fn fit_lasso_from(
    sample: &SurvivalSample,
    gamma_n: f64,
    radius: f64,
    opts: &LassoOptions,
    init: Option<&[f64]>,
) -> Result<CoxFit> {
    if !(gamma_n >= 0.0) || gamma_n.is_infinite() {
        return Err(invalid("gamma_n", format!("must be finite and non-negative, got {gamma_n}")));
    }
    if !(radius > 0.0) {
        return Err(invalid("radius", format!("must be positive, got {radius}")));
    }
    if !(opts.tol > 0.0) {
        return Err(invalid("tol", "must be positive"));
    }
    let p = sample.p();
    if let Some(b) = init {
        sample.check_beta(b)?;
    }
    let mut cols = columns(sample);
    let scales: Vec<f64> = if opts.standardize {
        cols.iter_mut()
            .map(|c| {
                let m = c.iter().sum::<f64>() / c.len() as f64;
                let sd = (c.iter().map(|z| (z - m).powi(2)).sum::<f64>() / c.len() as f64).sqrt();
                if sd > 0.0 {
                    c.iter_mut().for_each(|z| *z /= sd);
                    sd
                } else {
                    c.iter_mut().for_each(|z| *z = 0.0);
                    0.0
                }
            })
            .collect()
    } else {
        vec![1.0; p]
    };
    let to_internal = |b: &[f64]| -> Vec<f64> { b.iter().zip(&scales).map(|(b, s)| b * s).collect() };
    let to_external = |b: &[f64]| -> Vec<f64> {
        b.iter().zip(&scales).map(|(b, &s)| if s > 0.0 { b / s } else { 0.0 }).collect()
    };

    let problem = Problem::new(sample, cols, gamma_n);
    let start = init.map(to_internal).unwrap_or_else(|| vec![0.0; p]);
    let mut state = proximal_newton(&problem, start, opts)?;

    let l1: f64 = state.beta.iter().map(|b| b.abs()).sum();
    if radius.is_finite() && l1 > radius {
        state.beta = project_l1_ball(&state.beta, radius);
        repolish_in_ball(&problem, &mut state.beta, radius);
        let eta = problem.eta(&state.beta);
        state.trace.push(problem.objective(&state.beta, &eta));
    }

    let eta = problem.eta(&state.beta);
    let neg_loglik = problem.neg_loglik(&eta);
    Ok(CoxFit {
        beta: to_external(&state.beta),
        gamma_n,
        radius,
        neg_loglik,
        iterations: state.iterations,
        converged: state.converged,
        objective_trace: state.trace,
    })
}

struct SolverState {
    beta: Vec<f64>,
    iterations: usize,
    converged: bool,
    trace: Vec<f64>,
}

fn proximal_newton(problem: &Problem, mut beta: Vec<f64>, opts: &LassoOptions) -> Result<SolverState> {
    let p = beta.len();
    let n = problem.n;
    let gamma = problem.gamma;
    let mut eta = problem.eta(&beta);
    let mut objective = problem.objective(&beta, &eta);
    if !objective.is_finite() {
        return Err(Error::NonFinite { iteration: 0, beta });
    }
    let mut trace = vec![objective];
    if problem.n_events == 0 {
        return Ok(SolverState { beta: vec![0.0; p], iterations: 0, converged: true, trace });
    }

    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let (grad_eta, weights) = eta_gradient_and_weights(&problem.layout, &eta);
        // Working residual r_i = (z_i − η_i) · w_i / w_i, kept as w_i(z_i − η_i) = grad_i.
        let mut wresid = grad_eta.clone();
        let curvature: Vec<f64> = problem
            .cols
            .iter()
            .map(|c| c.iter().zip(&weights).map(|(z, w)| w * z * z).sum::<f64>() / n)
            .collect();

        let mut candidate = beta.clone();
        let inner_tol = opts.tol * 0.1;
        let mut sweeps = 0;
        loop {
            sweeps += 1;
            let mut max_change: f64 = 0.0;
            for j in 0..p {
                let a = curvature[j];
                if a <= 0.0 {
                    if candidate[j] != 0.0 {
                        let delta = -candidate[j];
                        update_residual(&mut wresid, &problem.cols[j], &weights, delta);
                        candidate[j] = 0.0;
                        max_change = max_change.max(delta.abs());
                    }
                    continue;
                }
                let g = dot(&problem.cols[j], &wresid) / n + a * candidate[j];
                let next = soft_threshold(g, gamma) / a;
                let delta = next - candidate[j];
                if delta != 0.0 {
                    update_residual(&mut wresid, &problem.cols[j], &weights, delta);
                    candidate[j] = next;
                    max_change = max_change.max(delta.abs());
                }
            }
            if max_change < inner_tol || sweeps >= opts.max_iter {
                break;
            }
        }

        let direction: Vec<f64> = candidate.iter().zip(&beta).map(|(c, b)| c - b).collect();
        let step_max = direction.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        if step_max < opts.tol {
            converged = true;
            break;
        }
        // Predicted decrease for the Armijo test.
        let grad_beta: Vec<f64> = problem.cols.iter().map(|c| -dot(c, &grad_eta) / n).collect();
        let l1_now: f64 = beta.iter().map(|b| b.abs()).sum();
        let l1_cand: f64 = candidate.iter().map(|b| b.abs()).sum();
        let predicted = dot(&grad_beta, &direction) + gamma * (l1_cand - l1_now);

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = beta.iter().zip(&direction).map(|(b, d)| b + t * d).collect();
            let trial_eta = problem.eta(&trial);
            let value = problem.objective(&trial, &trial_eta);
            if value.is_finite() && value <= objective + 1e-4 * t * predicted.min(0.0) {
                accepted = Some((trial, trial_eta, value));
                break;
            }
            t *= 0.5;
        }
        let Some((trial, trial_eta, value)) = accepted else {
            if !objective.is_finite() {
                return Err(Error::NonFinite { iteration: iterations, beta });
            }
            // No descent possible along the Newton direction: stationary to working precision.
            converged = t * step_max < opts.tol || predicted.abs() < 1e-14;
            break;
        };
        if !value.is_finite() {
            return Err(Error::NonFinite { iteration: iterations, beta: trial });
        }
        let moved = t * step_max;
        beta = trial;
        eta = trial_eta;
        objective = value;
        trace.push(objective);
        if moved < opts.tol {
            converged = true;
            break;
        }
    }
    Ok(SolverState { beta, iterations, converged, trace })
}

fn update_residual(wresid: &mut [f64], col: &[f64], weights: &[f64], delta: f64) {
    for ((r, z), w) in wresid.iter_mut().zip(col).zip(weights) {
        *r -= w * z * delta;
    }
}

/// Euclidean projection onto `{b : |b|_1 ≤ radius}`.
pub fn project_l1_ball(beta: &[f64], radius: f64) -> Vec<f64> {
    let l1: f64 = beta.iter().map(|b| b.abs()).sum();
    if l1 <= radius {
        return beta.to_vec();
    }
    let mut mags: Vec<f64> = beta.iter().map(|b| b.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, &m) in mags.iter().enumerate() {
        cumulative += m;
        let candidate = (cumulative - radius) / (k + 1) as f64;
        if m - candidate > 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }
    beta.iter().map(|&b| b.signum() * (b.abs() - theta).max(0.0)).collect()
}

/// One coordinate pass that keeps the iterate inside the ball and only accepts
/// moves that lower the penalized objective.
fn repolish_in_ball(problem: &Problem, beta: &mut [f64], radius: f64) {
    let n = problem.n;
    let mut eta = problem.eta(beta);
    let mut objective = problem.objective(beta, &eta);
    for j in 0..beta.len() {
        let (grad_eta, weights) = eta_gradient_and_weights(&problem.layout, &eta);
        let col = &problem.cols[j];
        let a = col.iter().zip(&weights).map(|(z, w)| w * z * z).sum::<f64>() / n;
        if a <= 0.0 {
            continue;
        }
        let g = dot(col, &grad_eta) / n + a * beta[j];
        let budget = radius - (beta.iter().map(|b| b.abs()).sum::<f64>() - beta[j].abs());
        let proposal = (soft_threshold(g, problem.gamma) / a).clamp(-budget.max(0.0), budget.max(0.0));
        let old = beta[j];
        beta[j] = proposal;
        let trial_eta = problem.eta(beta);
        let value = problem.objective(beta, &trial_eta);
        if value <= objective {
            objective = value;
            eta = trial_eta;
        } else {
            beta[j] = old;
        }
    }
}

/// Outcome of penalty selection by cross-validation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaSelection {
    pub selected: f64,
    pub grid: Vec<f64>,
    /// Mean out-of-fold log partial likelihood per event, one entry per grid value.
    pub cv_scores: Vec<f64>,
    pub folds_used: usize,
}

/// Log-spaced penalty grid from [`gamma_max`] down to `ratio · gamma_max`.
pub fn gamma_grid(sample: &SurvivalSample, len: usize, ratio: f64) -> Vec<f64> {
    let top = gamma_max(sample).max(1e-12);
    if len <= 1 {
        return vec![top];
    }
    let (lo, hi) = ((top * ratio).ln(), top.ln());
    (0..len).map(|k| (hi + (lo - hi) * k as f64 / (len - 1) as f64).exp()).collect()
}

/// Default minimum-to-maximum penalty ratio: 0.01 when `n < p`, else 1e-4.
pub fn default_gamma_ratio(sample: &SurvivalSample) -> f64 {
    if sample.n() < sample.p() {
        0.01
    } else {
        1e-4
    }
}

/// Stratified fold labels: events and censored subjects are shuffled
/// separately and dealt round-robin.
pub fn stratified_folds(sample: &SurvivalSample, folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels = vec![0usize; sample.n()];
    let mut offset = 0;
    for status in [true, false] {
        let mut members: Vec<usize> = (0..sample.n()).filter(|&i| sample.events()[i] == status).collect();
        members.shuffle(&mut rng);
        for (k, i) in members.into_iter().enumerate() {
            labels[i] = (k + offset) % folds;
        }
        offset += sample.events().iter().filter(|&&d| d == status).count();
    }
    labels
}

/// Chooses `Γ_n` on a strictly decreasing grid by K-fold cross-validated
/// partial likelihood.
///
/// The out-of-fold score for fold `k` is `L(β̂_{−k}) − L_{−k}(β̂_{−k})`, the
/// full-data log partial likelihood minus the training-data one, which scores
/// the held-out subjects against the full risk sets. Ties go to the larger
/// penalty.
pub fn select_gamma(
    sample: &SurvivalSample,
    grid: &[f64],
    folds: usize,
    seed: u64,
    opts: &LassoOptions,
) -> Result<GammaSelection> {
    if folds < 2 {
        return Err(invalid("folds", format!("need at least 2, got {folds}")));
    }
    if grid.is_empty() {
        return Err(invalid("grid", "must not be empty"));
    }
    if grid.windows(2).any(|w| !(w[0] > w[1])) || grid.iter().any(|g| !(*g >= 0.0)) {
        return Err(invalid("grid", "must be non-negative and strictly decreasing"));
    }
    if grid.len() == 1 {
        return Ok(GammaSelection { selected: grid[0], grid: grid.to_vec(), cv_scores: vec![0.0], folds_used: 0 });
    }
    let labels = stratified_folds(sample, folds, seed);
    let full_layout = RiskLayout::new(sample);
    let radius = f64::INFINITY;

    let per_fold: Vec<Option<(Vec<f64>, usize)>> = (0..folds)
        .into_par_iter()
        .map(|k| -> Result<Option<(Vec<f64>, usize)>> {
            let held_events = (0..sample.n())
                .filter(|&i| labels[i] == k && full_layout.counted[i])
                .count();
            if held_events == 0 {
                log::warn!("cross-validation fold {k} has no events; dropped");
                return Ok(None);
            }
            let train_rows: Vec<usize> = (0..sample.n()).filter(|&i| labels[i] != k).collect();
            let train = sample.subset(&train_rows)?;
            let train_layout = RiskLayout::new(&train);
            let mut warm: Option<Vec<f64>> = None;
            let mut scores = Vec::with_capacity(grid.len());
            for &gamma in grid {
                let fit = fit_lasso_from(&train, gamma, radius, opts, warm.as_deref())?;
                let eta_full = sample.linear_predictor(&fit.beta)?;
                let eta_train = train.linear_predictor(&fit.beta)?;
                scores.push(
                    log_partial_likelihood(&full_layout, &eta_full)
                        - log_partial_likelihood(&train_layout, &eta_train),
                );
                warm = Some(fit.beta);
            }
            Ok(Some((scores, held_events)))
        })
        .collect::<Result<Vec<_>>>()?;

    let used: Vec<&(Vec<f64>, usize)> = per_fold.iter().flatten().collect();
    if used.is_empty() {
        return Err(Error::AllFoldsDropped);
    }
    let total_events: usize = used.iter().map(|(_, e)| e).sum();
    let cv_scores: Vec<f64> = (0..grid.len())
        .map(|g| used.iter().map(|(s, _)| s[g]).sum::<f64>() / total_events as f64)
        .collect();
    let mut best = 0;
    for g in 1..grid.len() {
        if cv_scores[g] > cv_scores[best] {
            best = g;
        }
    }
    Ok(GammaSelection { selected: grid[best], grid: grid.to_vec(), cv_scores, folds_used: used.len() })
}
