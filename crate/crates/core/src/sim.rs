//! Monte-Carlo harness: Weibull–Cox data with exponential censoring, and
//! ISE/MISE comparison of the GL and CV bandwidth selectors.
//!
//! Replication `r` of a design draws from its own ChaCha stream
//! `(seed, stream = r)`, so reports do not depend on how replications are
//! scheduled across threads.

use std::io::Write;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bandwidth::{select_cv, select_gl, make_grid, CvWeighting, DEFAULT_KAPPA_PRIME};
use crate::cox::{default_gamma_ratio, fit_lasso, gamma_grid, select_gamma, LassoOptions};
use crate::data::{quantile_linear, SurvivalSample};
use crate::error::{invalid, Result};
use crate::estimate::{uniform_grid, CurveEstimate, DEFAULT_GRID_POINTS};
use crate::kernel::{KernelKind, KernelSpec};
use crate::quadrature::trapezoid;

/// Draws used to estimate `E[T_1]` for the censoring calibration.
pub const MEAN_SURVIVAL_DRAWS: usize = 1_000_000;
const MEAN_SURVIVAL_SEED: u64 = 0x5eed_cafe_f00d_0001;

fn default_n_rep() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimDesign {
    #[serde(default)]
    pub name: Option<String>,
    pub n: usize,
    pub p: usize,
    /// Defaults to `(0.1, 0.3, 0.5, 0, …, 0)`.
    #[serde(default)]
    pub beta0: Option<Vec<f64>>,
    pub weibull_a: f64,
    pub weibull_lambda: f64,
    pub gamma_cens: f64,
    #[serde(default = "default_n_rep")]
    pub n_rep: usize,
    #[serde(default)]
    pub seed: u64,
}

impl SimDesign {
    /// Weibull `W(a, λ)` baseline with the default regression vector.
    pub fn weibull(n: usize, p: usize, a: f64, lambda: f64, gamma_cens: f64) -> Self {
        Self { name: None, n, p, beta0: None, weibull_a: a, weibull_lambda: lambda, gamma_cens, n_rep: 100, seed: 0 }
    }

    pub fn with_reps(mut self, n_rep: usize) -> Self {
        self.n_rep = n_rep;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(invalid("n", format!("need at least 2 subjects, got {}", self.n)));
        }
        if self.p == 0 {
            return Err(invalid("p", "need at least one covariate"));
        }
        match &self.beta0 {
            None if self.p < 3 => {
                return Err(invalid("p", format!("the default beta0 needs p >= 3, got {}", self.p)));
            }
            Some(b) if b.len() != self.p => {
                return Err(invalid("beta0", format!("length {} does not match p = {}", b.len(), self.p)));
            }
            Some(b) if b.iter().any(|x| !x.is_finite()) => return Err(invalid("beta0", "must be finite")),
            _ => {}
        }
        for (name, v) in [("weibull_a", self.weibull_a), ("weibull_lambda", self.weibull_lambda), ("gamma_cens", self.gamma_cens)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be positive, got {v}")));
            }
        }
        if self.n_rep == 0 {
            return Err(invalid("n_rep", "need at least one replication"));
        }
        Ok(())
    }

    pub fn beta0(&self) -> Vec<f64> {
        self.beta0.clone().unwrap_or_else(|| {
            let mut b = vec![0.0; self.p];
            for (slot, v) in b.iter_mut().zip([0.1, 0.3, 0.5]) {
                *slot = v;
            }
            b
        })
    }

    /// `α_0(t) = a λ^a t^{a−1}`.
    pub fn baseline_hazard(&self, t: f64) -> f64 {
        let a = self.weibull_a;
        a * self.weibull_lambda.powf(a) * t.powf(a - 1.0)
    }

    fn survival_time(&self, u: f64, linear_predictor: f64) -> f64 {
        (-u.ln() * (-linear_predictor).exp()).powf(1.0 / self.weibull_a) / self.weibull_lambda
    }
}

/// `E[T_1]` by Monte-Carlo with a fixed internal seed. Only covariates with
/// nonzero coefficients are drawn since the others do not affect `T`.
pub fn mean_survival_time(design: &SimDesign) -> f64 {
    let beta0 = design.beta0();
    let active: Vec<f64> = beta0.iter().copied().filter(|b| *b != 0.0).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(MEAN_SURVIVAL_SEED);
    let mut total = 0.0;
    for _ in 0..MEAN_SURVIVAL_DRAWS {
        let eta: f64 = active.iter().map(|b| b * rng.random_range(-1.0..=1.0)).sum();
        let u = 1.0 - rng.random::<f64>();
        total += design.survival_time(u, eta);
    }
    total / MEAN_SURVIVAL_DRAWS as f64
}

/// A simulated sample together with the latent quantities.
#[derive(Debug, Clone)]
pub struct SimulatedSample {
    pub sample: SurvivalSample,
    pub event_times: Vec<f64>,
    pub censor_times: Vec<f64>,
    pub beta0: Vec<f64>,
}

impl SimulatedSample {
    /// Fraction of subjects with `C_i < T_i` (the rate `γ` is calibrated for).
    pub fn random_censoring_rate(&self) -> f64 {
        let censored = self.event_times.iter().zip(&self.censor_times).filter(|(t, c)| c < t).count();
        censored as f64 / self.event_times.len() as f64
    }

    /// Fraction with `δ_i = 0`, including subjects censored at `τ`.
    pub fn observed_censoring_rate(&self) -> f64 {
        let censored = self.sample.events().iter().filter(|d| !**d).count();
        censored as f64 / self.sample.n() as f64
    }
}

/// A design with its censoring calibration resolved.
#[derive(Debug, Clone)]
pub struct PreparedDesign {
    pub design: SimDesign,
    pub mean_survival: f64,
}

impl PreparedDesign {
    pub fn new(design: SimDesign) -> Result<Self> {
        design.validate()?;
        let mean_survival = mean_survival_time(&design);
        Ok(Self { design, mean_survival })
    }

    pub fn rng(&self, rep_index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.design.seed);
        rng.set_stream(rep_index);
        rng
    }

    pub fn generate(&self, rep_index: u64) -> Result<SimulatedSample> {
        self.generate_with(&mut self.rng(rep_index))
    }

    fn generate_with(&self, rng: &mut ChaCha8Rng) -> Result<SimulatedSample> {
        let d = &self.design;
        let (n, p) = (d.n, d.p);
        let beta0 = d.beta0();
        let covariates = ndarray::Array2::from_shape_simple_fn((n, p), || rng.random_range(-1.0..=1.0));
        let event_times: Vec<f64> = covariates
            .rows()
            .into_iter()
            .map(|z| {
                let eta: f64 = z.iter().zip(&beta0).map(|(a, b)| a * b).sum();
                let u = 1.0 - rng.random::<f64>();
                d.survival_time(u, eta)
            })
            .collect();
        let censoring = Exp::new(1.0 / (d.gamma_cens * self.mean_survival)).map_err(|e| invalid("gamma_cens", e.to_string()))?;
        let censor_times: Vec<f64> = (0..n).map(|_| censoring.sample(rng)).collect();
        let first: Vec<f64> = event_times.iter().zip(&censor_times).map(|(t, c)| t.min(*c)).collect();
        let tau = quantile_linear(&first, 0.9);
        let mut times = Vec::with_capacity(n);
        let mut events = Vec::with_capacity(n);
        for (t, c) in event_times.iter().zip(&censor_times) {
            let c_trunc = c.min(tau);
            times.push(t.min(c_trunc));
            events.push(*t <= c_trunc);
        }
        let sample = SurvivalSample::with_tau(times, events, covariates, tau)?;
        Ok(SimulatedSample { sample, event_times, censor_times, beta0 })
    }
}

/// Convenience wrapper that recomputes `E[T_1]` on every call.
pub fn generate(design: &SimDesign, rep_index: u64) -> Result<SimulatedSample> {
    PreparedDesign::new(design.clone())?.generate(rep_index)
}

/// Grid points used for ISE integrals: all of them when `α_0` is bounded at
/// 0, otherwise from the first positive point.
fn ise_start(design: &SimDesign, grid: &[f64]) -> usize {
    if design.weibull_a < 1.0 && grid.first() == Some(&0.0) {
        1
    } else {
        0
    }
}

/// `∫_0^τ (α − α_0)²` by the trapezoid rule on the estimate's grid.
pub fn ise_stand(est: &CurveEstimate, design: &SimDesign) -> f64 {
    let start = ise_start(design, &est.grid);
    let grid = &est.grid[start..];
    let sq: Vec<f64> = grid
        .iter()
        .zip(&est.values[start..])
        .map(|(&t, v)| (v - design.baseline_hazard(t)).powi(2))
        .collect();
    trapezoid(grid, &sq)
}

/// `(1/n) Σ_i ∫_0^τ (α(t) e^{β̂·Z_i} − α_0(t) e^{β_0·Z_i})² dt`.
pub fn ise_total(est: &CurveEstimate, beta_hat: &[f64], sim: &SimulatedSample, design: &SimDesign) -> Result<f64> {
    let start = ise_start(design, &est.grid);
    let grid = &est.grid[start..];
    let alpha = &est.values[start..];
    let alpha0: Vec<f64> = grid.iter().map(|&t| design.baseline_hazard(t)).collect();
    let aa: Vec<f64> = alpha.iter().map(|a| a * a).collect();
    let ab: Vec<f64> = alpha.iter().zip(&alpha0).map(|(a, b)| a * b).collect();
    let bb: Vec<f64> = alpha0.iter().map(|b| b * b).collect();
    let (i_aa, i_ab, i_bb) = (trapezoid(grid, &aa), trapezoid(grid, &ab), trapezoid(grid, &bb));
    let eta_hat = sim.sample.linear_predictor(beta_hat)?;
    let eta0 = sim.sample.linear_predictor(&sim.beta0)?;
    let n = eta_hat.len() as f64;
    Ok(eta_hat
        .iter()
        .zip(&eta0)
        .map(|(eh, e0)| {
            let (ph, p0) = (eh.exp(), e0.exp());
            (ph * ph * i_aa - 2.0 * ph * p0 * i_ab + p0 * p0 * i_bb).max(0.0)
        })
        .sum::<f64>()
        / n)
}

/// The theoretical variance term `V(h)` with known model quantities, for
/// diagnostics only: `κ ||α_0||_∞ τ / c_S² (||α_0||_∞ E[e^{2β_0·Z}] τ + E[e^{β_0·Z}]) ||K||²₂ / (nh)`.
///
/// `c_S` is taken as the empirical `S_n(β_0, τ)`; the exponential moments
/// use `E[e^{bU}] = sinh(b)/b` for `U ~ U[−1, 1]`.
pub fn oracle_variance(sim: &SimulatedSample, design: &SimDesign, kernel: &KernelSpec, kappa: f64, h: f64) -> Result<f64> {
    let tau = sim.sample.tau();
    let sup_alpha0 = if design.weibull_a >= 1.0 { design.baseline_hazard(tau) } else { f64::INFINITY };
    let moment = |scale: f64| -> f64 {
        sim.beta0
            .iter()
            .map(|b| {
                let x = scale * b;
                if x == 0.0 {
                    1.0
                } else {
                    x.sinh() / x
                }
            })
            .product()
    };
    let c_s = crate::data::s_n(&sim.sample, &sim.beta0, tau)?;
    let n = sim.sample.n() as f64;
    Ok(kappa * sup_alpha0 * tau / (c_s * c_s) * (sup_alpha0 * moment(2.0) * tau + moment(1.0)) * kernel.l2_norm_sq / (n * h))
}

/// Knobs of the estimation pipeline run inside each replication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarnessOptions {
    pub kernel: KernelKind,
    pub kappa_prime: f64,
    pub grid_points: usize,
    pub gamma_grid_len: usize,
    pub folds: usize,
    pub lasso: LassoOptions,
    pub cv_weighting: CvWeighting,
}

impl Default for HarnessOptions {
    fn default() -> Self {
        Self {
            kernel: KernelKind::Epanechnikov,
            kappa_prime: DEFAULT_KAPPA_PRIME,
            grid_points: DEFAULT_GRID_POINTS,
            gamma_grid_len: 20,
            folds: 5,
            lasso: LassoOptions::default(),
            cv_weighting: CvWeighting::AtRiskCount,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationResult {
    pub rep: u64,
    pub tau: f64,
    pub random_censoring_rate: f64,
    pub observed_censoring_rate: f64,
    pub gamma_n: f64,
    pub lasso_converged: bool,
    pub beta_l1_error: f64,
    pub h_gl: f64,
    pub h_cv: f64,
    pub ise_stand_gl: f64,
    pub ise_stand_cv: f64,
    pub ise_total_gl: f64,
    pub ise_total_cv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MiseReport {
    pub design: SimDesign,
    pub mise_stand_gl: f64,
    pub mise_stand_cv: f64,
    pub mise_total_gl: f64,
    pub mise_total_cv: f64,
    /// Mean fraction of subjects with `C_i < T_i`.
    pub empirical_censoring_rate: f64,
    /// Mean fraction with `δ_i = 0`, including censoring at `τ`.
    pub observed_censoring_rate: f64,
    pub per_rep: Vec<ReplicationResult>,
}

impl MiseReport {
    pub fn from_replications(design: SimDesign, per_rep: Vec<ReplicationResult>) -> Self {
        let mean = |f: fn(&ReplicationResult) -> f64| per_rep.iter().map(f).sum::<f64>() / per_rep.len() as f64;
        Self {
            mise_stand_gl: mean(|r| r.ise_stand_gl),
            mise_stand_cv: mean(|r| r.ise_stand_cv),
            mise_total_gl: mean(|r| r.ise_total_gl),
            mise_total_cv: mean(|r| r.ise_total_cv),
            empirical_censoring_rate: mean(|r| r.random_censoring_rate),
            observed_censoring_rate: mean(|r| r.observed_censoring_rate),
            design,
            per_rep,
        }
    }

    /// Long-format per-replication table.
    pub fn write_per_rep_csv<W: Write>(&self, out: W, design_label: &str, header: bool) -> Result<()> {
        let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        if header {
            writer.write_record([
                "design", "rep", "tau", "random_censoring_rate", "observed_censoring_rate", "gamma_n",
                "lasso_converged", "beta_l1_error", "h_gl", "h_cv", "ise_stand_gl", "ise_stand_cv",
                "ise_total_gl", "ise_total_cv",
            ])?;
        }
        for r in &self.per_rep {
            writer.write_record([
                design_label.to_string(),
                r.rep.to_string(),
                r.tau.to_string(),
                r.random_censoring_rate.to_string(),
                r.observed_censoring_rate.to_string(),
                r.gamma_n.to_string(),
                r.lasso_converged.to_string(),
                r.beta_l1_error.to_string(),
                r.h_gl.to_string(),
                r.h_cv.to_string(),
                r.ise_stand_gl.to_string(),
                r.ise_stand_cv.to_string(),
                r.ise_total_gl.to_string(),
                r.ise_total_cv.to_string(),
            ])?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Runs the full pipeline on one replication.
pub fn run_replication(prepared: &PreparedDesign, rep: u64, options: &HarnessOptions) -> Result<ReplicationResult> {
    let design = &prepared.design;
    let mut rng = prepared.rng(rep);
    let sim = prepared.generate_with(&mut rng)?;
    let fold_seed = rng.next_u64();
    let sample = &sim.sample;

    let gammas = gamma_grid(sample, options.gamma_grid_len, default_gamma_ratio(sample));
    let chosen = select_gamma(sample, &gammas, options.folds, fold_seed, &options.lasso)?;
    let fit = fit_lasso(sample, chosen.selected, f64::INFINITY, &options.lasso)?;
    if !fit.converged {
        log::warn!("replication {rep}: lasso did not converge after {} iterations", fit.iterations);
    }

    let kernel = KernelSpec::new(options.kernel);
    let eval_grid = uniform_grid(sample.tau(), options.grid_points)?;
    let gl = select_gl(sample, &fit.beta, &kernel, options.kappa_prime, &eval_grid)?;
    let cv = select_cv(sample, &fit.beta, &kernel, &make_grid(sample.n())?, &eval_grid, options.cv_weighting)?;
    let (est_gl, est_cv) = (gl.selected_estimate(), cv.selected_estimate());

    Ok(ReplicationResult {
        rep,
        tau: sample.tau(),
        random_censoring_rate: sim.random_censoring_rate(),
        observed_censoring_rate: sim.observed_censoring_rate(),
        gamma_n: chosen.selected,
        lasso_converged: fit.converged,
        beta_l1_error: fit.beta.iter().zip(&sim.beta0).map(|(a, b)| (a - b).abs()).sum(),
        h_gl: gl.selected,
        h_cv: cv.selected,
        ise_stand_gl: ise_stand(est_gl, design),
        ise_stand_cv: ise_stand(est_cv, design),
        ise_total_gl: ise_total(est_gl, &fit.beta, &sim, design)?,
        ise_total_cv: ise_total(est_cv, &fit.beta, &sim, design)?,
    })
}

/// Runs every replication of `design` and aggregates the MISEs.
pub fn run_experiment(design: &SimDesign, options: &HarnessOptions) -> Result<MiseReport> {
    let prepared = PreparedDesign::new(design.clone())?;
    let per_rep = (0..design.n_rep as u64)
        .into_par_iter()
        .map(|rep| run_replication(&prepared, rep, options))
        .collect::<Result<Vec<_>>>()?;
    Ok(MiseReport::from_replications(design.clone(), per_rep))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_beta0_and_validation() {
        let d = SimDesign::weibull(200, 15, 1.5, 1.0, 4.5);
        assert_eq!(&d.beta0()[..4], &[0.1, 0.3, 0.5, 0.0]);
        assert!(d.validate().is_ok());
        assert!(SimDesign::weibull(200, 2, 1.5, 1.0, 4.5).validate().is_err());
        let mut bad = d.clone();
        bad.gamma_cens = 0.0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn ise_of_truth_is_zero() {
        let d = SimDesign::weibull(10, 3, 1.5, 1.0, 4.5);
        let grid = uniform_grid(1.0, 512).unwrap();
        let values = grid.iter().map(|&t| d.baseline_hazard(t)).collect();
        let est = CurveEstimate::new(grid, values).unwrap();
        assert!(ise_stand(&est, &d) < 1e-10);
    }

    #[test]
    fn ise_of_zero_curve() {
        let d = SimDesign::weibull(10, 3, 1.5, 1.0, 4.5);
        let grid = uniform_grid(1.0, 4097).unwrap();
        let est = CurveEstimate::new(grid.clone(), vec![0.0; grid.len()]).unwrap();
        // ∫_0^1 (1.5 √t)² dt = 1.125; the integrand is linear so trapezoid is exact.
        assert!((ise_stand(&est, &d) - 1.125).abs() < 1e-12);
    }

    #[test]
    fn ise_constant_offset() {
        let d = SimDesign::weibull(10, 3, 1.5, 1.0, 4.5);
        let grid = uniform_grid(2.0, 512).unwrap();
        let values = grid.iter().map(|&t| d.baseline_hazard(t) + 1.0).collect();
        let est = CurveEstimate::new(grid, values).unwrap();
        assert!((ise_stand(&est, &d) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ise_skips_singular_origin() {
        let d = SimDesign::weibull(10, 3, 0.5, 2.0, 4.5);
        let grid = uniform_grid(1.0, 64).unwrap();
        let est = CurveEstimate::new(grid.clone(), vec![0.0; 64]).unwrap();
        assert!(ise_stand(&est, &d).is_finite());
    }

    #[test]
    fn replications_are_reproducible() {
        let p = PreparedDesign::new(SimDesign::weibull(50, 4, 1.5, 1.0, 4.5).with_seed(9)).unwrap();
        let a = p.generate(3).unwrap();
        let b = p.generate(3).unwrap();
        let c = p.generate(4).unwrap();
        assert_eq!(a.sample.times(), b.sample.times());
        assert_ne!(a.sample.times(), c.sample.times());
    }

    #[test]
    fn generated_sample_respects_tau() {
        let p = PreparedDesign::new(SimDesign::weibull(300, 4, 1.5, 1.0, 1.2).with_seed(1)).unwrap();
        let s = p.generate(0).unwrap();
        let tau = s.sample.tau();
        assert!(s.sample.times().iter().all(|&x| x <= tau));
        assert!(s.sample.times().iter().any(|&x| x == tau));
        for i in 0..s.sample.n() {
            assert_eq!(s.sample.events()[i], s.event_times[i] <= s.censor_times[i].min(tau));
        }
    }

    #[test]
    fn oracle_variance_scales_inversely_with_h() {
        let d = SimDesign::weibull(100, 3, 1.5, 1.0, 4.5).with_seed(2);
        let sim = generate(&d, 0).unwrap();
        let k = KernelSpec::new(KernelKind::Epanechnikov);
        let v1 = oracle_variance(&sim, &d, &k, 1.0, 0.5).unwrap();
        let v2 = oracle_variance(&sim, &d, &k, 1.0, 0.25).unwrap();
        assert!(v1 > 0.0 && (v2 / v1 - 2.0).abs() < 1e-12);
    }
}
