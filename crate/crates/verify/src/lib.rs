//! Reference implementations used to check `hazard-core`.
//!
//! Everything here is written for clarity over speed: plain O(n²) loops,
//! no shared helpers with the library beyond sample accessors and kernel
//! evaluation.

use hazard_core::{KernelSpec, SurvivalSample};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A small random sample: uniform covariates on `[−1, 1]`, exponential event
/// and censoring times. With `tie_levels = Some(k)` times are rounded to a
/// grid of `k` values per unit so that ties are common.
pub fn random_sample(seed: u64, n: usize, p: usize, tie_levels: Option<u32>) -> SurvivalSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = Array2::from_shape_simple_fn((n, p), || rng.random_range(-1.0..=1.0));
    let mut times = Vec::with_capacity(n);
    let mut events = Vec::with_capacity(n);
    for i in 0..n {
        let eta: f64 = z.row(i).iter().enumerate().map(|(j, v)| v * 0.4 / (j + 1) as f64).sum();
        let t = -(1.0 - rng.random::<f64>()).ln() * (-eta).exp();
        let c = -(1.0 - rng.random::<f64>()).ln() * 2.0;
        let mut x = t.min(c);
        if let Some(k) = tie_levels {
            x = ((x * k as f64).ceil() / k as f64).max(1.0 / k as f64);
        }
        times.push(x);
        events.push(t <= c);
    }
    SurvivalSample::new(times, events, z).expect("valid random sample")
}

/// Nelson–Aalen estimator on `[0, τ]`: `(u, Σ_{s ≤ u} d(s)/Y(s))` at every
/// distinct event time `u ≤ τ`.
pub fn nelson_aalen(times: &[f64], events: &[bool], tau: f64) -> Vec<(f64, f64)> {
    let mut distinct: Vec<f64> = times
        .iter()
        .zip(events)
        .filter(|(t, d)| **d && **t <= tau)
        .map(|(t, _)| *t)
        .collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let mut cumulative = 0.0;
    distinct
        .into_iter()
        .map(|u| {
            let deaths = times.iter().zip(events).filter(|(t, d)| **d && **t == u).count() as f64;
            let at_risk = times.iter().filter(|t| **t >= u).count() as f64;
            cumulative += deaths / at_risk;
            (u, cumulative)
        })
        .collect()
}

fn linear(z: &Array2<f64>, i: usize, beta: &[f64]) -> f64 {
    z.row(i).iter().zip(beta).map(|(a, b)| a * b).sum()
}

/// Normalized log partial likelihood with Breslow ties, counting events in `[0, τ]`:
/// `(1/n) Σ_{δ_i = 1, X_i ≤ τ} [β·Z_i − log((1/n) Σ_{X_j ≥ X_i} e^{β·Z_j})]`.
pub fn cox_loglik(sample: &SurvivalSample, beta: &[f64]) -> f64 {
    let (x, d, z) = (sample.times(), sample.events(), sample.covariates());
    let n = x.len();
    let mut total = 0.0;
    for i in 0..n {
        if !d[i] || x[i] > sample.tau() {
            continue;
        }
        let s: f64 = (0..n).filter(|&j| x[j] >= x[i]).map(|j| linear(z, j, beta).exp()).sum::<f64>() / n as f64;
        total += linear(z, i, beta) - s.ln();
    }
    total / n as f64
}

/// Gradient and Hessian of [`cox_loglik`].
pub fn cox_derivatives(sample: &SurvivalSample, beta: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let (x, d, z) = (sample.times(), sample.events(), sample.covariates());
    let (n, p) = (x.len(), beta.len());
    let mut grad = vec![0.0; p];
    let mut hess = vec![vec![0.0; p]; p];
    for i in 0..n {
        if !d[i] || x[i] > sample.tau() {
            continue;
        }
        let mut s0 = 0.0;
        let mut s1 = vec![0.0; p];
        let mut s2 = vec![vec![0.0; p]; p];
        for j in (0..n).filter(|&j| x[j] >= x[i]) {
            let w = linear(z, j, beta).exp();
            s0 += w;
            for a in 0..p {
                s1[a] += w * z[[j, a]];
                for b in 0..p {
                    s2[a][b] += w * z[[j, a]] * z[[j, b]];
                }
            }
        }
        for a in 0..p {
            grad[a] += z[[i, a]] - s1[a] / s0;
            for b in 0..p {
                hess[a][b] -= s2[a][b] / s0 - s1[a] * s1[b] / (s0 * s0);
            }
        }
    }
    for a in 0..p {
        grad[a] /= n as f64;
        for b in 0..p {
            hess[a][b] /= n as f64;
        }
    }
    (grad, hess)
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let p = b.len();
    for col in 0..p {
        let pivot = (col..p).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs())).unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..p {
            let f = a[row][col] / a[col][col];
            for k in col..p {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; p];
    for row in (0..p).rev() {
        let tail: f64 = (row + 1..p).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    x
}

/// Unpenalized maximizer of [`cox_loglik`] by damped Newton–Raphson.
pub fn newton_cox(sample: &SurvivalSample) -> Vec<f64> {
    let p = sample.p();
    let mut beta = vec![0.0; p];
    let mut current = cox_loglik(sample, &beta);
    for _ in 0..200 {
        let (g, h) = cox_derivatives(sample, &beta);
        let neg_h: Vec<Vec<f64>> = h.iter().map(|r| r.iter().map(|v| -v).collect()).collect();
        let step = solve(neg_h, g.clone());
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = beta.iter().zip(&step).map(|(b, s)| b + t * s).collect();
            let value = cox_loglik(sample, &trial);
            if value >= current - 1e-15 || t < 1e-10 {
                beta = trial;
                current = value;
                break;
            }
            t *= 0.5;
        }
        if step.iter().map(|s| (t * s).abs()).fold(0.0, f64::max) < 1e-13 {
            break;
        }
    }
    beta
}

/// Adaptive Simpson quadrature.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rule<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64, whole: f64, m: f64, fm: f64, tol: f64, depth: u32) -> f64 {
        let (lm, flm, left) = rule(f, a, fa, m, fm);
        let (rm, frm, right) = rule(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1) + recurse(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = rule(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 50)
}

/// χ²₁ upper quantile by bisection on `P(χ²₁ ≤ x) = erf(√(x/2))`, with the
/// error function integrated by [`simpson`].
pub fn chi2_1_quantile(alpha: f64) -> f64 {
    let cdf = |x: f64| {
        let upper = (x / 2.0).sqrt();
        2.0 / std::f64::consts::PI.sqrt() * simpson(&|t: f64| (-t * t).exp(), 0.0, upper, 1e-15)
    };
    let (mut lo, mut hi) = (0.0, 100.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < 1.0 - alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    let mut total = 0.0;
    for k in 1..x.len() {
        total += 0.5 * (x[k] - x[k - 1]) * (y[k] + y[k - 1]);
    }
    total
}

/// Breslow jumps `(u_k, w_k)` with `w_k = 1/Σ_{X_j ≥ u_k} e^{β·Z_j}`, sorted by time.
pub fn breslow_jumps(sample: &SurvivalSample, beta: &[f64]) -> Vec<(f64, f64)> {
    let (x, d, z) = (sample.times(), sample.events(), sample.covariates());
    let mut jumps: Vec<(f64, f64)> = (0..x.len())
        .filter(|&i| d[i] && x[i] <= sample.tau())
        .map(|i| {
            let risk: f64 = (0..x.len()).filter(|&j| x[j] >= x[i]).map(|j| linear(z, j, beta).exp()).sum();
            (x[i], 1.0 / risk)
        })
        .collect();
    jumps.sort_by(|a, b| a.0.total_cmp(&b.0));
    jumps
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruteGl {
    /// `(h, A(h), V(h))`, largest bandwidth first.
    pub rows: Vec<(f64, f64, f64)>,
    pub selected: f64,
}

/// Exhaustive Goldenshluger–Lepski selection: every single- and double-smoothed
/// estimate is rebuilt from the raw jumps for every pair of bandwidths.
pub fn brute_force_gl(
    sample: &SurvivalSample,
    beta: &[f64],
    kernel: &KernelSpec,
    kappa_prime: f64,
    bandwidths: &[f64],
    eval_grid: &[f64],
) -> BruteGl {
    let jumps = breslow_jumps(sample, beta);
    let mut hs = bandwidths.to_vec();
    hs.sort_by(|a, b| b.total_cmp(a));
    let single = |h: f64| -> Vec<f64> {
        eval_grid
            .iter()
            .map(|&t| {
                let mut s = 0.0;
                for &(u, w) in &jumps {
                    s += w * kernel.evaluate((t - u) / h);
                }
                s / h
            })
            .collect()
    };
    let double = |h: f64, h2: f64| -> Vec<f64> {
        eval_grid
            .iter()
            .map(|&t| {
                let mut s = 0.0;
                for &(u, w) in &jumps {
                    s += w * kernel.convolve(h, kernel, h2, t - u);
                }
                s
            })
            .collect()
    };
    let pilot = single(hs[0]);
    let sup = pilot.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let n = sample.n() as f64;
    let v: Vec<f64> = hs.iter().map(|h| kappa_prime * sup * kernel.l2_norm_sq / (n * h)).collect();
    let mut rows = Vec::new();
    for (i, &h) in hs.iter().enumerate() {
        let mut a = 0.0f64;
        for (j, &h2) in hs.iter().enumerate() {
            let dd = double(h, h2);
            let ss = single(h2);
            let sq: Vec<f64> = dd.iter().zip(&ss).map(|(p, q)| (p - q) * (p - q)).collect();
            a = a.max(trapezoid(eval_grid, &sq) - v[j]);
        }
        rows.push((h, a, v[i]));
    }
    let mut best = 0;
    for k in 1..rows.len() {
        if rows[k].1 + rows[k].2 < rows[best].1 + rows[best].2 {
            best = k;
        }
    }
    BruteGl { selected: rows[best].0, rows }
}
