//! Adaptive Gauss–Kronrod (7/15) quadrature and the composite trapezoid rule.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One G7/K15 panel: (Kronrod estimate, |Kronrod − Gauss|).
fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for k in 0..7 {
        let dx = half * XGK[k];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[k] * s;
        if k % 2 == 1 {
            gauss += WG[k / 2] * s;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Integrates `f` over `[a, b]`, bisecting panels until the Gauss and Kronrod
/// estimates agree to `rel_tol` (relative to the running total) or `abs_tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if a > b {
        return -integrate(f, b, a, rel_tol, abs_tol);
    }
    refine(&f, a, b, rel_tol, abs_tol, 0)
}

fn refine<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64, abs_tol: f64, depth: u32) -> f64 {
    let (value, err) = panel(f, a, b);
    if err <= abs_tol.max(rel_tol * value.abs()) || depth >= 40 || (b - a) <= f64::EPSILON * a.abs().max(b.abs()) {
        return value;
    }
    let m = 0.5 * (a + b);
    refine(f, a, m, rel_tol, 0.5 * abs_tol, depth + 1) + refine(f, m, b, rel_tol, 0.5 * abs_tol, depth + 1)
}

/// Integrates `f` piecewise over the sorted breakpoints in `[a, b]`.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], rel_tol: f64, abs_tol: f64) -> f64 {
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|x| *x > a && *x < b).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut total = 0.0;
    let mut lo = a;
    for c in cuts.into_iter().chain(std::iter::once(b)) {
        total += integrate(&f, lo, c, rel_tol, abs_tol);
        lo = c;
    }
    total
}

/// Composite trapezoid rule for samples `y` at strictly increasing `x`.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.windows(2).zip(y.windows(2)).map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1])).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let v = integrate(|x| x.powi(4) - 3.0 * x * x + 1.0, -1.0, 2.0, 1e-12, 0.0);
        let exact = (32.0 + 1.0) / 5.0 - (8.0 + 1.0) + 3.0;
        assert!((v - exact).abs() < 1e-13);
    }

    #[test]
    fn adapts_to_kinks() {
        let v = integrate(|x: f64| x.abs().sqrt(), -1.0, 1.0, 1e-10, 1e-14);
        assert!((v - 4.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn pieces_split_at_breaks() {
        let v = integrate_pieces(|x: f64| (1.0 - x.abs()).max(0.0), -1.0, 1.0, &[0.0], 1e-12, 0.0);
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn trapezoid_linear_is_exact() {
        let x: Vec<f64> = (0..11).map(|k| k as f64 / 10.0).collect();
        let y: Vec<f64> = x.iter().map(|t| 2.0 * t + 1.0).collect();
        assert!((trapezoid(&x, &y) - 2.0).abs() < 1e-14);
    }
}
