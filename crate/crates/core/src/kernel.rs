//! Compactly supported smoothing kernels and their analytic constants.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error};
use crate::quadrature::integrate_pieces;

/// Relative tolerance for kernel–kernel convolutions.
pub const CONVOLUTION_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    /// `(3/4)(1 − u²)` on `[−1, 1]`.
    Epanechnikov,
    /// `(15/16)(1 − u²)²` on `[−1, 1]`.
    Biweight,
    /// `1 − |u|` on `[−1, 1]`.
    Triangular,
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelKind::Epanechnikov => "epanechnikov",
            KernelKind::Biweight => "biweight",
            KernelKind::Triangular => "triangular",
        })
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "epanechnikov" => Ok(KernelKind::Epanechnikov),
            "biweight" | "quartic" => Ok(KernelKind::Biweight),
            "triangular" => Ok(KernelKind::Triangular),
            other => Err(invalid("kernel", format!("unknown kernel `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelMoments {
    pub mass: f64,
    pub first: f64,
    pub l2_norm_sq: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub support_radius: f64,
    pub l1_norm: f64,
    pub l2_norm_sq: f64,
    pub sup_norm: f64,
}

pub fn epanechnikov() -> KernelSpec {
    KernelSpec::new(KernelKind::Epanechnikov)
}

impl KernelSpec {
    pub fn new(kind: KernelKind) -> Self {
        let (l2_norm_sq, sup_norm) = match kind {
            KernelKind::Epanechnikov => (0.6, 0.75),
            KernelKind::Biweight => (5.0 / 7.0, 15.0 / 16.0),
            KernelKind::Triangular => (2.0 / 3.0, 1.0),
        };
        let spec = Self { kind, support_radius: 1.0, l1_norm: 1.0, l2_norm_sq, sup_norm };
        debug_assert!({
            let m = spec.moments();
            (m.mass - 1.0).abs() < 1e-10 && m.first.abs() < 1e-10 && (m.l2_norm_sq - l2_norm_sq).abs() < 1e-10
        });
        spec
    }

    /// `∫K`, `∫xK` and `∫K²` by adaptive quadrature.
    pub fn moments(&self) -> KernelMoments {
        let r = self.support_radius;
        let mut breaks = self.knots().to_vec();
        breaks.push(0.0);
        let q = |f: &dyn Fn(f64) -> f64| integrate_pieces(f, -r, r, &breaks, 1e-13, 1e-16);
        KernelMoments {
            mass: q(&|u| self.evaluate(u)),
            first: q(&|u| u * self.evaluate(u)),
            l2_norm_sq: q(&|u| self.evaluate(u).powi(2)),
        }
    }

    #[inline]
    pub fn evaluate(&self, u: f64) -> f64 {
        if u.abs() > 1.0 {
            return 0.0;
        }
        match self.kind {
            KernelKind::Epanechnikov => 0.75 * (1.0 - u * u),
            KernelKind::Biweight => {
                let v = 1.0 - u * u;
                0.9375 * v * v
            }
            KernelKind::Triangular => 1.0 - u.abs(),
        }
    }

    /// `K_h(x) = K(x/h)/h`.
    #[inline]
    pub fn scaled(&self, h: f64, x: f64) -> f64 {
        self.evaluate(x / h) / h
    }

    /// Interior points in `[−1, 1]` where `K` is not smooth.
    pub fn knots(&self) -> &'static [f64] {
        match self.kind {
            KernelKind::Triangular => &[0.0],
            _ => &[],
        }
    }

    /// `(K_h ⋆ L_{h'})(x) = ∫ K_h(y) L_{h'}(x − y) dy`, by adaptive quadrature
    /// over the overlap of the two supports.
    pub fn convolve(&self, h: f64, other: &KernelSpec, h_prime: f64, x: f64) -> f64 {
        let lo = (-self.support_radius * h).max(x - other.support_radius * h_prime);
        let hi = (self.support_radius * h).min(x + other.support_radius * h_prime);
        if lo >= hi {
            return 0.0;
        }
        let mut breaks: Vec<f64> = self.knots().iter().map(|k| k * h).collect();
        breaks.extend(other.knots().iter().map(|k| x - k * h_prime));
        integrate_pieces(
            |y| self.scaled(h, y) * other.scaled(h_prime, x - y),
            lo,
            hi,
            &breaks,
            CONVOLUTION_REL_TOL,
            1e-15 / (h * h_prime),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    #[test]
    fn epanechnikov_values() {
        let k = epanechnikov();
        assert_eq!(k.evaluate(0.0), 0.75);
        assert_eq!(k.evaluate(1.0), 0.0);
        assert_eq!(k.evaluate(-1.0), 0.0);
        assert_eq!(k.evaluate(1.5), 0.0);
        assert_eq!(k.support_radius, 1.0);
        assert_eq!(k.sup_norm, 0.75);
    }

    #[test]
    fn builtin_constants_match_quadrature() {
        for kind in [KernelKind::Epanechnikov, KernelKind::Biweight, KernelKind::Triangular] {
            let k = KernelSpec::new(kind);
            let mass = integrate(|u| k.evaluate(u), -1.0, 0.0, 1e-13, 0.0) + integrate(|u| k.evaluate(u), 0.0, 1.0, 1e-13, 0.0);
            let first = integrate(|u| u * k.evaluate(u), -1.0, 0.0, 1e-13, 0.0)
                + integrate(|u| u * k.evaluate(u), 0.0, 1.0, 1e-13, 0.0);
            let l2 = integrate(|u| k.evaluate(u).powi(2), -1.0, 0.0, 1e-13, 0.0)
                + integrate(|u| k.evaluate(u).powi(2), 0.0, 1.0, 1e-13, 0.0);
            assert!((mass - k.l1_norm).abs() < 1e-10, "{kind}");
            assert!(first.abs() < 1e-10, "{kind}");
            assert!((l2 - k.l2_norm_sq).abs() < 1e-10, "{kind}");
        }
    }

    #[test]
    fn self_convolution_at_zero_is_l2_norm() {
        for kind in [KernelKind::Epanechnikov, KernelKind::Biweight, KernelKind::Triangular] {
            let k = KernelSpec::new(kind);
            let v = k.convolve(0.5, &k, 0.5, 0.0);
            assert!((v - k.l2_norm_sq / 0.5).abs() < 1e-12, "{kind}: {v}");
        }
    }

    #[test]
    fn convolution_has_unit_mass_and_wider_support() {
        let k = epanechnikov();
        assert_eq!(k.convolve(0.25, &k, 0.5, 0.76), 0.0);
        let mass = integrate(|x| k.convolve(0.25, &k, 0.5, x), -0.75, 0.75, 1e-10, 0.0);
        assert!((mass - 1.0).abs() < 1e-8);
    }

    #[test]
    fn parses_names() {
        assert_eq!("Epanechnikov".parse::<KernelKind>().unwrap(), KernelKind::Epanechnikov);
        assert!("gaussian".parse::<KernelKind>().is_err());
    }
}
