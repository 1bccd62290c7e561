//! Gaussian quadrature helpers.
//!
//! Nodes and weights come from `gauss-quad`; this module adds composite
//! Gauss–Legendre panels with node doubling and normalized Gauss–Hermite
//! rules for Gaussian-weighted averages.

use std::num::NonZeroUsize;

use gauss_quad::{hermite::GaussHermite, legendre::GaussLegendre};

use crate::error::{Error, Result};

const PANEL_ORDER: usize = 16;
const MAX_PANELS: usize = 1 << 14;

/// Integrates `f` over `[a, b]` with composite Gauss–Legendre panels,
/// doubling the panel count until two successive estimates agree to
/// `rel_tol` relative (or `abs_floor` absolute).
pub fn integrate_adaptive<F>(a: f64, b: f64, rel_tol: f64, abs_floor: f64, f: F) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let rule = GaussLegendre::new(NonZeroUsize::new(PANEL_ORDER).unwrap());
    let composite = |panels: usize| -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|i| {
                let lo = a + h * i as f64;
                rule.integrate(lo, lo + h, &f)
            })
            .sum()
    };
    let mut panels = 8;
    let mut prev = composite(panels);
    while panels < MAX_PANELS {
        panels *= 2;
        let next = composite(panels);
        let diff = (next - prev).abs();
        if diff <= rel_tol * next.abs() || diff <= abs_floor {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::NonConvergence(format!(
        "Gauss-Legendre on [{a:e}, {b:e}] with {panels} panels: last estimate {prev:e}"
    )))
}

/// Gauss–Hermite rule rescaled to average over a standard normal variable:
/// `E[f(Z)] ≈ Σ wⱼ f(zⱼ)` with `Σ wⱼ = 1`.
#[derive(Clone, Debug)]
pub struct NormalRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl NormalRule {
    pub fn new(order: usize) -> Result<Self> {
        let order = NonZeroUsize::new(order)
            .ok_or_else(|| Error::NonConvergence("Gauss-Hermite order must be positive".into()))?;
        let rule = GaussHermite::new(order);
        let sqrt2 = std::f64::consts::SQRT_2;
        let (nodes, mut weights): (Vec<f64>, Vec<f64>) =
            rule.iter().map(|(x, w)| (x * sqrt2, *w)).unzip();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(NormalRule { nodes, weights })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn legendre_panels_integrate_gaussian() {
        let v = integrate_adaptive(-10.0, 10.0, 1e-12, 0.0, |x| {
            (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()
        })
        .unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn normal_rule_moments() {
        let rule = NormalRule::new(64).unwrap();
        let m = |k: i32| -> f64 {
            rule.nodes
                .iter()
                .zip(&rule.weights)
                .map(|(z, w)| w * z.powi(k))
                .sum()
        };
        assert_abs_diff_eq!(m(0), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(m(2), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m(4), 3.0, epsilon = 1e-11);
        // characteristic function E[cos(tZ)] = e^{-t²/2}
        let t = 3.0;
        let c: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(z, w)| w * (t * z).cos())
            .sum();
        assert_abs_diff_eq!(c, (-t * t / 2.0).exp(), epsilon = 1e-13);
    }
}
