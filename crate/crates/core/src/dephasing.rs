//! Pure dephasing of the polarization qubit by aligned birefringent plates,
//! and the trace-distance (BLP) non-Markovianity analysis of the two-peak
//! spectrum family.
//!
//! Everything is expressed in rescaled time `τ = 2πσΔn·t` and peak
//! separation `Δη = Δμ/σ`. With `h(A) = A(1−A)`, `|κ|` increases at `τ`
//! iff `h(A)·θ(τ) > τ` and `θ(τ) > 0`, where
//! `θ(τ) = 2τ(1 − cos Δητ) − Δη sin Δητ`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, check_range};
use crate::linalg::{C64, Mat2};
use crate::optimize::minimize_scan;
use crate::qubit::QubitState;
use crate::spectra::{GaussianMixtureSpectrum, decoherence_function};

pub const DEFAULT_TAU_MAX: f64 = 50.0;

/// Three-way outcome used both for snapshot verdicts and per-time labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    NonMarkovianVerified,
    MarkovianVerified,
    Inconclusive,
}

impl Decision {
    pub fn as_str(&self) -> &'static str {
        match self {
            Decision::NonMarkovianVerified => "NonMarkovianVerified",
            Decision::MarkovianVerified => "MarkovianVerified",
            Decision::Inconclusive => "Inconclusive",
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Decision {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "NonMarkovianVerified" => Ok(Decision::NonMarkovianVerified),
            "MarkovianVerified" => Ok(Decision::MarkovianVerified),
            "Inconclusive" => Ok(Decision::Inconclusive),
            other => Err(Error::Config(format!("unknown decision label {other:?}"))),
        }
    }
}

/// Dephasing channel at one instant: coherences are scaled by `κ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DephasingChannel {
    pub kappa: C64,
    /// Rescaled time `2πσΔn·t`.
    pub tau: f64,
}

impl DephasingChannel {
    pub fn new(kappa: C64, tau: f64) -> Result<Self> {
        check_range("|kappa|", kappa.norm(), kappa.norm() <= 1.0 + 1e-12, "[0, 1]")?;
        Ok(DephasingChannel { kappa, tau })
    }

    /// Channel induced by `spectrum` after time `t` (s) in a medium with
    /// birefringence `delta_n`. `tau` uses the first component's width.
    pub fn from_spectrum(spectrum: &GaussianMixtureSpectrum, delta_n: f64, t: f64) -> Result<Self> {
        let phase_rate = 2.0 * PI * delta_n * t;
        let sigma = spectrum.components()[0].sigma;
        Self::new(decoherence_function(spectrum, phase_rate), sigma * phase_rate)
    }

    pub fn apply(&self, rho: &QubitState) -> Result<QubitState> {
        apply_channel(self, rho)
    }
}

/// `[[ρ_HH, κρ_HV], [κ*ρ_VH, ρ_VV]]`.
pub fn apply_channel(ch: &DephasingChannel, rho: &QubitState) -> Result<QubitState> {
    let m = rho.matrix();
    QubitState::new(Mat2::new(
        m.get(0, 0),
        ch.kappa * m.get(0, 1),
        ch.kappa.conj() * m.get(1, 0),
        m.get(1, 1),
    ))
}

/// `θ(τ) = 2τ(1 − cos Δητ) − Δη sin Δητ`.
pub fn theta(delta_eta: f64, tau: f64) -> f64 {
    let x = delta_eta * tau;
    2.0 * tau * (1.0 - x.cos()) - delta_eta * x.sin()
}

/// Threshold `g(τ) = τ/θ(τ)` on `h(A)`; `+∞` where `θ ≤ 0`.
pub fn threshold(delta_eta: f64, tau: f64) -> f64 {
    let th = theta(delta_eta, tau);
    if th > 0.0 && tau > 0.0 { tau / th } else { f64::INFINITY }
}

fn h_inverse(g: f64) -> Option<(f64, f64)> {
    if g > 0.25 {
        return None;
    }
    let root = (1.0 - 4.0 * g).max(0.0).sqrt();
    Some(((1.0 - root) / 2.0, (1.0 + root) / 2.0))
}

/// True iff `|κ|` is increasing at `τ` for amplitude `a`.
pub fn blp_condition(a: f64, delta_eta: f64, tau: f64) -> Result<bool> {
    check_range("A", a, (0.0..=1.0).contains(&a), "[0, 1]")?;
    check_range("delta_eta", delta_eta, delta_eta >= 0.0, "[0, ∞)")?;
    check_range("tau", tau, tau > 0.0, "(0, ∞)")?;
    let th = theta(delta_eta, tau);
    Ok(th > 0.0 && a * (1.0 - a) * th > tau)
}

/// Non-Markovian band `[A₋(τ), A₊(τ)]` at one instant; `None` where no
/// amplitude gives a revival.
pub fn critical_band(delta_eta: f64, tau: f64) -> Option<(f64, f64)> {
    h_inverse(threshold(delta_eta, tau))
}

/// Critical amplitude from the BLP condition: the dynamics is
/// non-Markovian iff `A ∈ [A_crit, 1 − A_crit]`. `None` if no amplitude
/// produces a revival for `τ ∈ (0, tau_max]`.
pub fn a_crit_numeric(delta_eta: f64, tau_max: f64) -> Result<Option<f64>> {
    check_range("delta_eta", delta_eta, delta_eta >= 0.0, "[0, ∞)")?;
    check_range("tau_max", tau_max, tau_max > 0.0, "(0, ∞)")?;
    if delta_eta == 0.0 {
        return Ok(None);
    }
    let step = 0.01f64.min(PI / (50.0 * delta_eta.max(1.0)));
    let best = minimize_scan(|t| threshold(delta_eta, t), 0.0, tau_max, step)?;
    Ok(best.and_then(|(_, g)| h_inverse(g)).map(|(lo, _)| lo))
}

/// Fitted closed-form approximation of [`a_crit_numeric`]:
/// `0.0885553·e^{−0.0870419Δη²} + 0.411445/(0.0845395Δη² + 1)`.
pub fn a_crit_fit(delta_eta: f64) -> f64 {
    let e2 = delta_eta * delta_eta;
    0.0885553 * (-0.0870419 * e2).exp() + 0.411445 / (0.0845395 * e2 + 1.0)
}

/// Time-resolved non-Markovian region for one `Δη`.
#[derive(Clone, Debug, Serialize)]
pub struct NonMarkovianityRegion {
    pub delta_eta: f64,
    pub a_crit: Option<f64>,
    pub taus: Vec<f64>,
    /// `[A₋(τ), A₊(τ)]` per grid point, `None` in Markovian-for-all-A gaps.
    pub bands: Vec<Option<(f64, f64)>>,
}

impl NonMarkovianityRegion {
    pub fn compute(delta_eta: f64, tau_grid: &[f64], tau_max: f64) -> Result<Self> {
        Ok(NonMarkovianityRegion {
            delta_eta,
            a_crit: a_crit_numeric(delta_eta, tau_max)?,
            taus: tau_grid.to_vec(),
            bands: tau_grid.iter().map(|&t| critical_band(delta_eta, t)).collect(),
        })
    }
}

/// Labels each `τ` given bounds `[a_lo, a_hi]` on the amplitude.
pub fn classify_intervals(delta_eta: f64, a_bounds: (f64, f64), tau_grid: &[f64]) -> Result<Vec<Decision>> {
    let (lo, hi) = a_bounds;
    check_range("A_lo", lo, (0.0..=1.0).contains(&lo), "[0, 1]")?;
    check_range("A_hi", hi, (lo..=1.0).contains(&hi), "[A_lo, 1]")?;
    check_range("delta_eta", delta_eta, delta_eta >= 0.0, "[0, ∞)")?;
    Ok(tau_grid
        .iter()
        .map(|&tau| classify_instant(critical_band(delta_eta, tau), lo, hi))
        .collect())
}

fn classify_instant(band: Option<(f64, f64)>, lo: f64, hi: f64) -> Decision {
    match band {
        None => Decision::MarkovianVerified,
        Some((a_minus, a_plus)) => {
            if hi < a_minus || lo > a_plus {
                Decision::MarkovianVerified
            } else if lo >= a_minus && hi <= a_plus {
                Decision::NonMarkovianVerified
            } else {
                Decision::Inconclusive
            }
        }
    }
}

/// A maximal run of grid points sharing one label.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LabeledInterval {
    pub start: f64,
    pub end: f64,
    pub label: Decision,
}

pub fn merge_intervals(taus: &[f64], labels: &[Decision]) -> Vec<LabeledInterval> {
    let mut out: Vec<LabeledInterval> = Vec::new();
    for (&tau, &label) in taus.iter().zip(labels) {
        match out.last_mut() {
            Some(last) if last.label == label => last.end = tau,
            _ => out.push(LabeledInterval {
                start: tau,
                end: tau,
                label,
            }),
        }
    }
    out
}

/// Uniform grid `lo, lo+step, …` not exceeding `hi`.
pub fn tau_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).floor() as usize;
    (0..=n).map(|i| lo + step * i as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::two_peak_coherence;
    use approx::assert_abs_diff_eq;

    #[test]
    fn apply_channel_examples() {
        let rho = QubitState::from_bloch([0.3, -0.2, 0.4]).unwrap();
        let id = DephasingChannel::new(C64::from(1.0), 0.0).unwrap();
        assert_eq!(apply_channel(&id, &rho).unwrap(), rho);

        let ch = DephasingChannel::new(C64::from(0.4), 1.0).unwrap();
        let out = apply_channel(&ch, &QubitState::plus()).unwrap();
        assert_abs_diff_eq!(out.entry(0, 1).re, 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(out.entry(1, 0).re, 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(out.entry(0, 0).re, 0.5, epsilon = 1e-15);

        let diag = QubitState::from_bloch([0.0, 0.0, 0.6]).unwrap();
        let ch = DephasingChannel::new(C64::from_polar(0.3, 1.1), 1.0).unwrap();
        assert_eq!(apply_channel(&ch, &diag).unwrap(), diag);
        assert!(DephasingChannel::new(C64::from(1.1), 0.0).is_err());
    }

    #[test]
    fn channel_preserves_trace_and_hermiticity() {
        let rho = QubitState::from_bloch([0.5, 0.5, 0.1]).unwrap();
        let ch = DephasingChannel::new(C64::from_polar(0.77, -2.0), 1.0).unwrap();
        let out = apply_channel(&ch, &rho).unwrap();
        assert_eq!(out.matrix().trace().re, 1.0);
        assert_eq!(out.matrix().hermiticity_error(), 0.0);
        assert!(out.eigenvalues()[1] >= -1e-12);
    }

    #[test]
    fn blp_trivial_cases() {
        for i in 1..100 {
            let tau = 0.1 * i as f64;
            for &a in &[0.0, 0.2, 0.5, 0.9, 1.0] {
                assert!(!blp_condition(a, 0.0, tau).unwrap());
            }
            for &eta in &[1.0, 6.0, 20.0] {
                assert!(!blp_condition(0.0, eta, tau).unwrap());
                assert!(!blp_condition(1.0, eta, tau).unwrap());
            }
        }
        assert!(blp_condition(1.2, 1.0, 1.0).is_err());
        assert!(blp_condition(0.5, -1.0, 1.0).is_err());
        assert!(blp_condition(0.5, 1.0, 0.0).is_err());
    }

    #[test]
    fn blp_symmetric_in_amplitude() {
        for i in 0..=50 {
            let a = i as f64 / 50.0;
            for j in 1..200 {
                let tau = 0.02 * j as f64;
                assert_eq!(
                    blp_condition(a, 7.5, tau).unwrap(),
                    blp_condition(1.0 - a, 7.5, tau).unwrap()
                );
            }
        }
    }

    #[test]
    fn blp_agrees_with_finite_difference() {
        let eta = 10.0;
        let dt = 1e-6;
        let mut checked = 0;
        for i in 0..200 {
            let a = (i as f64 + 0.5) / 200.0;
            for j in 0..200 {
                let tau = 0.005 + 3.0 * j as f64 / 200.0;
                let d = (two_peak_coherence(a, eta, tau + dt) - two_peak_coherence(a, eta, tau - dt))
                    / (2.0 * dt);
                if d.abs() < 1e-6 {
                    continue;
                }
                assert_eq!(blp_condition(a, eta, tau).unwrap(), d > 0.0, "A={a} τ={tau} d={d}");
                checked += 1;
            }
        }
        assert!(checked > 39_000);
    }

    #[test]
    fn theta_matches_dimensional_form() {
        // θ_dim(Δn t, σ, Δμ) = 4πΔnt σ²(1 − cos 2πΔntΔμ) − Δμ sin 2πΔntΔμ
        // and h > 2πΔntσ²/θ_dim must coincide with the rescaled threshold
        let sigma = 5.8e11;
        let delta_mu = 7.3 * sigma;
        for i in 1..200 {
            let dnt = 1e-14 * i as f64;
            let x = 2.0 * PI * dnt * delta_mu;
            let theta_dim = 4.0 * PI * dnt * sigma * sigma * (1.0 - x.cos()) - delta_mu * x.sin();
            let tau = 2.0 * PI * sigma * dnt;
            let scale = 4.0 * PI * dnt * sigma * sigma + delta_mu;
            assert_abs_diff_eq!(theta_dim / scale, sigma * theta(7.3, tau) / scale, epsilon = 1e-12);
            if theta_dim > 0.0 {
                let g_dim = 2.0 * PI * dnt * sigma * sigma / theta_dim;
                assert_abs_diff_eq!(g_dim, threshold(7.3, tau), epsilon = 1e-9 * g_dim);
            }
        }
    }

    #[test]
    fn a_crit_examples() {
        assert_eq!(a_crit_numeric(0.0, DEFAULT_TAU_MAX).unwrap(), None);
        let fit = 0.0885553 * (-8.70419f64).exp() + 0.411445 / (1.0 + 8.45395);
        assert_abs_diff_eq!(a_crit_fit(10.0), fit, epsilon = 1e-15);
        let numeric = a_crit_numeric(10.0, DEFAULT_TAU_MAX).unwrap().unwrap();
        assert_abs_diff_eq!(numeric, fit, epsilon = 0.01);
        assert_abs_diff_eq!(a_crit_fit(0.0), 0.5000003, epsilon = 1e-12);
        assert!(a_crit_fit(100.0) < 1e-3);
        let n = a_crit_numeric(16.3, DEFAULT_TAU_MAX).unwrap().unwrap();
        assert_abs_diff_eq!(n, a_crit_fit(16.3), epsilon = 0.01);
    }

    /// Independent oracle: bisection on A with a dense-grid test for any
    /// increase of the closed-form |κ(τ)|.
    fn a_crit_bruteforce(eta: f64) -> f64 {
        let taus: Vec<f64> = (0..=300_000).map(|i| i as f64 * 1e-5).collect();
        let revives = |a: f64| {
            let mut prev = two_peak_coherence(a, eta, taus[0]);
            for &t in &taus[1..] {
                let cur = two_peak_coherence(a, eta, t);
                if cur > prev {
                    return true;
                }
                prev = cur;
            }
            false
        };
        let (mut lo, mut hi) = (0.0, 0.5);
        for _ in 0..25 {
            let mid = 0.5 * (lo + hi);
            if revives(mid) { hi = mid } else { lo = mid }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn a_crit_matches_bruteforce_scan() {
        // frozen from a_crit_bruteforce: Δη=4 → 0.19600, 8 → 0.06494, 16 → 0.01752
        for (eta, frozen) in [(4.0, 0.19600), (8.0, 0.06494), (16.0, 0.01752)] {
            let brute = a_crit_bruteforce(eta);
            assert_abs_diff_eq!(brute, frozen, epsilon = 1e-4);
            let got = a_crit_numeric(eta, DEFAULT_TAU_MAX).unwrap().unwrap();
            assert_abs_diff_eq!(got, brute, epsilon = 1e-4);
        }
    }

    #[test]
    fn a_crit_non_increasing() {
        let mut last = 0.5;
        for i in 1..=80 {
            let eta = 0.25 * i as f64;
            let a = a_crit_numeric(eta, DEFAULT_TAU_MAX).unwrap().unwrap();
            assert!(a <= last + 1e-12, "Δη={eta}: {a} > {last}");
            assert!((0.0..=0.5).contains(&a));
            last = a;
        }
    }

    #[test]
    fn dichotomy_around_a_crit() {
        let taus = tau_grid(1e-3, 10.0, 1e-3);
        for &eta in &[3.0, 6.28, 12.0] {
            let ac = a_crit_numeric(eta, DEFAULT_TAU_MAX).unwrap().unwrap();
            for i in 0..=100 {
                let a = i as f64 / 100.0;
                let any = taus.iter().any(|&t| blp_condition(a, eta, t).unwrap());
                if a > ac + 1e-3 && a < 1.0 - ac - 1e-3 {
                    assert!(any, "Δη={eta} A={a} should revive");
                } else if a < ac - 1e-3 || a > 1.0 - ac + 1e-3 {
                    assert!(!any, "Δη={eta} A={a} should not revive");
                }
            }
        }
    }

    #[test]
    fn classification_examples() {
        let eta = 6.28;
        let taus = tau_grid(0.001, 5.0, 0.001);
        let labels = classify_intervals(eta, (0.0, 1.0), &taus).unwrap();
        assert!(!labels.contains(&Decision::NonMarkovianVerified));
        // white region at small τ: Markovian for any bounds
        let labels = classify_intervals(eta, (0.5, 0.5), &[0.05]).unwrap();
        assert_eq!(labels, vec![Decision::MarkovianVerified]);
        let labels = classify_intervals(0.0, (0.4, 0.6), &taus).unwrap();
        assert!(labels.iter().all(|l| *l == Decision::MarkovianVerified));
        assert!(classify_intervals(eta, (0.7, 0.6), &taus).is_err());
    }

    #[test]
    fn merging_runs() {
        use Decision::*;
        let taus = [0.0, 0.1, 0.2, 0.3, 0.4];
        let labels = [MarkovianVerified, MarkovianVerified, Inconclusive, Inconclusive, MarkovianVerified];
        let merged = merge_intervals(&taus, &labels);
        assert_eq!(merged.len(), 3);
        assert_eq!((merged[1].start, merged[1].end, merged[1].label), (0.2, 0.3, Inconclusive));
    }
}
