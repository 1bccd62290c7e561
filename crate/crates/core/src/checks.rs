//! Property suites behind the `check` subcommand. Each returns a pass/fail
//! result with a one-line summary instead of panicking.

use std::collections::HashMap;
use std::fmt;

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{ExperimentConfig, PlateAngles};
use crate::coupling::{PlateStack, apply, build_channel};
use crate::dephasing::{DephasingChannel, a_crit_fit, a_crit_numeric, blp_condition};
use crate::error::Result;
use crate::experiment::{RunOptions, run_sweep};
use crate::linalg::C64;
use crate::probing::{default_alpha_grid, raw_bounds_at};
use crate::qubit::{QubitState, alpha_fidelity, trace_distance};
use crate::spectra::{
    GaussianComponent, GaussianMixtureSpectrum, TwoPeakFamily, decoherence_function, decoherence_function_quadrature,
    spectral_alpha_fidelity, spectral_trace_distance, two_peak_coherence,
};
use crate::tomography::{TomographyRecord, reconstruct, Basis, BasisCounts, CountData, outcome_probability};

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {}: {}", self.name, self.detail)
    }
}

/// The parameter sets `(λ₁, λ₂, A)` of the reference sweeps.
pub const REFERENCE_SETS: [(f64, f64, f64); 4] = [
    (810.0, 830.0, 0.5122),
    (810.0, 830.0, 0.6377),
    (810.0, 820.0, 0.6377),
    (810.0, 818.0, 0.7),
];

pub fn random_bloch_state<R: Rng + ?Sized>(rng: &mut R) -> QubitState {
    loop {
        let r = [
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ];
        if r.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
            return QubitState::from_bloch(r).expect("inside the unit ball");
        }
    }
}

/// Both generalized data-processing inequalities on `n` random
/// instances of probe states, two-peak spectra, plate stacks and α.
pub fn gdpi_fuzz(n: usize, seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (sigma, mu) = (5.8e11, 3.68e14);
    let mut worst_fid = f64::NEG_INFINITY;
    let mut worst_td = f64::NEG_INFINITY;
    for _ in 0..n {
        let eta = rng.random_range(0.0..8.0);
        let first = GaussianComponent::new(mu, sigma)?;
        let second = GaussianComponent::new(mu + eta * sigma, sigma * rng.random_range(0.7..1.3))?;
        let xi1 = GaussianMixtureSpectrum::two_peak(rng.random_range(0.0..1.0), first, second)?;
        let xi2 = GaussianMixtureSpectrum::two_peak(rng.random_range(0.0..1.0), first, second)?;
        let (rho1, rho2) = (random_bloch_state(&mut rng), random_bloch_state(&mut rng));
        let plates = rng.random_range(1..5);
        let stack = if rng.random_range(0.0..1.0) < 0.25 {
            PlateStack::aligned(rng.random_range(0.5..25.0), plates, 0.0089)?
        } else {
            PlateStack::random(rng.random_range(0.5..25.0), plates, 0.0089, &mut rng)?
        };
        let out1 = apply(&build_channel(&stack, &xi1)?, &rho1)?;
        let out2 = apply(&build_channel(&stack, &xi2)?, &rho2)?;
        let alpha = rng.random_range(0.5..1.0);
        let lhs = alpha_fidelity(&rho1, &rho2, alpha)? * spectral_alpha_fidelity(&xi1, &xi2, alpha)?;
        worst_fid = worst_fid.max(lhs - alpha_fidelity(&out1, &out2, alpha)?);
        let bound = trace_distance(&rho1, &rho2) + spectral_trace_distance(&xi1, &xi2)?;
        worst_td = worst_td.max(trace_distance(&out1, &out2) - bound);
    }
    Ok(CheckResult {
        name: "gdpi_fuzz",
        passed: worst_fid <= 1e-9 && worst_td <= 1e-9,
        detail: format!("{n} instances; max violation fidelity {worst_fid:.3e}, trace {worst_td:.3e}"),
    })
}

/// Noiseless sweeps over the reference parameter sets, aligned and random
/// stacks: `lower ≤ A ≤ upper` on both routes at every thickness.
pub fn soundness_sandwich(thicknesses: &[f64]) -> Result<CheckResult> {
    let mut worst = f64::NEG_INFINITY;
    let mut rows = 0;
    for (l1, l2, a) in REFERENCE_SETS {
        for angles in [PlateAngles::Aligned, PlateAngles::Random] {
            let cfg = ExperimentConfig {
                lambda1_nm: l1,
                lambda2_nm: l2,
                a_true: a,
                thicknesses_mm: thicknesses.to_vec(),
                plate_angles: angles,
                plates_per_stack: if angles == PlateAngles::Aligned { 1 } else { 3 },
                shots: None,
                ..ExperimentConfig::default()
            };
            let report = run_sweep(&cfg, RunOptions { noiseless: true, ..RunOptions::default() })?;
            for r in &report.rows {
                rows += 1;
                for v in [r.lower_fid - a, a - r.upper_fid, r.lower_td - a, a - r.upper_td] {
                    worst = worst.max(if v.is_nan() { f64::INFINITY } else { v });
                }
            }
        }
    }
    Ok(CheckResult {
        name: "soundness_sandwich",
        passed: worst <= 1e-9,
        detail: format!("{rows} rows; max violation {worst:.3e}"),
    })
}

/// Coherences of `ξ₁`, `ξ₂`, `ξ₃` under an aligned stack relative to the
/// first peak's carrier phase.
fn aligned_probes(a: f64, delta_eta: f64, tau: f64) -> Result<[QubitState; 3]> {
    let k = |w: f64| (C64::from(w) + C64::from_polar(1.0 - w, delta_eta * tau)) * (-0.5 * tau * tau).exp();
    Ok([
        QubitState::dephased_plus(k(a))?,
        QubitState::dephased_plus(k(1.0))?,
        QubitState::dephased_plus(k(0.0))?,
    ])
}

/// Aligned stacks never certify global Markovianity: on `n` sampled
/// `(A, Δη, τ)` points every bound pair satisfies `upper ≥ a_crit` and
/// `lower ≤ 1 − a_crit`, and `1 − D(Φ₁ρ, Φ₂ρ) ≥ a_crit`.
pub fn markovian_impossibility(n: usize, seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let etas: Vec<f64> = (1..=40).map(|k| 0.5 * k as f64).collect();
    let mut cache: HashMap<usize, Option<f64>> = HashMap::new();
    let plus = QubitState::plus();
    let rho = [plus.clone(), plus.clone(), plus];
    let grid = default_alpha_grid();
    let mut worst = f64::NEG_INFINITY;
    let mut checked = 0;
    for _ in 0..n {
        let idx = rng.random_range(0..etas.len());
        let eta = etas[idx];
        let a = rng.random_range(0.0..1.0);
        let tau = rng.random_range(0.001..5.0);
        let ac = match cache.get(&idx) {
            Some(v) => *v,
            None => {
                let v = a_crit_numeric(eta, 50.0)?;
                cache.insert(idx, v);
                v
            }
        };
        let Some(ac) = ac else { continue };
        let phi = aligned_probes(a, eta, tau)?;
        for &alpha in &grid {
            let v = raw_bounds_at(&phi, &rho, alpha, alpha)?;
            worst = worst.max(ac - v[1]).max(v[0] - (1.0 - ac));
            worst = worst.max(ac - v[3]).max(v[2] - (1.0 - ac));
        }
        worst = worst.max(ac - (1.0 - trace_distance(&phi[0], &phi[1])));
        checked += 1;
    }
    Ok(CheckResult {
        name: "markovian_impossibility",
        passed: worst <= 1e-9 && checked > 0,
        detail: format!("{checked} points; max violation {worst:.3e}"),
    })
}

/// The BLP classifier against the sign of a central finite difference of
/// `|κ(τ)|`, ignoring points whose derivative is within `1e-6` of zero.
pub fn blp_vs_finite_difference(delta_etas: &[f64], grid: usize) -> Result<CheckResult> {
    let h = 1e-6;
    let (mut checked, mut mismatches) = (0usize, 0usize);
    for &eta in delta_etas {
        for i in 1..grid {
            let a = i as f64 / grid as f64;
            for j in 1..=grid {
                let tau = 5.0 * j as f64 / grid as f64;
                let d = (two_peak_coherence(a, eta, tau + h) - two_peak_coherence(a, eta, tau - h)) / (2.0 * h);
                if d.abs() < 1e-6 {
                    continue;
                }
                checked += 1;
                if blp_condition(a, eta, tau)? != (d > 0.0) {
                    mismatches += 1;
                }
            }
        }
    }
    Ok(CheckResult {
        name: "blp_vs_finite_difference",
        passed: mismatches == 0 && checked > 0,
        detail: format!("{checked} points; {mismatches} mismatches"),
    })
}

/// Largest deviations `(κ relative, channel entrywise, tomography
/// entrywise)` of closed-form κ vs quadrature, aligned stack vs dephasing
/// channel, and an exact-count tomography round trip.
pub fn cross_check_errors() -> Result<(f64, f64, f64)> {
    let mut kappa_rel = 0.0f64;
    let mut channel = 0.0f64;
    let mut tomo = 0.0f64;
    let delta_n = 0.0089;
    for (l1, l2, a) in REFERENCE_SETS {
        let fam = TwoPeakFamily::from_wavelengths(a, l1, l2, 3.0)?;
        for mm in [1.0, 4.0, 8.0, 14.0] {
            let tp = 2.0 * std::f64::consts::PI * delta_n * mm * 1e-3 / crate::spectra::SPEED_OF_LIGHT;
            for s in [fam.xi1(), fam.xi2(), fam.xi3()] {
                let closed = decoherence_function(&s, tp);
                let quad = decoherence_function_quadrature(&s, tp)?;
                kappa_rel = kappa_rel.max((closed - quad).norm() / closed.norm().max(1e-300));
                let stack = PlateStack::aligned(mm, 1, delta_n)?;
                let rho = QubitState::from_bloch([0.6, -0.3, 0.5])?;
                let a_out = apply(&build_channel(&stack, &s)?, &rho)?;
                let b_out = DephasingChannel::from_spectrum(&s, delta_n, mm * 1e-3 / crate::spectra::SPEED_OF_LIGHT)?.apply(&rho)?;
                channel = channel.max((*a_out.matrix() - *b_out.matrix()).max_abs());
                let exact = TomographyRecord::exact(a_out.clone());
                let counts = CountData {
                    rows: Basis::ALL
                        .iter()
                        .map(|&b| {
                            // dyadic probabilities survive integer counts exactly
                            let p = outcome_probability(&exact.state, b);
                            let shots = 1u64 << 52;
                            let plus = (p * shots as f64).round() as u64;
                            BasisCounts { basis: b, plus, minus: shots - plus, shots }
                        })
                        .collect(),
                };
                let back = reconstruct(&counts);
                tomo = tomo.max((*back.matrix() - *a_out.matrix()).max_abs());
            }
        }
    }
    Ok((kappa_rel, channel, tomo))
}

pub fn numeric_cross_checks() -> Result<CheckResult> {
    let (kappa_rel, channel, tomo) = cross_check_errors()?;
    Ok(CheckResult {
        name: "numeric_cross_checks",
        passed: kappa_rel <= 1e-8 && channel <= 1e-8 && tomo <= 1e-12,
        detail: format!("kappa rel {kappa_rel:.2e}; channel {channel:.2e}; tomography {tomo:.2e}"),
    })
}

/// Fitted A_crit against the numeric solver for even Δη in `[2, 20]`.
pub fn acrit_fit_agreement() -> Result<CheckResult> {
    let mut worst = 0.0f64;
    for k in 1..=10 {
        let eta = 2.0 * k as f64;
        let n = a_crit_numeric(eta, 50.0)?.unwrap_or(f64::NAN);
        worst = worst.max((n - a_crit_fit(eta)).abs());
    }
    Ok(CheckResult {
        name: "acrit_fit_agreement",
        passed: worst <= 0.01,
        detail: format!("max |numeric - fit| = {worst:.4}"),
    })
}

/// Every suite with CLI-sized parameters.
pub fn run_all(seed: u64) -> Result<Vec<CheckResult>> {
    let thicknesses: Vec<f64> = (2..=14).map(f64::from).collect();
    Ok(vec![
        acrit_fit_agreement()?,
        gdpi_fuzz(1000, seed)?,
        soundness_sandwich(&thicknesses)?,
        markovian_impossibility(10_000, seed)?,
        blp_vs_finite_difference(&[4.0, 10.0, 16.0], 100)?,
        numeric_cross_checks()?,
    ])
}
