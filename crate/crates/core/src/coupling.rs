//! Frequency-resolved polarization dynamics in a stack of birefringent
//! plates.
//!
//! A plate leaves the photon frequency untouched, so the joint unitary is
//! block diagonal in `|ω⟩` and the reduced polarization channel is the
//! spectral average `Φ(ρ) = ∫ f(ω) U(ω) ρ U(ω)† dω`. The average is
//! discretized with Gauss–Hermite nodes per mixture component.

use std::f64::consts::PI;

use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{C64, Mat2};
use crate::quadrature::NormalRule;
use crate::qubit::QubitState;
use crate::spectra::{GaussianMixtureSpectrum, SPEED_OF_LIGHT};

pub const DEFAULT_NODES: usize = 64;
pub const MIN_NODES: usize = 16;
/// Quadrature error above which a channel build is flagged.
const ACCURACY_TOL: f64 = 1e-10;

/// One birefringent plate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plate {
    pub thickness_mm: f64,
    /// Fast-axis rotation (rad).
    pub angle: f64,
    pub delta_n: f64,
}

impl Plate {
    /// Zero thickness is accepted and acts as the identity.
    pub fn new(thickness_mm: f64, angle: f64, delta_n: f64) -> Result<Self> {
        if !(thickness_mm >= 0.0 && thickness_mm.is_finite()) {
            return Err(Error::Stack(format!("thickness must be non-negative, got {thickness_mm}")));
        }
        if delta_n == 0.0 || !delta_n.is_finite() {
            return Err(Error::Stack(format!("birefringence must be nonzero, got {delta_n}")));
        }
        if !angle.is_finite() {
            return Err(Error::Stack("angle must be finite".into()));
        }
        Ok(Plate {
            thickness_mm,
            angle,
            delta_n,
        })
    }

    /// Retardance rate: phase difference per unit frequency,
    /// `2πΔnL/c` (s).
    pub fn phase_rate(&self) -> f64 {
        2.0 * PI * self.delta_n * self.thickness_mm * 1e-3 / SPEED_OF_LIGHT
    }

    /// Jones matrix at frequency `omega` (Hz), global phase dropped:
    /// `R(θ)·diag(e^{iφ/2}, e^{−iφ/2})·R(−θ)` with `φ = 2πωΔnL/c`.
    pub fn jones(&self, omega: f64) -> Mat2 {
        let half = 0.5 * omega * self.phase_rate();
        let retarder = Mat2::diag(C64::from_polar(1.0, half), C64::from_polar(1.0, -half));
        if self.angle == 0.0 {
            retarder
        } else {
            Mat2::rotation(self.angle) * retarder * Mat2::rotation(-self.angle)
        }
    }
}

/// Ordered plates; light traverses `plates[0]` first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlateStack {
    pub plates: Vec<Plate>,
    /// Gauss–Hermite nodes per spectral component.
    pub nodes: usize,
}

impl PlateStack {
    pub fn new(plates: Vec<Plate>, nodes: usize) -> Result<Self> {
        if plates.is_empty() {
            return Err(Error::Stack("stack must contain at least one plate".into()));
        }
        if nodes < MIN_NODES {
            return Err(Error::Stack(format!("need at least {MIN_NODES} quadrature nodes, got {nodes}")));
        }
        Ok(PlateStack { plates, nodes })
    }

    /// `count` equal plates with aligned fast axes, total `thickness_mm`.
    pub fn aligned(thickness_mm: f64, count: usize, delta_n: f64) -> Result<Self> {
        let count = count.max(1);
        let plate = Plate::new(thickness_mm / count as f64, 0.0, delta_n)?;
        Self::new(vec![plate; count], DEFAULT_NODES)
    }

    /// `count` equal plates with fast axes drawn uniformly from `[0, π)`.
    pub fn random<R: Rng + ?Sized>(thickness_mm: f64, count: usize, delta_n: f64, rng: &mut R) -> Result<Self> {
        let count = count.max(1);
        let plates = (0..count)
            .map(|_| Plate::new(thickness_mm / count as f64, rng.random_range(0.0..PI), delta_n))
            .collect::<Result<Vec<_>>>()?;
        Self::new(plates, DEFAULT_NODES)
    }

    pub fn with_nodes(mut self, nodes: usize) -> Result<Self> {
        if nodes < MIN_NODES {
            return Err(Error::Stack(format!("need at least {MIN_NODES} quadrature nodes, got {nodes}")));
        }
        self.nodes = nodes;
        Ok(self)
    }

    pub fn total_thickness_mm(&self) -> f64 {
        self.plates.iter().map(|p| p.thickness_mm).sum()
    }

    pub fn is_aligned(&self) -> bool {
        let first = self.plates[0].angle;
        self.plates.iter().all(|p| p.angle == first)
    }

    /// `U(ω) = U_n ⋯ U_1`.
    pub fn unitary(&self, omega: f64) -> Mat2 {
        self.plates
            .iter()
            .fold(Mat2::IDENTITY, |acc, p| p.jones(omega) * acc)
    }

    /// Sum of absolute retardance rates, an upper bound on how fast the
    /// stack unitary varies with frequency.
    fn phase_spread(&self) -> f64 {
        self.plates.iter().map(|p| p.phase_rate().abs()).sum()
    }
}

/// Convex combination of unitaries, `Φ(ρ) = Σ wⱼ Uⱼ ρ Uⱼ†`.
#[derive(Clone, Debug)]
pub struct FrequencyResolvedChannel {
    /// Frequencies (Hz), or level indices for discrete systems.
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub unitaries: Vec<Mat2>,
}

impl FrequencyResolvedChannel {
    pub fn from_parts(nodes: Vec<f64>, weights: Vec<f64>, unitaries: Vec<Mat2>) -> Result<Self> {
        if nodes.len() != weights.len() || weights.len() != unitaries.len() || weights.is_empty() {
            return Err(Error::Stack("channel parts have mismatched lengths".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::Stack("channel weights must be non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Stack("channel weights sum to zero".into()));
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(FrequencyResolvedChannel {
            nodes,
            weights,
            unitaries,
        })
    }

    pub fn apply(&self, rho: &QubitState) -> Result<QubitState> {
        apply(self, rho)
    }

    /// Largest deviation of any node unitary from unitarity.
    pub fn unitarity_error(&self) -> f64 {
        self.unitaries
            .iter()
            .map(Mat2::unitarity_error)
            .fold(0.0, f64::max)
    }
}

/// `Φ(ρ) = Σⱼ wⱼ U(ωⱼ) ρ U(ωⱼ)†`.
pub fn apply(ch: &FrequencyResolvedChannel, rho: &QubitState) -> Result<QubitState> {
    let out = ch
        .weights
        .iter()
        .zip(&ch.unitaries)
        .fold(Mat2::ZERO, |acc, (&w, u)| {
            acc + rho.matrix().conjugate_by(u).scale(C64::from(w))
        });
    QubitState::from_numeric(out)
}

/// Discretizes the spectral average for `stack` acting on `spectrum`.
/// Insufficient quadrature order is logged as a warning.
pub fn build_channel(stack: &PlateStack, spectrum: &GaussianMixtureSpectrum) -> Result<FrequencyResolvedChannel> {
    build(stack, spectrum, false)
}

/// Like [`build_channel`], but insufficient quadrature order is an error.
pub fn build_channel_strict(stack: &PlateStack, spectrum: &GaussianMixtureSpectrum) -> Result<FrequencyResolvedChannel> {
    build(stack, spectrum, true)
}

fn build(stack: &PlateStack, spectrum: &GaussianMixtureSpectrum, strict: bool) -> Result<FrequencyResolvedChannel> {
    let rule = NormalRule::new(stack.nodes)?;
    let spread = stack.phase_spread();
    let mut nodes = Vec::with_capacity(rule.nodes.len() * spectrum.components().len());
    let mut weights = Vec::with_capacity(nodes.capacity());
    let mut unitaries = Vec::with_capacity(nodes.capacity());
    for (w, c) in spectrum.iter() {
        if w == 0.0 {
            continue;
        }
        // the node rule must reproduce E[e^{iβZ}] = e^{−β²/2} at the
        // widest phase excursion β the stack can produce
        let beta = spread * c.sigma;
        let approx: C64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(z, wz)| C64::from_polar(*wz, beta * z))
            .sum();
        let err = (approx - C64::from((-0.5 * beta * beta).exp())).norm();
        if err > ACCURACY_TOL {
            let msg = format!(
                "{} Gauss-Hermite nodes give error {err:.2e} for phase spread {beta:.3}",
                stack.nodes
            );
            if strict {
                return Err(Error::NonConvergence(msg));
            }
            log::warn!("{msg}");
        }
        for (z, wz) in rule.nodes.iter().zip(&rule.weights) {
            let omega = c.mu + c.sigma * z;
            nodes.push(omega);
            weights.push(w * wz);
            unitaries.push(stack.unitary(omega));
        }
    }
    FrequencyResolvedChannel::from_parts(nodes, weights, unitaries)
}

/// Controlled-unitary coupling `Σₖ |k⟩⟨k| ⊗ Vₖ` to a finite system whose
/// states are diagonal in `{|k⟩}`.
#[derive(Clone, Debug)]
pub struct DiscreteCoupling {
    pub unitaries: Vec<Mat2>,
}

impl DiscreteCoupling {
    /// Channel induced when the system has populations `probs`.
    pub fn induced_channel(&self, probs: &[f64]) -> Result<FrequencyResolvedChannel> {
        if probs.len() != self.unitaries.len() {
            return Err(Error::Stack(format!(
                "{} populations for {} levels",
                probs.len(),
                self.unitaries.len()
            )));
        }
        FrequencyResolvedChannel::from_parts(
            (0..probs.len()).map(|k| k as f64).collect(),
            probs.to_vec(),
            self.unitaries.clone(),
        )
    }
}
