//! Unknown-coupling probing: bounds on the convex coefficient of a system
//! mixture `ξ₁ = pξ₂ + (1−p)ξ₃` from the evolved probe states
//! `φᵢ = Φᵢ(ρᵢ)`, the peak-separation lower bound, derived-quantity
//! bounds and the snapshot verdict.
//!
//! Everything here relies only on the generalized data-processing
//! inequalities, so the bounds hold for any joint unitary.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dephasing::{Decision, a_crit_fit, a_crit_numeric};
use crate::error::{Error, Result, check_alpha, check_range};
use crate::qubit::{QubitState, alpha_fidelity, trace_distance};

/// Default α grid `{0.50, 0.55, …, 0.95, 0.99}`.
pub fn default_alpha_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (0..10).map(|k| 0.5 + 0.05 * k as f64).collect();
    grid.push(0.99);
    grid
}

/// Disagreement between the fitted and numeric critical amplitude above
/// which both are reported.
pub const FIT_DISAGREEMENT: f64 = 0.01;

/// Conditions noted alongside a bound or verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    ClampedLowerFid,
    ClampedUpperFid,
    ClampedLowerTd,
    ClampedUpperTd,
    /// lower > upper within one route.
    CrossedFid,
    CrossedTd,
    /// best lower > best upper across routes.
    CrossedBest,
    /// Fidelity ratio above 1 in the Δη bound; the bound was set to 0.
    DeltaEtaNoise,
    /// Fitted and numeric Ã_crit differ by more than [`FIT_DISAGREEMENT`].
    FitNumericDisagree,
    /// The spectrum admits no non-Markovian region.
    NoCriticalAmplitude,
    /// A Markovian verdict against a probed (upper-bound) Ã_crit would
    /// be unsound and was withheld.
    ProbedMarkovianWithheld,
    /// Some bootstrap resamples failed and were excluded.
    ResampleFailures,
    /// The row failed numerically; bounds are missing.
    RowError,
}

const FLAG_NAMES: [(Flag, &str); 13] = [
    (Flag::ClampedLowerFid, "clamped_lower_fid"),
    (Flag::ClampedUpperFid, "clamped_upper_fid"),
    (Flag::ClampedLowerTd, "clamped_lower_td"),
    (Flag::ClampedUpperTd, "clamped_upper_td"),
    (Flag::CrossedFid, "crossed_fid"),
    (Flag::CrossedTd, "crossed_td"),
    (Flag::CrossedBest, "crossed_best"),
    (Flag::DeltaEtaNoise, "delta_eta_noise"),
    (Flag::FitNumericDisagree, "fit_numeric_disagree"),
    (Flag::NoCriticalAmplitude, "no_critical_amplitude"),
    (Flag::ProbedMarkovianWithheld, "probed_markovian_withheld"),
    (Flag::ResampleFailures, "resample_failures"),
    (Flag::RowError, "row_error"),
];

impl Flag {
    pub fn as_str(&self) -> &'static str {
        FLAG_NAMES.iter().find(|(f, _)| f == self).unwrap().1
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Flag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FLAG_NAMES
            .iter()
            .find(|(_, n)| *n == s)
            .map(|(f, _)| *f)
            .ok_or_else(|| Error::Config(format!("unknown flag {s:?}")))
    }
}

pub type Flags = BTreeSet<Flag>;

/// `;`-separated flag list, the CSV encoding.
pub fn format_flags(flags: &Flags) -> String {
    flags.iter().map(Flag::as_str).collect::<Vec<_>>().join(";")
}

pub fn parse_flags(s: &str) -> Result<Flags> {
    s.split(';').filter(|t| !t.is_empty()).map(str::parse).collect()
}

fn clamp_unit(x: f64, flag: Flag, flags: &mut Flags) -> f64 {
    if x < 0.0 || x > 1.0 {
        flags.insert(flag);
    }
    x.clamp(0.0, 1.0)
}

/// Ratio of evolved to initial fidelity. A vanishing denominator means the
/// reference probes are orthogonal, which carries no information.
fn fidelity_ratio(phi_a: &QubitState, phi_b: &QubitState, rho_a: &QubitState, rho_b: &QubitState, alpha: f64) -> Result<f64> {
    let den = alpha_fidelity(rho_a, rho_b, alpha)?;
    if den <= 0.0 {
        return Err(Error::Protocol("initial probe states are orthogonal".into()));
    }
    Ok(alpha_fidelity(phi_a, phi_b, alpha)? / den)
}

/// Fidelity route with independent `alpha2` (upper) and `alpha3` (lower):
/// `p ≤ [F(φ₁,φ₂)/F(ρ₁,ρ₂)]^{1/α₂}`, `p ≥ 1 − [F(φ₁,φ₃)/F(ρ₁,ρ₃)]^{1/α₃}`.
/// Returns unclamped `(lower, upper)`.
pub fn coefficient_bounds_fidelity_raw(phi: &[QubitState; 3], rho: &[QubitState; 3], alpha2: f64, alpha3: f64) -> Result<(f64, f64)> {
    check_alpha(alpha2)?;
    check_alpha(alpha3)?;
    let upper = fidelity_ratio(&phi[0], &phi[1], &rho[0], &rho[1], alpha2)?.powf(1.0 / alpha2);
    let lower = 1.0 - fidelity_ratio(&phi[0], &phi[2], &rho[0], &rho[2], alpha3)?.powf(1.0 / alpha3);
    Ok((lower, upper))
}

/// [`coefficient_bounds_fidelity_raw`] clamped to `[0, 1]`, with flags.
pub fn coefficient_bounds_fidelity(
    phi: &[QubitState; 3],
    rho: &[QubitState; 3],
    alpha2: f64,
    alpha3: f64,
    flags: &mut Flags,
) -> Result<(f64, f64)> {
    let (lo, hi) = coefficient_bounds_fidelity_raw(phi, rho, alpha2, alpha3)?;
    Ok((
        clamp_unit(lo, Flag::ClampedLowerFid, flags),
        clamp_unit(hi, Flag::ClampedUpperFid, flags),
    ))
}

/// Trace-distance route: `p ≥ D(φ₁,φ₃) − D(ρ₁,ρ₃)`,
/// `p ≤ 1 − [D(φ₁,φ₂) − D(ρ₁,ρ₂)]`. Returns unclamped `(lower, upper)`.
pub fn coefficient_bounds_trace_raw(phi: &[QubitState; 3], rho: &[QubitState; 3]) -> (f64, f64) {
    let lower = trace_distance(&phi[0], &phi[2]) - trace_distance(&rho[0], &rho[2]);
    let upper = 1.0 - (trace_distance(&phi[0], &phi[1]) - trace_distance(&rho[0], &rho[1]));
    (lower, upper)
}

pub fn coefficient_bounds_trace(phi: &[QubitState; 3], rho: &[QubitState; 3], flags: &mut Flags) -> (f64, f64) {
    let (lo, hi) = coefficient_bounds_trace_raw(phi, rho);
    (
        clamp_unit(lo, Flag::ClampedLowerTd, flags),
        clamp_unit(hi, Flag::ClampedUpperTd, flags),
    )
}

/// `Δη ≥ √(2 ln[F_α(φ₂,φ₃)/F_α(ρ₂,ρ₃)] / (α(α−1)))`. A ratio above 1
/// (possible only under noise) makes the bound vacuous: `0` and a flag.
pub fn delta_eta_lower_bound(
    phi2: &QubitState,
    phi3: &QubitState,
    rho2: &QubitState,
    rho3: &QubitState,
    alpha: f64,
    flags: &mut Flags,
) -> Result<f64> {
    check_alpha(alpha)?;
    let ratio = fidelity_ratio(phi2, phi3, rho2, rho3, alpha)?;
    if ratio > 1.0 {
        flags.insert(Flag::DeltaEtaNoise);
        return Ok(0.0);
    }
    if ratio <= 0.0 {
        // evolved references orthogonal: no finite bound is implied
        return Ok(f64::INFINITY);
    }
    Ok((2.0 * ratio.ln() / (alpha * (alpha - 1.0))).max(0.0).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tightest {
    /// Lower bounds: larger is tighter.
    Max,
    /// Upper bounds: smaller is tighter.
    Min,
}

/// Grid search over α. Ties keep the earliest grid point.
pub fn optimize_alpha<F>(grid: &[f64], sense: Tightest, mut f: F) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut best: Option<(f64, f64)> = None;
    for &alpha in grid {
        check_alpha(alpha)?;
        let v = f(alpha)?;
        let better = match (best, sense) {
            (None, _) => true,
            (Some((_, b)), Tightest::Max) => v > b,
            (Some((_, b)), Tightest::Min) => v < b,
        };
        if better {
            best = Some((alpha, v));
        }
    }
    best.ok_or_else(|| Error::Config("empty alpha grid".into()))
}

/// The three probe pairs of one measurement: initial `rho` and evolved
/// `phi`, indexed by system state `ξ₁, ξ₂, ξ₃`.
#[derive(Clone, Debug)]
pub struct ProbeSet {
    pub rho: [QubitState; 3],
    pub phi: [QubitState; 3],
}

/// Bound values at fixed `(α₂, α₃)`, in CSV order
/// `[lower_fid, upper_fid, lower_td, upper_td]`, unclamped.
pub fn raw_bounds_at(phi: &[QubitState; 3], rho: &[QubitState; 3], alpha2: f64, alpha3: f64) -> Result<[f64; 4]> {
    let (lf, uf) = coefficient_bounds_fidelity_raw(phi, rho, alpha2, alpha3)?;
    let (lt, ut) = coefficient_bounds_trace_raw(phi, rho);
    Ok([lf, uf, lt, ut])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeBounds {
    pub lower_fid: f64,
    pub upper_fid: f64,
    pub lower_td: f64,
    pub upper_td: f64,
    /// α used for the fidelity-route upper bound.
    pub alpha2: f64,
    /// α used for the fidelity-route lower bound.
    pub alpha3: f64,
    /// Standard deviations in the same order as the four bounds.
    pub std: [f64; 4],
    pub flags: Flags,
}

impl ProbeBounds {
    /// Both routes, with `α₂` and `α₃` optimized independently over
    /// `grid`.
    pub fn compute(probes: &ProbeSet, grid: &[f64]) -> Result<Self> {
        let (phi, rho) = (&probes.phi, &probes.rho);
        let (alpha2, _) = optimize_alpha(grid, Tightest::Min, |a| {
            Ok(fidelity_ratio(&phi[0], &phi[1], &rho[0], &rho[1], a)?.powf(1.0 / a))
        })?;
        let (alpha3, _) = optimize_alpha(grid, Tightest::Max, |a| {
            Ok(1.0 - fidelity_ratio(&phi[0], &phi[2], &rho[0], &rho[2], a)?.powf(1.0 / a))
        })?;
        Self::at(probes, alpha2, alpha3)
    }

    pub fn at(probes: &ProbeSet, alpha2: f64, alpha3: f64) -> Result<Self> {
        let mut flags = Flags::new();
        let (lower_fid, upper_fid) = coefficient_bounds_fidelity(&probes.phi, &probes.rho, alpha2, alpha3, &mut flags)?;
        let (lower_td, upper_td) = coefficient_bounds_trace(&probes.phi, &probes.rho, &mut flags);
        if lower_fid > upper_fid {
            flags.insert(Flag::CrossedFid);
        }
        if lower_td > upper_td {
            flags.insert(Flag::CrossedTd);
        }
        Ok(ProbeBounds {
            lower_fid,
            upper_fid,
            lower_td,
            upper_td,
            alpha2,
            alpha3,
            std: [0.0; 4],
            flags,
        })
    }

    pub fn values(&self) -> [f64; 4] {
        [self.lower_fid, self.upper_fid, self.lower_td, self.upper_td]
    }

    /// Tightest lower bound across routes.
    pub fn best_lower(&self) -> f64 {
        self.lower_fid.max(self.lower_td)
    }

    pub fn best_upper(&self) -> f64 {
        self.upper_fid.min(self.upper_td)
    }
}

/// Where the critical amplitude came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcritSource {
    /// Computed from the true peak separation.
    Known,
    /// Pessimistic upper bound from the probed Δη lower bound.
    Probed,
}

impl AcritSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            AcritSource::Known => "known",
            AcritSource::Probed => "probed",
        }
    }
}

impl fmt::Display for AcritSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AcritSource {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "known" => Ok(AcritSource::Known),
            "probed" => Ok(AcritSource::Probed),
            other => Err(Error::Config(format!("unknown a_crit source {other:?}"))),
        }
    }
}

/// Critical amplitude used by a verdict; `value` is `None` when the
/// spectrum has no non-Markovian region.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AcritEstimate {
    pub value: Option<f64>,
    pub source: AcritSource,
    pub fit: Option<f64>,
    pub numeric: Option<f64>,
    /// Δη the estimate was evaluated at.
    pub delta_eta: f64,
    pub flags: Flags,
}

impl AcritEstimate {
    pub fn known(delta_eta: f64, tau_max: f64) -> Result<Self> {
        let numeric = a_crit_numeric(delta_eta, tau_max)?;
        let mut flags = Flags::new();
        if numeric.is_none() {
            flags.insert(Flag::NoCriticalAmplitude);
        }
        Ok(AcritEstimate {
            value: numeric,
            source: AcritSource::Known,
            fit: Some(a_crit_fit(delta_eta)),
            numeric,
            delta_eta,
            flags,
        })
    }

    /// `Ã_crit` from a lower bound on Δη. Since `A_crit` decreases with
    /// Δη, this over-estimates the true value. When the fit and the
    /// numeric solver disagree, the larger is used.
    pub fn probed(delta_eta_lb: f64, tau_max: f64) -> Result<Self> {
        let fit = a_crit_fit(delta_eta_lb).min(0.5);
        let numeric = if delta_eta_lb.is_finite() {
            a_crit_numeric(delta_eta_lb, tau_max)?
        } else {
            None
        };
        let mut flags = Flags::new();
        let value = match numeric {
            Some(n) if (n - fit).abs() > FIT_DISAGREEMENT => {
                flags.insert(Flag::FitNumericDisagree);
                n.max(fit)
            }
            _ => fit,
        };
        Ok(AcritEstimate {
            value: Some(value),
            source: AcritSource::Probed,
            fit: Some(fit),
            numeric,
            delta_eta: delta_eta_lb,
            flags,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeVerdict {
    pub bounds: ProbeBounds,
    pub a_crit: AcritEstimate,
    pub decision: Decision,
    pub flags: Flags,
    pub notes: Vec<String>,
}

/// Decision rule on the tightest bounds `[lower, upper]`:
/// non-Markovian if `[lower, upper] ⊆ [a_crit, 1 − a_crit]`, Markovian if
/// the two intervals are disjoint, inconclusive otherwise.
///
/// A Markovian conclusion needs the true `a_crit`, so it is withheld for a
/// probed (upper-bound) value. Crossed bounds are inconclusive.
pub fn decide(lower: f64, upper: f64, a_crit: Option<f64>, source: AcritSource) -> (Decision, Flags) {
    let mut flags = Flags::new();
    if lower > upper {
        flags.insert(Flag::CrossedBest);
        return (Decision::Inconclusive, flags);
    }
    let Some(a) = a_crit else {
        flags.insert(Flag::NoCriticalAmplitude);
        return (Decision::MarkovianVerified, flags);
    };
    if lower >= a && upper <= 1.0 - a {
        (Decision::NonMarkovianVerified, flags)
    } else if upper < a || lower > 1.0 - a {
        match source {
            AcritSource::Known => (Decision::MarkovianVerified, flags),
            AcritSource::Probed => {
                flags.insert(Flag::ProbedMarkovianWithheld);
                (Decision::Inconclusive, flags)
            }
        }
    } else {
        (Decision::Inconclusive, flags)
    }
}

pub fn verdict(bounds: ProbeBounds, a_crit: AcritEstimate) -> Result<ProbeVerdict> {
    if let Some(a) = a_crit.value {
        check_range("a_crit", a, (0.0..=0.5).contains(&a), "[0, 1/2]")?;
    }
    let (decision, mut flags) = decide(bounds.best_lower(), bounds.best_upper(), a_crit.value, a_crit.source);
    flags.extend(bounds.flags.iter().copied());
    flags.extend(a_crit.flags.iter().copied());
    let mut notes = Vec::new();
    if a_crit.source == AcritSource::Probed {
        notes.push(format!("a_crit is a pessimistic upper bound from delta_eta >= {:.6}", a_crit.delta_eta));
    }
    if a_crit.flags.contains(&Flag::FitNumericDisagree) {
        notes.push(format!(
            "fit {:.6} and numeric {:.6} disagree; using the larger",
            a_crit.fit.unwrap_or(f64::NAN),
            a_crit.numeric.unwrap_or(f64::NAN)
        ));
    }
    Ok(ProbeVerdict {
        bounds,
        a_crit,
        decision,
        flags,
        notes,
    })
}

/// Purity and von Neumann entropy of a mixture component.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentProps {
    pub purity: f64,
    pub entropy: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DerivedBounds {
    pub purity: (f64, f64),
    pub entropy: (f64, f64),
    /// `|2p − 1|`, the concurrence of a mixture of two orthogonal Bell
    /// states.
    pub concurrence: (f64, f64),
}

fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// Image of `[p_lo, p_hi]` under the purity, entropy and concurrence of
/// `pξ₂ + (1−p)ξ₃`. The closed forms require `ξ₂ ⊥ ξ₃`; without that
/// declaration nothing is returned.
pub fn derived_quantity_bounds(
    p_bounds: (f64, f64),
    xi2: ComponentProps,
    xi3: ComponentProps,
    orthogonal: bool,
) -> Option<DerivedBounds> {
    if !orthogonal {
        return None;
    }
    let (lo, hi) = (p_bounds.0.clamp(0.0, 1.0), p_bounds.1.clamp(0.0, 1.0));
    if lo > hi {
        return None;
    }
    let range = |f: &dyn Fn(f64) -> f64, interior: Option<f64>| {
        let mut pts = vec![lo, hi];
        pts.extend(interior.filter(|x| (lo..=hi).contains(x)));
        let vals: Vec<f64> = pts.iter().map(|&p| f(p)).collect();
        (
            vals.iter().copied().fold(f64::INFINITY, f64::min),
            vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        )
    };
    let purity = |p: f64| xi2.purity * p * p + xi3.purity * (1.0 - p) * (1.0 - p);
    let p_purity = xi3.purity / (xi2.purity + xi3.purity);
    let entropy = |p: f64| p * xi2.entropy + (1.0 - p) * xi3.entropy + binary_entropy(p);
    // S'(p) = S₂ − S₃ + ln((1−p)/p) vanishes here
    let p_entropy = 1.0 / (1.0 + (xi3.entropy - xi2.entropy).exp());
    let concurrence = |p: f64| (2.0 * p - 1.0).abs();
    Some(DerivedBounds {
        purity: range(&purity, Some(p_purity)),
        entropy: range(&entropy, Some(p_entropy)),
        concurrence: range(&concurrence, Some(0.5)),
    })
}

/// A system state diagonal in a known basis, `ξ₁ = pξ₂ + (1−p)ξ₃` with
/// `ξ₂ = Σλₖ|k⟩⟨k|`, `ξ₃ = Σνₖ|k⟩⟨k|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutingMixture {
    pub basis: String,
    pub lambda: Vec<f64>,
    pub nu: Vec<f64>,
    pub p: f64,
}

impl CommutingMixture {
    pub fn new(basis: impl Into<String>, lambda: Vec<f64>, nu: Vec<f64>, p: f64) -> Result<Self> {
        for v in [&lambda, &nu] {
            let total: f64 = v.iter().sum();
            if v.iter().any(|x| !(*x >= 0.0)) || (total - 1.0).abs() > 1e-12 {
                return Err(Error::Protocol("eigenvalue list must be a probability vector".into()));
            }
        }
        if lambda.len() != nu.len() || lambda.is_empty() {
            return Err(Error::Protocol("eigenvalue lists must have equal nonzero length".into()));
        }
        check_range("p", p, (0.0..=1.0).contains(&p), "[0, 1]")?;
        Ok(CommutingMixture {
            basis: basis.into(),
            lambda,
            nu,
            p,
        })
    }

    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    /// Eigenvalues of `ξ₁`.
    pub fn mixed(&self) -> Vec<f64> {
        self.lambda
            .iter()
            .zip(&self.nu)
            .map(|(l, n)| self.p * l + (1.0 - self.p) * n)
            .collect()
    }
}

/// Upper bounds on every eigenvalue of a diagonal system state `ξ₁`:
/// with `|k⟩⟨k|` as reference system state, `F_α(ξ₁, |k⟩⟨k|) = λₖ^α`, so
/// `λₖ ≤ [F_α(φ₁, φ⁽ᵏ⁾)/F_α(ρ₁, ρ⁽ᵏ⁾)]^{1/α}`, minimized over `grid`.
/// `references[k] = (φ⁽ᵏ⁾, ρ⁽ᵏ⁾)`.
pub fn eigenvalue_upper_bounds(
    phi1: &QubitState,
    rho1: &QubitState,
    references: &[(QubitState, QubitState)],
    grid: &[f64],
) -> Result<Vec<f64>> {
    references
        .iter()
        .map(|(phi_k, rho_k)| {
            let (_, v) = optimize_alpha(grid, Tightest::Min, |a| {
                Ok(fidelity_ratio(phi1, phi_k, rho1, rho_k, a)?.powf(1.0 / a))
            })?;
            Ok(v.clamp(0.0, 1.0))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::{DiscreteCoupling, PlateStack, apply, build_channel};
    use crate::dephasing::DephasingChannel;
    use crate::linalg::Mat2;
    use crate::qubit::{purity, von_neumann_entropy};
    use crate::spectra::{GaussianMixtureSpectrum, TwoPeakFamily, decoherence_function};
    use approx::assert_abs_diff_eq;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    const DELTA_N: f64 = 0.0089;

    fn evolve_aligned(fam: &TwoPeakFamily, mm: f64, rho: &QubitState) -> [QubitState; 3] {
        let t = mm * 1e-3 / crate::spectra::SPEED_OF_LIGHT;
        [fam.xi1(), fam.xi2(), fam.xi3()]
            .map(|s| DephasingChannel::from_spectrum(&s, DELTA_N, t).unwrap().apply(rho).unwrap())
    }

    fn plus3() -> [QubitState; 3] {
        [QubitState::plus(), QubitState::plus(), QubitState::plus()]
    }

    #[test]
    fn identical_evolution_gives_trivial_upper() {
        let rho = plus3();
        let (_, hi) = coefficient_bounds_fidelity_raw(&rho, &rho, 0.5, 0.5).unwrap();
        assert_abs_diff_eq!(hi, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn orthogonal_references_rejected() {
        let rho = [QubitState::horizontal(), QubitState::vertical(), QubitState::horizontal()];
        assert!(matches!(
            coefficient_bounds_fidelity_raw(&rho, &rho, 0.5, 0.5),
            Err(Error::Protocol(_))
        ));
    }

    #[test]
    fn equal_probes_reduce_to_simplified_upper() {
        let fam = TwoPeakFamily::from_wavelengths(0.6377, 810.0, 820.0, 3.0).unwrap();
        let phi = evolve_aligned(&fam, 4.0, &QubitState::plus());
        for &a in &[0.5, 0.7, 0.9] {
            let (_, hi) = coefficient_bounds_fidelity_raw(&phi, &plus3(), a, a).unwrap();
            let direct = alpha_fidelity(&phi[0], &phi[1], a).unwrap().powf(1.0 / a);
            assert_abs_diff_eq!(hi, direct, epsilon = 1e-15);
        }
    }

    #[test]
    fn trace_lower_matches_closed_form() {
        let a = 0.7;
        let fam = TwoPeakFamily::from_wavelengths(a, 810.0, 818.0, 3.0).unwrap();
        for &mm in &[1.0, 3.0, 6.0, 10.0] {
            let phi = evolve_aligned(&fam, mm, &QubitState::plus());
            let (lo, _) = coefficient_bounds_trace_raw(&phi, &plus3());
            let tau = fam.tau_for_thickness(mm, DELTA_N);
            let x = fam.delta_eta() * tau;
            let expect = a * (-0.5 * tau * tau).exp() * (2.0 - 2.0 * x.cos()).sqrt() / 2.0;
            assert_abs_diff_eq!(lo, expect, epsilon = 1e-10);
        }
    }

    #[test]
    fn trivial_trace_upper_when_a_is_one() {
        let fam = TwoPeakFamily::from_wavelengths(1.0, 810.0, 818.0, 3.0).unwrap();
        let phi = evolve_aligned(&fam, 5.0, &QubitState::plus());
        let (_, hi) = coefficient_bounds_trace_raw(&phi, &plus3());
        assert_abs_diff_eq!(hi, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn delta_eta_bound_inverts_exact_fidelity() {
        // with the exact spectral fidelity as evolved-to-initial ratio the
        // formula returns Δη itself
        for &eta in &[0.5f64, 3.0, 15.0] {
            for &alpha in &[0.5f64, 0.7, 0.95] {
                let ratio: f64 = (-alpha * (1.0 - alpha) * eta * eta / 2.0).exp();
                let lb = (2.0 * ratio.ln() / (alpha * (alpha - 1.0))).sqrt();
                assert_abs_diff_eq!(lb, eta, epsilon = 1e-9 * eta);
            }
        }
        let mut flags = Flags::new();
        let p = QubitState::plus();
        assert_eq!(delta_eta_lower_bound(&p, &p, &p, &p, 0.7, &mut flags).unwrap(), 0.0);
        assert!(flags.is_empty());
    }

    #[test]
    fn delta_eta_bound_flags_noise() {
        let mut flags = Flags::new();
        let (phi, rho) = (QubitState::plus(), QubitState::dephased_plus(0.5.into()).unwrap());
        let r = QubitState::from_bloch([0.0, 0.0, 0.0]).unwrap();
        let b = delta_eta_lower_bound(&phi, &phi, &rho, &r, 0.6, &mut flags).unwrap();
        assert_eq!(b, 0.0);
        assert!(flags.contains(&Flag::DeltaEtaNoise));
    }

    #[test]
    fn delta_eta_bound_never_exceeds_truth() {
        let fam = TwoPeakFamily::from_wavelengths(0.5, 810.0, 830.0, 3.0).unwrap();
        let eta = fam.delta_eta();
        let mut best_alpha_count = 0;
        let grid = default_alpha_grid();
        let p = QubitState::plus();
        for mm in 1..=14 {
            let phi = evolve_aligned(&fam, mm as f64, &p);
            let (alpha, lb) = optimize_alpha(&grid, Tightest::Max, |a| {
                delta_eta_lower_bound(&phi[1], &phi[2], &p, &p, a, &mut Flags::new())
            })
            .unwrap();
            assert!(lb <= eta + 1e-9, "{mm} mm: {lb} > {eta}");
            if alpha == 0.99 {
                best_alpha_count += 1;
            }
        }
        assert!(best_alpha_count >= 7);
    }

    #[test]
    fn optimize_alpha_tie_breaks_to_smallest() {
        let grid = default_alpha_grid();
        assert_eq!(optimize_alpha(&grid, Tightest::Max, |_| Ok(0.3)).unwrap(), (0.5, 0.3));
        assert_eq!(optimize_alpha(&grid, Tightest::Min, |a| Ok(a)).unwrap().0, 0.5);
        assert_eq!(optimize_alpha(&grid, Tightest::Max, |a| Ok(a)).unwrap().0, 0.99);
        assert!(optimize_alpha(&[], Tightest::Max, |a| Ok(a)).is_err());
        assert!(optimize_alpha(&[1.0], Tightest::Max, |a| Ok(a)).is_err());
    }

    #[test]
    fn half_is_optimal_for_coefficient_bounds_on_aligned_sweeps() {
        let fam = TwoPeakFamily::from_wavelengths(0.5122, 810.0, 830.0, 3.0).unwrap();
        for mm in 2..=14 {
            let phi = evolve_aligned(&fam, mm as f64, &QubitState::plus());
            let b = ProbeBounds::compute(
                &ProbeSet {
                    rho: plus3(),
                    phi,
                },
                &default_alpha_grid(),
            )
            .unwrap();
            assert_eq!((b.alpha2, b.alpha3), (0.5, 0.5), "{mm} mm");
        }
    }

    fn bounds(lf: f64, uf: f64, lt: f64, ut: f64) -> ProbeBounds {
        ProbeBounds {
            lower_fid: lf,
            upper_fid: uf,
            lower_td: lt,
            upper_td: ut,
            alpha2: 0.5,
            alpha3: 0.5,
            std: [0.0; 4],
            flags: Flags::new(),
        }
    }

    fn known(a: f64) -> AcritEstimate {
        AcritEstimate {
            value: Some(a),
            source: AcritSource::Known,
            fit: None,
            numeric: Some(a),
            delta_eta: f64::NAN,
            flags: Flags::new(),
        }
    }

    #[test]
    fn verdict_examples() {
        let v = verdict(bounds(0.3, 0.7, 0.2, 0.8), known(0.2)).unwrap();
        assert_eq!(v.decision, Decision::NonMarkovianVerified);
        let v = verdict(bounds(0.0, 0.15, 0.0, 0.4), known(0.2)).unwrap();
        assert_eq!(v.decision, Decision::MarkovianVerified);
        let v = verdict(bounds(0.1, 0.7, 0.0, 0.8), known(0.2)).unwrap();
        assert_eq!(v.decision, Decision::Inconclusive);
        let v = verdict(bounds(0.6, 0.7, 0.2, 0.5), known(0.2)).unwrap();
        assert_eq!(v.decision, Decision::Inconclusive);
        assert!(v.flags.contains(&Flag::CrossedBest));
        assert!(verdict(bounds(0.3, 0.7, 0.2, 0.8), known(0.6)).is_err());
    }

    #[test]
    fn probed_markovian_is_withheld() {
        let mut est = known(0.3);
        est.source = AcritSource::Probed;
        let v = verdict(bounds(0.0, 0.15, 0.0, 0.4), est.clone()).unwrap();
        assert_eq!(v.decision, Decision::Inconclusive);
        assert!(v.flags.contains(&Flag::ProbedMarkovianWithheld));
        let v = verdict(bounds(0.35, 0.6, 0.3, 0.8), est).unwrap();
        assert_eq!(v.decision, Decision::NonMarkovianVerified);
        assert!(!v.notes.is_empty());
    }

    #[test]
    fn absent_a_crit_is_markovian() {
        let est = AcritEstimate::known(0.0, 50.0).unwrap();
        assert_eq!(est.value, None);
        let v = verdict(bounds(0.4, 0.6, 0.4, 0.6), est).unwrap();
        assert_eq!(v.decision, Decision::MarkovianVerified);
        assert!(v.flags.contains(&Flag::NoCriticalAmplitude));
    }

    #[test]
    fn probed_a_crit_is_pessimistic() {
        for &lb in &[0.0, 1.0, 3.0, 7.5, 15.0] {
            let probed = AcritEstimate::probed(lb, 50.0).unwrap().value.unwrap();
            let truth = a_crit_numeric(lb + 2.0, 50.0).unwrap().unwrap();
            assert!(probed >= truth - FIT_DISAGREEMENT, "{lb}");
        }
    }

    #[test]
    fn flags_roundtrip() {
        let flags: Flags = [Flag::CrossedTd, Flag::DeltaEtaNoise, Flag::RowError].into_iter().collect();
        let s = format_flags(&flags);
        assert_eq!(s, "crossed_td;delta_eta_noise;row_error");
        assert_eq!(parse_flags(&s).unwrap(), flags);
        assert!(parse_flags("").unwrap().is_empty());
        assert!(parse_flags("bogus").is_err());
    }

    #[test]
    fn derived_quantity_examples() {
        let pure = ComponentProps {
            purity: 1.0,
            entropy: 0.0,
        };
        let d = derived_quantity_bounds((0.0, 1.0), pure, pure, true).unwrap();
        assert_abs_diff_eq!(d.purity.0, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d.purity.1, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.entropy.1, 2f64.ln(), epsilon = 1e-15);
        let d = derived_quantity_bounds((0.4, 0.6), pure, pure, true).unwrap();
        assert_abs_diff_eq!(d.concurrence.0, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.concurrence.1, 0.2, epsilon = 1e-15);
        let p: f64 = 0.3;
        let d = derived_quantity_bounds((p, p), pure, pure, true).unwrap();
        let s = -p * p.ln() - (1.0 - p) * (1.0 - p).ln();
        assert_abs_diff_eq!(d.entropy.0, s, epsilon = 1e-15);
        assert_abs_diff_eq!(d.entropy.1, s, epsilon = 1e-15);
        assert!(derived_quantity_bounds((0.4, 0.6), pure, pure, false).is_none());
    }

    #[test]
    fn derived_entropy_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let c2 = ComponentProps {
                purity: rng.random_range(0.5..1.0),
                entropy: rng.random_range(0.0..0.69),
            };
            let c3 = ComponentProps {
                purity: rng.random_range(0.5..1.0),
                entropy: rng.random_range(0.0..0.69),
            };
            let a: f64 = rng.random_range(0.0..1.0);
            let b: f64 = rng.random_range(0.0..1.0);
            let (lo, hi) = (a.min(b), a.max(b));
            let d = derived_quantity_bounds((lo, hi), c2, c3, true).unwrap();
            for i in 0..=1000 {
                let p = lo + (hi - lo) * i as f64 / 1000.0;
                let pu = c2.purity * p * p + c3.purity * (1.0 - p).powi(2);
                let s = p * c2.entropy + (1.0 - p) * c3.entropy + binary_entropy(p);
                assert!(pu >= d.purity.0 - 1e-12 && pu <= d.purity.1 + 1e-12);
                assert!(s >= d.entropy.0 - 1e-12 && s <= d.entropy.1 + 1e-12);
            }
        }
    }

    #[test]
    fn derived_purity_matches_state_for_orthogonal_mixture() {
        let p = 0.35;
        let m = QubitState::from_bloch([0.0, 0.0, 2.0 * p - 1.0]).unwrap();
        let pure = ComponentProps {
            purity: 1.0,
            entropy: 0.0,
        };
        let d = derived_quantity_bounds((p, p), pure, pure, true).unwrap();
        assert_abs_diff_eq!(d.purity.0, purity(&m), epsilon = 1e-14);
        assert_abs_diff_eq!(d.entropy.0, von_neumann_entropy(&m), epsilon = 1e-14);
    }

    fn random_unitary(rng: &mut ChaCha8Rng) -> Mat2 {
        let phase = |x: f64| Mat2::diag(crate::linalg::C64::from_polar(1.0, x), crate::linalg::C64::from_polar(1.0, -x));
        phase(rng.random_range(0.0..PI)) * Mat2::rotation(rng.random_range(0.0..PI)) * phase(rng.random_range(0.0..PI))
    }

    fn eigen_bounds_for(mix: &CommutingMixture, coupling: &DiscreteCoupling, rho: &QubitState) -> Vec<f64> {
        let phi1 = coupling.induced_channel(&mix.mixed()).unwrap().apply(rho).unwrap();
        let refs: Vec<_> = (0..mix.dim())
            .map(|k| {
                let mut e = vec![0.0; mix.dim()];
                e[k] = 1.0;
                (coupling.induced_channel(&e).unwrap().apply(rho).unwrap(), rho.clone())
            })
            .collect();
        eigenvalue_upper_bounds(&phi1, rho, &refs, &default_alpha_grid()).unwrap()
    }

    #[test]
    fn eigenvalue_bounds_dominate_truth() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let d = rng.random_range(2..6);
            let mut draw = || {
                let v: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..1.0)).collect();
                let s: f64 = v.iter().sum();
                v.into_iter().map(|x| x / s).collect::<Vec<_>>()
            };
            let (l, n) = (draw(), draw());
            let mix = CommutingMixture::new("computational", l, n, rng.random_range(0.0..1.0)).unwrap();
            let coupling = DiscreteCoupling {
                unitaries: (0..d).map(|_| random_unitary(&mut rng)).collect(),
            };
            let rho = QubitState::from_bloch([0.6, 0.1, 0.7]).unwrap();
            let ub = eigen_bounds_for(&mix, &coupling, &rho);
            for (b, t) in ub.iter().zip(mix.mixed()) {
                assert!(*b >= t - 1e-9, "{b} < {t}");
            }
        }
    }

    #[test]
    fn eigenvalue_bound_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let coupling = DiscreteCoupling {
            unitaries: vec![random_unitary(&mut rng), random_unitary(&mut rng)],
        };
        let rho = QubitState::plus();
        let eig = CommutingMixture::new("z", vec![1.0, 0.0], vec![1.0, 0.0], 0.5).unwrap();
        assert_abs_diff_eq!(eigen_bounds_for(&eig, &coupling, &rho)[0], 1.0, epsilon = 1e-12);
        let mixed = CommutingMixture::new("z", vec![1.0, 0.0], vec![0.0, 1.0], 0.5).unwrap();
        for b in eigen_bounds_for(&mixed, &coupling, &rho) {
            assert!(b >= 0.5 - 1e-12);
        }
        assert!(CommutingMixture::new("z", vec![0.5, 0.4], vec![1.0, 0.0], 0.5).is_err());
    }

    fn spectrum_pair(rng: &mut ChaCha8Rng) -> TwoPeakFamily {
        let l1 = rng.random_range(790.0..830.0);
        TwoPeakFamily::from_wavelengths(rng.random_range(0.0..1.0), l1, l1 + rng.random_range(0.5..25.0), rng.random_range(1.0..6.0))
            .unwrap()
    }

    #[test]
    fn noiseless_soundness_random_stacks() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let grid = default_alpha_grid();
        for _ in 0..60 {
            let fam = spectrum_pair(&mut rng);
            let stack = if rng.random_range(0.0..1.0) < 0.5 {
                PlateStack::aligned(rng.random_range(0.5..20.0), 1, DELTA_N).unwrap()
            } else {
                PlateStack::random(rng.random_range(0.5..20.0), 3, DELTA_N, &mut rng).unwrap()
            };
            let rho = QubitState::from_bloch([0.8, 0.1, 0.3]).unwrap();
            let phi = [fam.xi1(), fam.xi2(), fam.xi3()].map(|s: GaussianMixtureSpectrum| {
                apply(&build_channel(&stack, &s).unwrap(), &rho).unwrap()
            });
            let set = ProbeSet {
                rho: [rho.clone(), rho.clone(), rho.clone()],
                phi,
            };
            for &a in &grid {
                let v = raw_bounds_at(&set.phi, &set.rho, a, a).unwrap();
                assert!(v[0] <= fam.a + 1e-9 && fam.a <= v[1] + 1e-9, "fid {v:?} A={}", fam.a);
                assert!(v[2] <= fam.a + 1e-9 && fam.a <= v[3] + 1e-9, "td {v:?} A={}", fam.a);
            }
        }
    }

    #[test]
    fn aligned_bounds_never_certify_global_markovianity() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..300 {
            let eta = rng.random_range(0.5..20.0);
            let a = rng.random_range(0.0..1.0);
            let tau = rng.random_range(0.01..4.0);
            let Some(ac) = a_crit_numeric(eta, 50.0).unwrap() else { continue };
            // aligned stack: coherences are κ scaled, closed form
            let k = |w: f64| {
                let z = crate::linalg::C64::from_polar(1.0, eta * tau) * (1.0 - w) + w;
                z * (-0.5 * tau * tau).exp()
            };
            let phi = [k(a), k(1.0), k(0.0)].map(|c| QubitState::dephased_plus(c).unwrap());
            let v = raw_bounds_at(&phi, &plus3(), 0.5, 0.5).unwrap();
            assert!(v[1] >= ac - 1e-9 && v[0] <= 1.0 - ac + 1e-9);
            assert!(v[3] >= ac - 1e-9 && v[2] <= 1.0 - ac + 1e-9);
        }
    }

    #[test]
    fn closed_form_coherence_matches_spectrum() {
        let fam = TwoPeakFamily::from_wavelengths(0.3, 810.0, 818.0, 3.0).unwrap();
        let tau = 0.8;
        let tp = tau / fam.sigma();
        let k1 = decoherence_function(&fam.xi1(), tp);
        let k2 = decoherence_function(&fam.xi2(), tp);
        // relative to the first peak the mixture carries A + (1−A)e^{iΔμ t}
        let shift = (fam.second.mu - fam.first.mu) / fam.sigma() * tau;
        let expect = crate::linalg::C64::from_polar(0.7, shift) + 0.3;
        assert!((k1 / k2 - expect).norm() < 1e-9);
        assert_abs_diff_eq!(k2.norm(), (-0.5 * tau * tau).exp(), epsilon = 1e-12);
    }
}
