//! Photon frequency spectra as weighted Gaussian mixtures.
//!
//! Frequencies are ordinary frequencies in Hz. A spectrum `f(ω)` is the
//! diagonal of a frequency density operator, so all distances between
//! spectra are classical: `F_α = ∫ x^α y^{1−α}` and `D = ½∫|x − y|`.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, check_alpha};
use crate::linalg::C64;
use crate::quadrature::integrate_adaptive;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Relative tolerance for spectral integrals.
const QUAD_REL_TOL: f64 = 1e-10;
/// Integration window half-width in units of σ beyond the outermost peaks.
const WINDOW_SIGMAS: f64 = 10.0;

/// Central frequency (Hz) of light with vacuum wavelength `lambda_nm`.
pub fn frequency_from_wavelength_nm(lambda_nm: f64) -> f64 {
    SPEED_OF_LIGHT / (lambda_nm * 1e-9)
}

/// Frequency standard deviation (Hz) of a Gaussian filter with the given
/// wavelength FWHM, linearized at `lambda_nm`:
/// `σ = (c/λ²)·FWHM_λ / (2√(2 ln 2))`.
pub fn sigma_from_fwhm_nm(lambda_nm: f64, fwhm_nm: f64) -> f64 {
    let lambda = lambda_nm * 1e-9;
    SPEED_OF_LIGHT / (lambda * lambda) * (fwhm_nm * 1e-9) / (2.0 * (2.0 * LN_2).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    /// Central frequency (Hz).
    pub mu: f64,
    /// Standard deviation (Hz).
    pub sigma: f64,
}

impl GaussianComponent {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::Spectrum(format!("central frequency must be positive, got {mu}")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Spectrum(format!("sigma must be positive, got {sigma}")));
        }
        Ok(GaussianComponent { mu, sigma })
    }

    pub fn pdf(&self, omega: f64) -> f64 {
        let z = (omega - self.mu) / self.sigma;
        (-0.5 * z * z).exp() / ((2.0 * PI).sqrt() * self.sigma)
    }
}

/// A convex combination of Gaussian components.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixtureSpectrum {
    components: Vec<GaussianComponent>,
    weights: Vec<f64>,
}

impl GaussianMixtureSpectrum {
    pub fn new(components: Vec<GaussianComponent>, weights: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Spectrum("mixture needs at least one component".into()));
        }
        if components.len() != weights.len() {
            return Err(Error::Spectrum(format!(
                "{} components but {} weights",
                components.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0)) {
            return Err(Error::Spectrum(format!("negative or NaN weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Spectrum(format!("weights sum to {total}, not 1")));
        }
        Ok(GaussianMixtureSpectrum {
            components,
            weights,
        })
    }

    pub fn single(component: GaussianComponent) -> Self {
        GaussianMixtureSpectrum {
            components: vec![component],
            weights: vec![1.0],
        }
    }

    /// `a·G₁ + (1 − a)·G₂`.
    pub fn two_peak(a: f64, first: GaussianComponent, second: GaussianComponent) -> Result<Self> {
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::Domain {
                name: "A",
                value: a,
                expected: "[0, 1]",
            });
        }
        Self::new(vec![first, second], vec![a, 1.0 - a])
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Iterator over `(weight, component)`.
    pub fn iter(&self) -> impl Iterator<Item = (f64, &GaussianComponent)> {
        self.weights.iter().copied().zip(&self.components)
    }

    pub fn pdf(&self, omega: f64) -> f64 {
        self.iter().map(|(w, c)| w * c.pdf(omega)).sum()
    }

    /// `|μ₂ − μ₁|` for a two-component mixture.
    pub fn delta_mu(&self) -> Option<f64> {
        match self.components.as_slice() {
            [a, b] => Some((b.mu - a.mu).abs()),
            _ => None,
        }
    }

    /// `Δη = Δμ/σ` for a two-component mixture with a common width.
    pub fn delta_eta(&self) -> Option<f64> {
        match self.components.as_slice() {
            [a, b] if a.sigma == b.sigma => Some((b.mu - a.mu).abs() / a.sigma),
            _ => None,
        }
    }

    fn window(&self) -> (f64, f64) {
        let lo = self
            .components
            .iter()
            .map(|c| c.mu - WINDOW_SIGMAS * c.sigma)
            .fold(f64::INFINITY, f64::min);
        let hi = self
            .components
            .iter()
            .map(|c| c.mu + WINDOW_SIGMAS * c.sigma)
            .fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    fn min_sigma(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.sigma)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Joint integration window and a length scale for two spectra.
fn joint_window(x: &GaussianMixtureSpectrum, y: &GaussianMixtureSpectrum) -> (f64, f64, f64) {
    let (a0, a1) = x.window();
    let (b0, b1) = y.window();
    (a0.min(b0), a1.max(b1), x.min_sigma().min(y.min_sigma()))
}

/// α-fidelity of two spectra, `∫ x(ω)^α y(ω)^{1−α} dω`.
///
/// Two single Gaussians of equal width use the closed form
/// `exp(−α(1−α)Δη²/2)`; everything else goes through quadrature.
pub fn spectral_alpha_fidelity(
    x: &GaussianMixtureSpectrum,
    y: &GaussianMixtureSpectrum,
    alpha: f64,
) -> Result<f64> {
    check_alpha(alpha)?;
    if let ([cx], [cy]) = (x.components(), y.components()) {
        if cx.sigma == cy.sigma {
            let eta = (cx.mu - cy.mu) / cx.sigma;
            return Ok((-alpha * (1.0 - alpha) * eta * eta / 2.0).exp());
        }
    }
    spectral_alpha_fidelity_quadrature(x, y, alpha)
}

/// Quadrature route for [`spectral_alpha_fidelity`], with no closed-form
/// shortcut.
pub fn spectral_alpha_fidelity_quadrature(
    x: &GaussianMixtureSpectrum,
    y: &GaussianMixtureSpectrum,
    alpha: f64,
) -> Result<f64> {
    check_alpha(alpha)?;
    let (lo, hi, scale) = joint_window(x, y);
    // integrate in units of the narrowest σ to keep the integrand O(1)
    let value = integrate_adaptive(0.0, (hi - lo) / scale, QUAD_REL_TOL, 1e-15, |u| {
        let omega = lo + u * scale;
        let (px, py) = (x.pdf(omega) * scale, y.pdf(omega) * scale);
        if px <= 0.0 || py <= 0.0 {
            0.0
        } else {
            (alpha * px.ln() + (1.0 - alpha) * py.ln()).exp()
        }
    })?;
    Ok(value.clamp(0.0, 1.0))
}

/// Trace distance of two spectra, `½∫|x(ω) − y(ω)| dω`.
///
/// Sign changes of `x − y` are located first so that each quadrature
/// panel sees a smooth integrand.
pub fn spectral_trace_distance(x: &GaussianMixtureSpectrum, y: &GaussianMixtureSpectrum) -> Result<f64> {
    let (lo, hi, scale) = joint_window(x, y);
    let width = (hi - lo) / scale;
    let diff = |u: f64| {
        let omega = lo + u * scale;
        (x.pdf(omega) - y.pdf(omega)) * scale
    };
    let mut breaks = vec![0.0];
    let samples = 4096;
    let step = width / samples as f64;
    let mut prev = diff(0.0);
    for i in 1..=samples {
        let u = step * i as f64;
        let cur = diff(u);
        if prev != 0.0 && cur != 0.0 && prev.signum() != cur.signum() {
            breaks.push(bisect_root(&diff, u - step, u));
        }
        prev = cur;
    }
    breaks.push(width);
    let mut total = 0.0;
    for w in breaks.windows(2) {
        total += integrate_adaptive(w[0], w[1], QUAD_REL_TOL, 1e-16, |u| diff(u).abs())?;
    }
    Ok((0.5 * total).clamp(0.0, 1.0))
}

/// Overlap `∫ min(x, y) dω = 1 − D(x, y)` reported alongside bounds that
/// treat separated peaks as orthogonal.
pub fn spectral_overlap(x: &GaussianMixtureSpectrum, y: &GaussianMixtureSpectrum) -> Result<f64> {
    Ok(1.0 - spectral_trace_distance(x, y)?)
}

fn bisect_root<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Decoherence function `κ = ∫ f(ω) e^{iωφ} dω` at phase rate
/// `tau_phase = 2πΔn·t` (s): `Σ wₖ e^{iμₖφ} e^{−(σₖφ)²/2}`.
pub fn decoherence_function(s: &GaussianMixtureSpectrum, tau_phase: f64) -> C64 {
    s.iter()
        .map(|(w, c)| {
            let envelope = (-0.5 * (c.sigma * tau_phase).powi(2)).exp();
            C64::from_polar(w * envelope, c.mu * tau_phase)
        })
        .sum()
}

/// Quadrature route for [`decoherence_function`].
pub fn decoherence_function_quadrature(s: &GaussianMixtureSpectrum, tau_phase: f64) -> Result<C64> {
    let (lo, hi) = s.window();
    let scale = s.min_sigma();
    let center = 0.5 * (lo + hi);
    let width = (hi - lo) / scale;
    // factor out the carrier phase at the window center
    let part = |imag: bool| {
        integrate_adaptive(0.0, width, 1e-12, 1e-16, |u| {
            let omega = lo + u * scale;
            let phase = (omega - center) * tau_phase;
            let f = s.pdf(omega) * scale;
            if imag { f * phase.sin() } else { f * phase.cos() }
        })
    };
    let local = C64::new(part(false)?, part(true)?);
    Ok(local * C64::from_polar(1.0, center * tau_phase))
}

/// `|κ(τ)|` for the two-peak family with common width, in rescaled time
/// `τ = 2πσΔn·t`: `e^{−τ²/2} √(1 − 2A(1−A)(1 − cos Δητ))`.
pub fn two_peak_coherence(a: f64, delta_eta: f64, tau: f64) -> f64 {
    let h = a * (1.0 - a);
    let inner = (1.0 - 2.0 * h * (1.0 - (delta_eta * tau).cos())).max(0.0);
    (-0.5 * tau * tau).exp() * inner.sqrt()
}

/// The three frequency states used by the probe: `ξ₁ = Aξ₂ + (1−A)ξ₃`
/// with single-peak references `ξ₂`, `ξ₃` of common width.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoPeakFamily {
    pub a: f64,
    pub first: GaussianComponent,
    pub second: GaussianComponent,
}

impl TwoPeakFamily {
    pub fn new(a: f64, first: GaussianComponent, second: GaussianComponent) -> Result<Self> {
        Self::validate(a, &first, &second)?;
        Ok(TwoPeakFamily { a, first, second })
    }

    fn validate(a: f64, first: &GaussianComponent, second: &GaussianComponent) -> Result<()> {
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::Domain {
                name: "A",
                value: a,
                expected: "[0, 1]",
            });
        }
        if first.sigma != second.sigma {
            return Err(Error::Spectrum("two-peak family requires a common width".into()));
        }
        Ok(())
    }

    /// Peaks at `lambda1_nm`, `lambda2_nm`, both with the σ of a
    /// `fwhm_nm` filter evaluated at the mean wavelength.
    pub fn from_wavelengths(a: f64, lambda1_nm: f64, lambda2_nm: f64, fwhm_nm: f64) -> Result<Self> {
        if !(lambda1_nm > 0.0 && lambda2_nm > 0.0 && fwhm_nm > 0.0) {
            return Err(Error::Spectrum("wavelengths and FWHM must be positive".into()));
        }
        let sigma = sigma_from_fwhm_nm(0.5 * (lambda1_nm + lambda2_nm), fwhm_nm);
        Self::new(
            a,
            GaussianComponent::new(frequency_from_wavelength_nm(lambda1_nm), sigma)?,
            GaussianComponent::new(frequency_from_wavelength_nm(lambda2_nm), sigma)?,
        )
    }

    pub fn sigma(&self) -> f64 {
        self.first.sigma
    }

    pub fn delta_mu(&self) -> f64 {
        (self.second.mu - self.first.mu).abs()
    }

    pub fn delta_eta(&self) -> f64 {
        self.delta_mu() / self.sigma()
    }

    pub fn xi1(&self) -> GaussianMixtureSpectrum {
        GaussianMixtureSpectrum {
            components: vec![self.first, self.second],
            weights: vec![self.a, 1.0 - self.a],
        }
    }

    pub fn xi2(&self) -> GaussianMixtureSpectrum {
        GaussianMixtureSpectrum::single(self.first)
    }

    pub fn xi3(&self) -> GaussianMixtureSpectrum {
        GaussianMixtureSpectrum::single(self.second)
    }

    /// Rescaled time `τ = 2πσΔn·L/c` for a plate stack of total thickness
    /// `thickness_mm`.
    pub fn tau_for_thickness(&self, thickness_mm: f64, delta_n: f64) -> f64 {
        2.0 * PI * self.sigma() * delta_n * thickness_mm * 1e-3 / SPEED_OF_LIGHT
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn peaks(delta_eta: f64) -> (GaussianComponent, GaussianComponent) {
        let sigma = 5.8e11;
        let mu = 3.7e14;
        (
            GaussianComponent::new(mu, sigma).unwrap(),
            GaussianComponent::new(mu + delta_eta * sigma, sigma).unwrap(),
        )
    }

    #[test]
    fn pdf_peak_and_tails() {
        let (g1, g2) = peaks(30.0);
        let s = GaussianMixtureSpectrum::single(g1);
        assert_abs_diff_eq!(s.pdf(g1.mu), 1.0 / (2.0 * PI * g1.sigma * g1.sigma).sqrt(), epsilon = 1e-20);
        let mix = GaussianMixtureSpectrum::two_peak(0.5, g1, g2).unwrap();
        assert!(mix.pdf(0.5 * (g1.mu + g2.mu)) * g1.sigma < 1e-40);
    }

    #[test]
    fn pdf_integrates_to_one() {
        let (g1, g2) = peaks(4.0);
        let mix = GaussianMixtureSpectrum::two_peak(0.3, g1, g2).unwrap();
        let s = g1.sigma;
        let lo = g1.mu - 10.0 * s;
        let hi = g2.mu + 10.0 * s;
        let v = integrate_adaptive(0.0, (hi - lo) / s, 1e-13, 0.0, |u| mix.pdf(lo + u * s) * s).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn invalid_spectra_rejected() {
        assert!(GaussianComponent::new(1.0, 0.0).is_err());
        assert!(GaussianComponent::new(-1.0, 1.0).is_err());
        let (g1, g2) = peaks(3.0);
        assert!(GaussianMixtureSpectrum::new(vec![g1, g2], vec![0.5, 0.6]).is_err());
        assert!(GaussianMixtureSpectrum::new(vec![g1, g2], vec![1.2, -0.2]).is_err());
        assert!(GaussianMixtureSpectrum::two_peak(1.5, g1, g2).is_err());
    }

    #[test]
    fn identical_spectra() {
        let (g1, g2) = peaks(3.0);
        let mix = GaussianMixtureSpectrum::two_peak(0.3, g1, g2).unwrap();
        assert_abs_diff_eq!(spectral_alpha_fidelity(&mix, &mix, 0.6).unwrap(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(spectral_trace_distance(&mix, &mix).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn equal_width_closed_form_matches_quadrature() {
        // completing the square: ∫ G₁^α G₂^{1−α} = exp(−α(1−α)Δη²/2),
        // here α(1−α)Δη²/2 = 0.1875·16/2 = 1.5
        let (g1, g2) = peaks(4.0);
        let (x, y) = (
            GaussianMixtureSpectrum::single(g1),
            GaussianMixtureSpectrum::single(g2),
        );
        let closed = spectral_alpha_fidelity(&x, &y, 0.75).unwrap();
        assert_abs_diff_eq!(closed, (-1.5f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(closed, 0.22313016014842982, epsilon = 1e-15);
        let quad = spectral_alpha_fidelity_quadrature(&x, &y, 0.75).unwrap();
        assert_abs_diff_eq!(quad, closed, epsilon = 1e-8);
        for &alpha in &[0.5, 0.6, 0.9, 0.99] {
            for &eta in &[0.5, 2.0, 8.0] {
                let (g1, g2) = peaks(eta);
                let (x, y) = (
                    GaussianMixtureSpectrum::single(g1),
                    GaussianMixtureSpectrum::single(g2),
                );
                let a = spectral_alpha_fidelity(&x, &y, alpha).unwrap();
                let b = spectral_alpha_fidelity_quadrature(&x, &y, alpha).unwrap();
                assert!((a - b).abs() <= 1e-9 * a.max(1e-300) + 1e-14, "{alpha} {eta}: {a} {b}");
            }
        }
    }

    #[test]
    fn mixture_fidelity_dominates_coefficient_power() {
        for &eta in &[4.0, 8.0, 16.0] {
            let (g1, g2) = peaks(eta);
            for i in 1..=9 {
                let a = i as f64 / 10.0;
                let fam = TwoPeakFamily::new(a, g1, g2).unwrap();
                for &alpha in &[0.5, 0.75, 0.95] {
                    let f12 = spectral_alpha_fidelity(&fam.xi1(), &fam.xi2(), alpha).unwrap();
                    let f13 = spectral_alpha_fidelity(&fam.xi1(), &fam.xi3(), alpha).unwrap();
                    assert!(f12 >= a.powf(alpha) - 1e-12);
                    assert!(f13 >= (1.0 - a).powf(alpha) - 1e-12);
                }
                let d12 = spectral_trace_distance(&fam.xi1(), &fam.xi2()).unwrap();
                let d13 = spectral_trace_distance(&fam.xi1(), &fam.xi3()).unwrap();
                assert!(d12 <= 1.0 - a + 1e-9);
                assert!(d13 <= a + 1e-9);
            }
        }
    }

    #[test]
    fn separated_peaks_are_nearly_orthogonal() {
        let (g1, g2) = peaks(12.0);
        let (x, y) = (
            GaussianMixtureSpectrum::single(g1),
            GaussianMixtureSpectrum::single(g2),
        );
        // overlap erfc(Δη/2√2) ≈ 2e-9 at Δη = 12
        assert_abs_diff_eq!(spectral_trace_distance(&x, &y).unwrap(), 1.0, epsilon = 1e-6);
        let fam = TwoPeakFamily::new(0.35, g1, g2).unwrap();
        let d = spectral_trace_distance(&fam.xi1(), &fam.xi2()).unwrap();
        assert_abs_diff_eq!(d, 0.65, epsilon = 1e-6);
        assert!(spectral_overlap(&x, &y).unwrap() < 1e-6);
    }

    #[test]
    fn trace_distance_of_shifted_gaussians() {
        // equal-width Gaussians: D = erf(Δη / (2√2)); oracle by series
        let (g1, g2) = peaks(1.0);
        let (x, y) = (
            GaussianMixtureSpectrum::single(g1),
            GaussianMixtureSpectrum::single(g2),
        );
        let z: f64 = 1.0 / (2.0 * 2f64.sqrt());
        // erf Maclaurin series, converges fast for small z
        let mut erf = 0.0;
        let mut term = z;
        for n in 0..40 {
            erf += term / (2 * n + 1) as f64;
            term *= -z * z / (n + 1) as f64;
        }
        erf *= 2.0 / PI.sqrt();
        assert_abs_diff_eq!(spectral_trace_distance(&x, &y).unwrap(), erf, epsilon = 1e-10);
    }

    #[test]
    fn decoherence_function_examples() {
        let (g1, g2) = peaks(5.0);
        let mix = GaussianMixtureSpectrum::two_peak(0.5, g1, g2).unwrap();
        assert_abs_diff_eq!(decoherence_function(&mix, 0.0).norm(), 1.0, epsilon = 1e-15);
        // Δητ = π with A = 1/2 cancels the two peaks
        let tau = PI / 5.0;
        let phase_rate = tau / g1.sigma;
        assert_abs_diff_eq!(decoherence_function(&mix, phase_rate).norm(), 0.0, epsilon = 1e-12);

        let single = GaussianMixtureSpectrum::single(g1);
        let mut last = 1.0;
        for i in 1..100 {
            let tau = 0.05 * i as f64;
            let k = decoherence_function(&single, tau / g1.sigma).norm();
            assert_abs_diff_eq!(k, (-tau * tau / 2.0).exp(), epsilon = 1e-15);
            assert!(k < last);
            last = k;
        }
    }

    #[test]
    fn two_peak_coherence_reduction() {
        let (g1, g2) = peaks(7.0);
        for i in 0..=10 {
            let a = i as f64 / 10.0;
            let mix = GaussianMixtureSpectrum::two_peak(a, g1, g2).unwrap();
            for j in 0..60 {
                let tau = 0.05 * j as f64;
                let direct = decoherence_function(&mix, tau / g1.sigma).norm();
                assert_abs_diff_eq!(direct, two_peak_coherence(a, 7.0, tau), epsilon = 1e-12);
                assert!(direct <= 1.0 + 1e-15);
            }
        }
    }

    #[test]
    fn decoherence_closed_form_matches_quadrature() {
        let (g1, g2) = peaks(6.3);
        let mix = GaussianMixtureSpectrum::two_peak(0.7, g1, g2).unwrap();
        for j in 1..30 {
            let tau = 0.1 * j as f64;
            let closed = decoherence_function(&mix, tau / g1.sigma);
            let quad = decoherence_function_quadrature(&mix, tau / g1.sigma).unwrap();
            assert!((closed - quad).norm() <= 1e-8 * closed.norm(), "τ={tau}: {closed} {quad}");
        }
    }

    #[test]
    fn wavelength_conversion() {
        let fam = TwoPeakFamily::from_wavelengths(0.7, 810.0, 818.0, 3.0).unwrap();
        let sigma = SPEED_OF_LIGHT / (814e-9f64).powi(2) * 3e-9 / 2.3548200450309493;
        assert_abs_diff_eq!(fam.sigma() / sigma, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fam.delta_eta(), 6.2797, epsilon = 1e-3);
        assert_eq!(fam.xi1().delta_eta(), Some(fam.delta_eta()));
    }
}
