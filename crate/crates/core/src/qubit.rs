//! Qubit density matrices and the distance measures used by the probing
//! protocol: trace distance, α-fidelity, purity and von Neumann entropy.
//!
//! States are stored in the `{|H⟩, |V⟩}` polarization basis. All functions
//! are closed-form; fractional matrix powers are taken through the
//! spectral decomposition, restricted to the support of the matrix.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, check_alpha};
use crate::linalg::{C64, Mat2};

/// Hermiticity and trace tolerance at construction.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Negative eigenvalues above `-PSD_TOL` are clamped to zero; anything more
/// negative is rejected.
pub const PSD_TOL: f64 = 1e-10;
/// Eigenvalues below this are treated as outside the support when taking
/// fractional powers.
pub const SUPPORT_TOL: f64 = 1e-12;

/// Valid qubit density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitState {
    m: Mat2,
}

/// Eigen-decomposition of a [`QubitState`], eigenvalues descending.
#[derive(Clone, Copy, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: [f64; 2],
    pub eigenvectors: [[C64; 2]; 2],
}

impl QubitState {
    /// Validates `m` and returns the state. Small negative eigenvalues
    /// (within [`PSD_TOL`]) are clamped and the trace renormalized.
    pub fn new(m: Mat2) -> Result<Self> {
        let herm = m.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let trace = m.trace();
        if (trace.re - 1.0).abs() > HERMITIAN_TOL || !trace.re.is_finite() {
            return Err(Error::InvalidTrace(trace.re));
        }
        Self::project(m.hermitian_part(), PSD_TOL)
    }

    /// Builds a state from a Hermitian matrix whose trace and positivity
    /// may be off by rounding (channel outputs). Renormalizes the trace.
    pub(crate) fn from_numeric(m: Mat2) -> Result<Self> {
        let h = m.hermitian_part();
        let tr = h.trace().re;
        if !(tr > 0.0) {
            return Err(Error::InvalidTrace(tr));
        }
        Self::project(h.scale(C64::from(1.0 / tr)), PSD_TOL)
    }

    /// Clamps eigenvalues below zero if they are above `-tol`.
    fn project(h: Mat2, tol: f64) -> Result<Self> {
        let eig = h.hermitian_eigen();
        let [hi, lo] = eig.eigenvalues();
        if lo < -tol {
            return Err(Error::NotPositive(lo));
        }
        if lo < 0.0 {
            let total = hi;
            return Ok(QubitState {
                m: eig.apply(hi / total, 0.0),
            });
        }
        Ok(QubitState { m: h })
    }

    /// Projection of an arbitrary Hermitian unit-trace matrix onto the
    /// state space: negative eigenvalues are set to zero and the trace
    /// renormalized. Never fails for finite input.
    pub fn nearest_physical(m: Mat2) -> Self {
        let h = m.hermitian_part();
        let eig = h.hermitian_eigen();
        let [hi, lo] = eig.eigenvalues();
        let (hi, lo) = (hi.max(0.0), lo.max(0.0));
        let total = hi + lo;
        if total <= 0.0 {
            return Self::maximally_mixed();
        }
        QubitState {
            m: eig.apply(hi / total, lo / total),
        }
    }

    /// `½(I + r·σ)`; requires `|r| ≤ 1`.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        Self::new(Mat2::from_pauli(0.5, r.map(|x| 0.5 * x)))
    }

    /// Pure state `|ψ⟩⟨ψ|` from an (unnormalized) amplitude vector.
    pub fn pure(psi: [C64; 2]) -> Result<Self> {
        let norm = psi[0].norm_sqr() + psi[1].norm_sqr();
        if !(norm > 0.0) {
            return Err(Error::InvalidTrace(norm));
        }
        let m = Mat2::new(
            psi[0] * psi[0].conj(),
            psi[0] * psi[1].conj(),
            psi[1] * psi[0].conj(),
            psi[1] * psi[1].conj(),
        );
        Self::from_numeric(m.scale(C64::from(1.0 / norm)))
    }

    pub fn horizontal() -> Self {
        QubitState {
            m: Mat2::diag(C64::from(1.0), C64::from(0.0)),
        }
    }

    pub fn vertical() -> Self {
        QubitState {
            m: Mat2::diag(C64::from(0.0), C64::from(1.0)),
        }
    }

    /// `|+⟩ = (|H⟩ + |V⟩)/√2`, the probe state of the protocol.
    pub fn plus() -> Self {
        QubitState {
            m: Mat2::from_pauli(0.5, [0.5, 0.0, 0.0]),
        }
    }

    /// `|−⟩ = (|H⟩ − |V⟩)/√2`.
    pub fn minus() -> Self {
        QubitState {
            m: Mat2::from_pauli(0.5, [-0.5, 0.0, 0.0]),
        }
    }

    pub fn maximally_mixed() -> Self {
        QubitState {
            m: Mat2::diag(C64::from(0.5), C64::from(0.5)),
        }
    }

    /// `½[[1, κ], [κ*, 1]]`, the dephased `|+⟩` state.
    pub fn dephased_plus(kappa: C64) -> Result<Self> {
        Self::new(Mat2::new(
            C64::from(0.5),
            kappa * 0.5,
            kappa.conj() * 0.5,
            C64::from(0.5),
        ))
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.m.get(i, j)
    }

    /// Bloch vector `r` with `ρ = ½(I + r·σ)`.
    pub fn bloch(&self) -> [f64; 3] {
        self.m.pauli().1.map(|x| 2.0 * x)
    }

    pub fn spectral(&self) -> SpectralDecomposition {
        let eig = self.m.hermitian_eigen();
        SpectralDecomposition {
            eigenvalues: self.eigenvalues(),
            eigenvectors: eig.eigenvectors(),
        }
    }

    /// Eigenvalues, descending, clamped to `[0, 1]`.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let eig = self.m.hermitian_eigen();
        let [hi, lo] = eig.eigenvalues_accurate(self.m.det().re);
        [hi.clamp(0.0, 1.0), lo.clamp(0.0, 1.0)]
    }

    /// Fractional power on the support: eigenvalues below [`SUPPORT_TOL`]
    /// map to zero (`0^x := 0` for `x > 0`).
    pub fn powf(&self, x: f64) -> Mat2 {
        let [hi, lo] = self.eigenvalues();
        let p = |l: f64| if l < SUPPORT_TOL { 0.0 } else { l.powf(x) };
        self.m.hermitian_eigen().apply(p(hi), p(lo))
    }

    /// `U ρ U†` for unitary `U`.
    pub fn conjugated(&self, u: &Mat2) -> Result<Self> {
        Self::from_numeric(self.m.conjugate_by(u))
    }
}

impl fmt::Display for QubitState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.m.0;
        write!(
            f,
            "[[{:.6}, {:.6}{:+.6}i], [{:.6}{:+.6}i, {:.6}]]",
            m[0][0].re, m[0][1].re, m[0][1].im, m[1][0].re, m[1][0].im, m[1][1].re
        )
    }
}

/// Serialized as the Bloch vector.
impl Serialize for QubitState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.bloch().serialize(s)
    }
}

impl<'de> Deserialize<'de> for QubitState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = <[f64; 3]>::deserialize(d)?;
        QubitState::from_bloch(r).map_err(serde::de::Error::custom)
    }
}

/// `½‖a − b‖₁`. For qubits this is the Euclidean length of the Pauli
/// vector of `a − b`.
pub fn trace_distance(a: &QubitState, b: &QubitState) -> f64 {
    let d = *a.matrix() - *b.matrix();
    let (_, n) = d.pauli();
    n[0].hypot(n[1]).hypot(n[2]).min(1.0)
}

/// α-fidelity `tr[(b^s a b^s)^α]` with `s = (1−α)/(2α)`, `α ∈ [1/2, 1)`.
///
/// Equals the standard (root) fidelity at `α = 1/2`. Orthogonal supports
/// give 0.
pub fn alpha_fidelity(a: &QubitState, b: &QubitState, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let s = (1.0 - alpha) / (2.0 * alpha);
    let bs = b.powf(s);
    let inner = bs * *a.matrix() * bs;
    // det(b^s a b^s) = det(b)^{2s} det(a), more accurate than the eigenvalue
    // difference for nearly singular products
    let [b_hi, b_lo] = b.eigenvalues();
    let [a_hi, a_lo] = a.eigenvalues();
    let support = |l: f64| if l < SUPPORT_TOL { 0.0 } else { l.powf(2.0 * s) };
    let det = support(b_hi) * support(b_lo) * a_hi * a_lo;
    let eig = inner.hermitian_eigen();
    let [hi, lo] = eig.eigenvalues_accurate(det);
    let p = |l: f64| if l <= 0.0 { 0.0 } else { l.powf(alpha) };
    Ok((p(hi) + p(lo)).clamp(0.0, 1.0))
}

/// `tr[ρ²]`.
pub fn purity(a: &QubitState) -> f64 {
    a.matrix().0.iter().flatten().map(|z| z.norm_sqr()).sum()
}

/// `−Σ λ ln λ` in nats, with `0 ln 0 := 0`.
pub fn von_neumann_entropy(a: &QubitState) -> f64 {
    a.eigenvalues()
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.ln())
        .sum()
}
