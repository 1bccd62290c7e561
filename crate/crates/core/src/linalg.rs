//! Closed-form complex 2×2 matrix algebra.
//!
//! Every Hermitian 2×2 matrix is written as `m·I + n·σ` with a real
//! Bloch-like vector `n`; eigenvalues are `m ± |n|` and any spectral
//! function is `½(f₊ + f₋)·I + ½(f₊ − f₋)·n̂·σ`. This avoids iterative
//! eigensolvers entirely.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
#[cfg(test)]
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// A complex 2×2 matrix in row-major order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);
    pub const ZERO: Mat2 = Mat2([[ZERO, ZERO], [ZERO, ZERO]]);

    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn diag(a: C64, d: C64) -> Self {
        Mat2([[a, ZERO], [ZERO, d]])
    }

    /// Real rotation matrix `[[cos, −sin], [sin, cos]]`.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Mat2::new(C64::from(c), C64::from(-s), C64::from(s), C64::from(c))
    }

    /// `½(I + r·σ)` style construction: `m·I + n·σ`.
    pub fn from_pauli(m: f64, n: [f64; 3]) -> Self {
        Mat2::new(
            C64::from(m + n[2]),
            C64::new(n[0], -n[1]),
            C64::new(n[0], n[1]),
            C64::from(m - n[2]),
        )
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[i][j]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Mat2::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = &self.0;
        Mat2::new(m[0][0] * s, m[0][1] * s, m[1][0] * s, m[1][1] * s)
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Deviation from Hermiticity, `max |m_ij − conj(m_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        (*self - self.adjoint()).max_abs()
    }

    /// Hermitian part `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        (*self + self.adjoint()).scale(C64::from(0.5))
    }

    /// `U M U†`.
    pub fn conjugate_by(&self, u: &Mat2) -> Self {
        *u * *self * u.adjoint()
    }

    /// Deviation of `M M†` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        (*self * self.adjoint() - Mat2::IDENTITY).max_abs()
    }

    /// Pauli decomposition of the Hermitian part: `(m, n)` with
    /// `H = m·I + n·σ`.
    pub fn pauli(&self) -> (f64, [f64; 3]) {
        let m = &self.0;
        let mean = 0.5 * (m[0][0].re + m[1][1].re);
        let b = 0.5 * (m[0][1] + m[1][0].conj());
        (mean, [b.re, -b.im, 0.5 * (m[0][0].re - m[1][1].re)])
    }

    /// Eigen-decomposition of the Hermitian part.
    pub fn hermitian_eigen(&self) -> HermitianEigen {
        let (mean, n) = self.pauli();
        let radius = n[0].hypot(n[1]).hypot(n[2]);
        HermitianEigen { mean, n, radius }
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        Mat2::new(
            a[0][0] + b[0][0],
            a[0][1] + b[0][1],
            a[1][0] + b[1][0],
            a[1][1] + b[1][1],
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        Mat2::new(
            a[0][0] - b[0][0],
            a[0][1] - b[0][1],
            a[1][0] - b[1][0],
            a[1][1] - b[1][1],
        )
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

/// Spectrum of a Hermitian 2×2 matrix in Pauli form.
#[derive(Clone, Copy, Debug)]
pub struct HermitianEigen {
    mean: f64,
    n: [f64; 3],
    radius: f64,
}

impl HermitianEigen {
    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        [self.mean + self.radius, self.mean - self.radius]
    }

    /// Eigenvalues with the smaller one recomputed as `det / λ_max` when
    /// that is more accurate (near-singular PSD matrices).
    pub fn eigenvalues_accurate(&self, det: f64) -> [f64; 2] {
        let hi = self.mean + self.radius;
        let lo = self.mean - self.radius;
        if hi > 0.0 && lo.abs() < 1e-6 * hi {
            [hi, det / hi]
        } else {
            [hi, lo]
        }
    }

    /// Unit axis `n̂`; `None` for a multiple of the identity.
    pub fn axis(&self) -> Option<[f64; 3]> {
        if self.radius <= f64::EPSILON * self.mean.abs().max(1e-300) {
            None
        } else {
            Some(self.n.map(|x| x / self.radius))
        }
    }

    /// Orthonormal eigenvectors matching [`eigenvalues`](Self::eigenvalues).
    pub fn eigenvectors(&self) -> [[C64; 2]; 2] {
        let Some([nx, ny, nz]) = self.axis() else {
            return [[ONE, ZERO], [ZERO, ONE]];
        };
        // off-diagonal entry of n̂·σ is nx − i ny
        let b = C64::new(nx, -ny);
        let v = if nz >= 0.0 {
            [C64::from(nz + 1.0), b.conj()]
        } else {
            [b, C64::from(1.0 - nz)]
        };
        let norm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        let plus = [v[0] / norm, v[1] / norm];
        let minus = [-plus[1].conj(), plus[0].conj()];
        [plus, minus]
    }

    /// `f(H)` given `f` already evaluated at both eigenvalues.
    pub fn apply(&self, f_hi: f64, f_lo: f64) -> Mat2 {
        match self.axis() {
            None => Mat2::diag(C64::from(f_hi), C64::from(f_hi)),
            Some(axis) => {
                let half_diff = 0.5 * (f_hi - f_lo);
                Mat2::from_pauli(0.5 * (f_hi + f_lo), axis.map(|x| x * half_diff))
            }
        }
    }
}
