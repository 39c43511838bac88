//! Two-time propagation of the (â, σ̂₋) amplitudes.
//!
//! Within the single-excitation manifold the pair obeys the closed linear
//! system d/dt v = M v with
//!
//! ```text
//! M = [ −(iω_c + κ)          g               ]
//!     [ −g          −(iω_d + γ_s/2 + γ_p)    ]
//! ```
//!
//! and, by quantum regression, so do ⟨Â(t) â(t+τ)⟩ and ⟨Â(t) σ̂₋(t+τ)⟩ for
//! any Â. Functions of M are evaluated through the divided difference of
//! the function over the two eigenvalues, which stays exact as the
//! eigenvalues merge (defective M).

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::units::SystemParams;

pub type Mat2 = [[Complex64; 2]; 2];

pub fn identity() -> Mat2 {
    let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    [[o, z], [z, o]]
}

pub fn matmul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn matvec(a: &Mat2, v: [Complex64; 2]) -> [Complex64; 2] {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

/// The regression generator M in a frame rotating at `frame` rad/s.
#[derive(Debug, Clone, Copy)]
pub struct RegressionGenerator {
    pub m: Mat2,
    eig: (Complex64, Complex64),
}

impl RegressionGenerator {
    pub fn new(params: &SystemParams, frame: f64) -> Self {
        let wc = params.omega_c.value() - frame;
        let wd = params.omega_d.value() - frame;
        let g = Complex64::new(params.g.value(), 0.0);
        let a = -Complex64::new(params.kappa.value(), wc);
        let d = -Complex64::new(0.5 * params.gamma_s.value() + params.gamma_p.value(), wd);
        let m = [[a, g], [-g, d]];
        Self { m, eig: eigenvalues(&m) }
    }

    /// Lab frame.
    pub fn lab(params: &SystemParams) -> Self {
        Self::new(params, 0.0)
    }

    /// Frame rotating with the cavity.
    pub fn cavity_frame(params: &SystemParams) -> Self {
        Self::new(params, params.omega_c.value())
    }

    pub fn eigenvalues(&self) -> (Complex64, Complex64) {
        self.eig
    }

    /// f(M) = f[λ₁, λ₂] (M − λ₂ I) + f(λ₂) I.
    fn apply(&self, f_l2: Complex64, divided: Complex64) -> Mat2 {
        let (_, l2) = self.eig;
        let mut out = self.m;
        out[0][0] -= l2;
        out[1][1] -= l2;
        for row in out.iter_mut() {
            for v in row.iter_mut() {
                *v *= divided;
            }
        }
        out[0][0] += f_l2;
        out[1][1] += f_l2;
        out
    }

    /// exp(M τ).
    pub fn propagator(&self, tau: f64) -> Mat2 {
        let (l1, l2) = self.eig;
        let e2 = (l2 * tau).exp();
        // (e^{λ₁τ} − e^{λ₂τ}) / (λ₁ − λ₂) = τ e^{λ₂τ} φ₁((λ₁ − λ₂)τ)
        let dd = e2 * tau * phi1((l1 - l2) * tau);
        self.apply(e2, dd)
    }

    /// ∫₀^∞ e^{iωτ} exp(Mτ) dτ = −(M + iω)⁻¹, assembled from the
    /// eigenvalue transforms −1/(λ + iω). Requires both eigenvalues in the
    /// open left half-plane.
    pub fn laplace(&self, omega: f64) -> Mat2 {
        let (l1, l2) = self.eig;
        let iw = Complex64::new(0.0, omega);
        let f2 = -1.0 / (l2 + iw);
        // divided difference of −1/(λ + iω)
        let dd = 1.0 / ((l1 + iw) * (l2 + iw));
        self.apply(f2, dd)
    }

    pub fn is_stable(&self) -> bool {
        self.eig.0.re < 0.0 && self.eig.1.re < 0.0
    }
}

/// Eigenvalues of a 2×2 matrix, ordered so that λ₂ has the larger real part.
fn eigenvalues(m: &Mat2) -> (Complex64, Complex64) {
    let mean = 0.5 * (m[0][0] + m[1][1]);
    let half_diff = 0.5 * (m[0][0] - m[1][1]);
    let s = (half_diff * half_diff + m[0][1] * m[1][0]).sqrt();
    let (a, b) = (mean + s, mean - s);
    if a.re > b.re {
        (b, a)
    } else {
        (a, b)
    }
}

/// φ₁(z) = (eᶻ − 1)/z, with its series near zero.
fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < 1e-4 {
        1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0))
    } else {
        (z.exp() - 1.0) / z
    }
}

/// exp(M τ) in the lab frame.
pub fn regression_propagator(params: &SystemParams, tau: f64) -> Result<Mat2> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(invalid("tau", format!("must be finite and >= 0, got {tau}")));
    }
    params.validate()?;
    Ok(RegressionGenerator::lab(params).propagator(tau))
}
