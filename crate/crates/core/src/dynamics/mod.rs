//! Master-equation dynamics of the dipole-cavity system and the spectra
//! they produce.

pub mod moments;
pub mod numeric;
pub mod ode;
pub mod propagator;

use num_complex::Complex64;

pub use moments::{emitted_quanta, moment_evolution, moment_evolution_from, MomentState};
pub use numeric::{integrated_moments, numeric_spectrum, numeric_spectrum_with, IntegratedMoments, SpectrumKernel};
pub use propagator::{regression_propagator, Mat2, RegressionGenerator};

use crate::error::Result;
use crate::spectrum::{detected_spectrum, CollectionChannel};
use crate::trace::SpectrumTrace;
use crate::units::SystemParams;

/// Double-transformed two-time correlations in the fast-dephasing limit
/// with ω_d = ω_c. Evaluate with the absolute angular frequency ω; the
/// detuning is Δω = ω_c − ω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationSet {
    g: f64,
    kappa: f64,
    gamma_s: f64,
    gamma_p: f64,
    omega_c: f64,
}

impl CorrelationSet {
    fn cavity_pole(&self, omega: f64) -> Complex64 {
        Complex64::new(self.kappa, self.omega_c - omega)
    }

    pub fn c_cc(&self, omega: f64) -> Complex64 {
        let a = self.g * self.g / (self.gamma_p * self.gamma_s * self.kappa);
        a / self.cavity_pole(omega)
    }

    pub fn c_dd(&self, _omega: f64) -> Complex64 {
        Complex64::new(1.0 / (self.gamma_p * self.gamma_s), 0.0)
    }

    pub fn c_cd(&self, _omega: f64) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }

    pub fn c_dc(&self, omega: f64) -> Complex64 {
        self.g / (self.gamma_p * self.gamma_s) / self.cavity_pole(omega)
    }
}

/// Room-temperature correlations. No regime check is made; the caller is
/// responsible for γ_p dominating every other rate and detuning.
pub fn closed_form_correlations(params: &SystemParams) -> CorrelationSet {
    CorrelationSet {
        g: params.g.value(),
        kappa: params.kappa.value(),
        gamma_s: params.gamma_s.value(),
        gamma_p: params.gamma_p.value(),
        omega_c: params.omega_c.value(),
    }
}

/// Closed-form spectrum on the same scale as [`numeric_spectrum`]: the
/// full-quadrant transform counts each ordering of (t, t′), twice the
/// one-sided [`detected_spectrum`].
pub fn closed_form_spectrum(params: &SystemParams, ch: &CollectionChannel, omega_grid: &[f64]) -> Result<SpectrumTrace> {
    let mut s = detected_spectrum(params, ch, omega_grid)?;
    s.intensity.iter_mut().for_each(|v| *v *= 2.0);
    Ok(s)
}

/// ‖a − b‖₂ / ‖b‖₂.
pub fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}
