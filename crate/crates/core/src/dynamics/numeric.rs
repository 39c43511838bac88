//! Spectrum from the two-time correlations of the emitted field.
//!
//! For a channel field Ê = A_c â + A_d σ̂₋ the regression theorem turns the
//! double transform over the full (t, t′) quadrant into
//!
//! ```text
//! S(ω) = 2 Re wᵀ R(ω) u,   R(ω) = ∫₀^∞ e^{iωτ} exp(Mτ) dτ
//! u = A_c* (∫p_c, ∫x) + A_d* (∫x*, ∫p_d)
//! ```
//!
//! so only the time integrals of the equal-time moments are needed.

use nalgebra::SMatrix;
use num_complex::Complex64;

use super::moments::MomentGenerator;
use super::propagator::{matvec, RegressionGenerator};
use crate::error::{invalid, Error, Result};
use crate::par::{self, Execution};
use crate::spectrum::CollectionChannel;
use crate::trace::{Axis, SpectrumTrace};
use crate::units::SystemParams;

/// Largest remaining population accepted at the integration horizon.
pub const TAIL_LIMIT: f64 = 1e-4;
const TAIL_TARGET: f64 = 1e-10;

/// Time integrals of the equal-time moments over `[0, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratedMoments {
    pub p_d: f64,
    pub p_c: f64,
    pub x_cross: Complex64,
    pub horizon: f64,
    /// Population left in the system at the horizon.
    pub tail: f64,
}

impl IntegratedMoments {
    /// Quanta emitted up to the horizon.
    pub fn emitted(&self, params: &SystemParams) -> f64 {
        params.gamma_s.value() * self.p_d + 2.0 * params.kappa.value() * self.p_c
    }
}

/// Integrate the moments from the excited dipole with the exact exponential
/// of the augmented generator `[[A, I], [0, 0]]`. The horizon starts at ten
/// times the slowest decay time and is doubled until the remaining
/// population is negligible.
pub fn integrated_moments(params: &SystemParams) -> Result<IntegratedMoments> {
    params.validate()?;
    let gen = MomentGenerator::new(params);
    let rate = gen
        .slowest_rate()
        .ok_or_else(|| Error::Numerical("no decay channel: population never leaves the system".into()))?;
    let a = gen.matrix();
    let mut horizon = 10.0 / rate;
    let mut best = None;
    for _ in 0..12 {
        let b = SMatrix::<f64, 8, 8>::from_fn(|i, j| match (i < 4, j < 4) {
            (true, true) => a[i][j] * horizon,
            (true, false) if i == j - 4 => horizon,
            _ => 0.0,
        });
        let e = b.exp();
        let tail = e[(0, 0)] + e[(1, 0)];
        if !tail.is_finite() || !e[(0, 4)].is_finite() {
            return Err(Error::Numerical(format!("moment integral not finite at horizon {horizon:e}")));
        }
        let m = IntegratedMoments {
            p_d: e[(0, 4)],
            p_c: e[(1, 4)],
            x_cross: Complex64::new(e[(2, 4)], e[(3, 4)]),
            horizon,
            tail,
        };
        best = Some(m);
        if tail.abs() < TAIL_TARGET {
            break;
        }
        horizon *= 2.0;
    }
    let m = best.expect("at least one horizon tried");
    if m.tail.abs() >= TAIL_LIMIT {
        return Err(Error::Numerical(format!(
            "truncation tail {:e} at horizon {:e} s exceeds {TAIL_LIMIT:e}",
            m.tail, m.horizon
        )));
    }
    log::debug!("moment integrals: horizon {:e} s, tail {:e}", m.horizon, m.tail);
    Ok(m)
}

/// Channel spectrum on an absolute angular-frequency grid (rad/s).
pub fn numeric_spectrum(params: &SystemParams, ch: &CollectionChannel, omega_grid: &[f64]) -> Result<SpectrumTrace> {
    numeric_spectrum_with(params, ch, omega_grid, Execution::default())
}

pub fn numeric_spectrum_with(
    params: &SystemParams,
    ch: &CollectionChannel,
    omega_grid: &[f64],
    exec: Execution,
) -> Result<SpectrumTrace> {
    ch.validate()?;
    if omega_grid.is_empty() {
        return Err(invalid("omega_grid", "empty"));
    }
    let kernel = SpectrumKernel::new(params, ch)?;
    let intensity = par::map(exec, omega_grid, |&w| kernel.at(w));
    SpectrumTrace::new(Axis::OmegaRadS, omega_grid.to_vec(), intensity)
}

/// Precomputed pieces of the spectrum, evaluated per frequency.
#[derive(Debug, Clone)]
pub struct SpectrumKernel {
    gen: RegressionGenerator,
    omega_c: f64,
    w: [Complex64; 2],
    u: [Complex64; 2],
    pub moments: IntegratedMoments,
}

impl SpectrumKernel {
    pub fn new(params: &SystemParams, ch: &CollectionChannel) -> Result<Self> {
        let moments = integrated_moments(params)?;
        let gen = RegressionGenerator::cavity_frame(params);
        if !gen.is_stable() {
            return Err(Error::Numerical("regression generator has a non-decaying pole".into()));
        }
        let a_d = Complex64::from_polar(ch.eps_d * params.gamma_s.value().sqrt(), -ch.phi_d);
        let a_c = Complex64::from_polar(ch.eps_c * (2.0 * params.kappa.value()).sqrt(), -ch.phi_c);
        let x = moments.x_cross;
        let u = [
            a_c.conj() * moments.p_c + a_d.conj() * x.conj(),
            a_c.conj() * x + a_d.conj() * moments.p_d,
        ];
        Ok(Self {
            gen,
            omega_c: params.omega_c.value(),
            w: [a_c, a_d],
            u,
            moments,
        })
    }

    /// S at absolute angular frequency `omega`.
    pub fn at(&self, omega: f64) -> f64 {
        let r = self.gen.laplace(omega - self.omega_c);
        let ru = matvec(&r, self.u);
        2.0 * (self.w[0] * ru[0] + self.w[1] * ru[1]).re
    }
}
