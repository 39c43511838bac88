//! Backscattering and radiation loss from a sub-wavelength dielectric
//! particle sitting on a whispering-gallery resonator.
//!
//! The particle couples the degenerate clockwise and counter-clockwise
//! traveling modes with rate β, producing standing-wave doublets at
//! ω₀ ∓ |β|. The lower-frequency member has its antinode on the particle
//! and picks up the particle's radiation loss; the upper one has a node
//! there.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, invalid, Result};
use crate::trace::{Axis, SpectrumTrace};
use crate::units::{AngularFrequency, ModeGeometry, Rate, Scatterer, EPSILON_0, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackscatterResult {
    pub beta_mag: Rate,
    pub xi: f64,
    /// ω₀ / 2|β|
    pub q_beta: f64,
    pub omega_minus: AngularFrequency,
    pub omega_plus: AngularFrequency,
}

impl BackscatterResult {
    /// Doublet splitting 2|β| as an ordinary frequency, Hz.
    pub fn splitting_hz(&self) -> f64 {
        2.0 * self.beta_mag.hz()
    }

    /// Normalized splitting 2|β| / ω₀.
    pub fn normalized_splitting(&self) -> f64 {
        1.0 / self.q_beta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoubletLoss {
    pub q_low: f64,
    pub q_high: f64,
}

fn check_inputs(mode: &ModeGeometry, sc: &Scatterer) -> Result<()> {
    mode.validate()?;
    sc.validate()?;
    let size = sc.v_nc.cbrt();
    let limit = mode.lambda0 / sc.n_nc;
    if size >= limit {
        log::warn!(
            "scatterer size {size:.3e} m is not sub-wavelength (λ/n = {limit:.3e} m); point-dipole results are unreliable"
        );
    }
    Ok(())
}

/// Coupling between the traveling-wave pair; the phase origin is the
/// scatterer azimuth, so ξ = 0.
pub fn backscatter(mode: &ModeGeometry, sc: &Scatterer) -> Result<BackscatterResult> {
    backscatter_with_phase(mode, sc, 0.0)
}

pub fn backscatter_with_phase(mode: &ModeGeometry, sc: &Scatterer, xi: f64) -> Result<BackscatterResult> {
    check_inputs(mode, sc)?;
    let omega0 = mode.omega0()?.value();
    // 2|β|/ω₀ = (n² − 1) V_nc / (η V_tw) with η the peak-to-local factor
    let inv_q_beta = sc.contrast() * sc.v_nc * sc.eta_at_site / mode.v_tw_m3();
    let beta = 0.5 * omega0 * inv_q_beta;
    Ok(BackscatterResult {
        beta_mag: Rate::new(beta)?,
        xi,
        q_beta: 1.0 / inv_q_beta,
        omega_minus: AngularFrequency::new(omega0 - beta)?,
        omega_plus: AngularFrequency::new(omega0 + beta)?,
    })
}

/// Radiation-limited Q of the standing-wave mode whose antinode sits on
/// the particle: Q_s = 3λ₀³ V_eff / (4π² η (n² − 1)² V_nc²), with η the
/// local-to-peak ratio and V_eff the standing-wave volume.
pub fn scattering_q(mode: &ModeGeometry, sc: &Scatterer) -> Result<f64> {
    check_inputs(mode, sc)?;
    let lambda3 = mode.lambda0.powi(3);
    let c = sc.contrast();
    Ok(3.0 * lambda3 * mode.v_eff_m3() / (4.0 * PI * PI * sc.eta_at_site * c * c * sc.v_nc * sc.v_nc))
}

/// Cycle-averaged power radiated by the induced dipole of a point particle
/// in a local field of amplitude `e_field_at_site` (V/m).
pub fn radiated_power(e_field_at_site: f64, sc: &Scatterer, omega: AngularFrequency) -> Result<f64> {
    sc.validate()?;
    let w = omega.value();
    let k0 = w / SPEED_OF_LIGHT;
    let c = sc.contrast();
    let prefactor = w * k0.powi(3) * c * c * sc.v_nc * sc.v_nc * EPSILON_0 * e_field_at_site * e_field_at_site
        / (32.0 * PI * PI);
    // ∫|r̂ × ê|² dΩ over the sphere
    Ok(prefactor * 8.0 * PI / 3.0)
}

/// Q factors of the split standing-wave pair. Without a particle both keep
/// `q_intrinsic`.
pub fn doublet_loss(q_intrinsic: f64, mode: &ModeGeometry, sc: Option<&Scatterer>) -> Result<DoubletLoss> {
    let qs = match sc {
        Some(sc) => scattering_q(mode, sc)?,
        None => f64::INFINITY,
    };
    doublet_loss_from_qs(q_intrinsic, qs, 0.0)
}

/// As [`doublet_loss`] with an explicit antinode scattering Q. The node
/// mode receives `node_residual` times the antinode loss (0 for a point
/// particle exactly on the node).
pub fn doublet_loss_from_qs(q_intrinsic: f64, qs_antinode: f64, node_residual: f64) -> Result<DoubletLoss> {
    ensure_positive("q_intrinsic", q_intrinsic)?;
    if qs_antinode.is_nan() || qs_antinode <= 0.0 {
        return Err(invalid("qs_antinode", "must be > 0 (infinity allowed)"));
    }
    if !(0.0..=1.0).contains(&node_residual) {
        return Err(invalid("node_residual", "must lie in [0, 1]"));
    }
    let q_low = 1.0 / (1.0 / q_intrinsic + 1.0 / qs_antinode);
    let q_high = 1.0 / (1.0 / q_intrinsic + node_residual / qs_antinode);
    Ok(DoubletLoss { q_low, q_high })
}

/// Coupling depths of the two doublet dips in a side-coupled waveguide.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipDepths {
    pub minus: f64,
    pub plus: f64,
}

/// Waveguide transmission past a split doublet:
/// T(ω) = 1 − Σ± d± / (1 + 4Q±²(ω/ω± − 1)²).
pub fn doublet_transmission(
    omega_grid: &[f64],
    omega_pm: (AngularFrequency, AngularFrequency),
    q_low: f64,
    q_high: f64,
    depths: DipDepths,
) -> Result<SpectrumTrace> {
    for (name, d) in [("depth_minus", depths.minus), ("depth_plus", depths.plus)] {
        if !(0.0..=1.0).contains(&d) {
            return Err(invalid(name, format!("must lie in [0, 1], got {d}")));
        }
    }
    ensure_positive("q_low", q_low)?;
    ensure_positive("q_high", q_high)?;
    let dip = |w: f64, w0: f64, q: f64, d: f64| {
        let x = 2.0 * q * (w / w0 - 1.0);
        d / (1.0 + x * x)
    };
    let (wm, wp) = (omega_pm.0.value(), omega_pm.1.value());
    let t = omega_grid
        .iter()
        .map(|&w| 1.0 - dip(w, wm, q_low, depths.minus) - dip(w, wp, q_high, depths.plus))
        .collect();
    SpectrumTrace::new(Axis::OmegaRadS, omega_grid.to_vec(), t)
}
