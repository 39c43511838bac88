//! Emitter-cavity coupling: effective mode volume from sampled fields,
//! vacuum field per photon, transition dipole from the bulk decay rate,
//! coherent coupling rate g and the bad-cavity Purcell factor.

use std::f64::consts::PI;
use std::io::Read;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_non_negative, ensure_positive, invalid, Error, Result};
use crate::units::{wavelength_to_angular, ModeGeometry, Rate, EPSILON_0, HBAR, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipoleEmitter {
    /// Total excited-state spontaneous emission rate.
    #[serde(rename = "gamma_parallel_hz_over_2pi")]
    pub gamma_parallel: Rate,
    /// Fraction of spontaneous emission going into the zero-phonon line.
    pub zpl_fraction: f64,
    /// Emission wavelength, m.
    pub lambda_emit: f64,
    /// Refractive index of the host crystal.
    pub n_host: f64,
}

impl DipoleEmitter {
    pub fn validate(&self) -> Result<()> {
        ensure_non_negative("gamma_parallel", self.gamma_parallel.value())?;
        if !(0.0..=1.0).contains(&self.zpl_fraction) {
            return Err(invalid("zpl_fraction", "must lie in [0, 1]"));
        }
        ensure_positive("lambda_emit", self.lambda_emit)?;
        ensure_positive("n_host", self.n_host)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub position: [f64; 3],
    pub n: f64,
    pub e: [Complex64; 3],
    pub cell_volume: f64,
}

impl FieldSample {
    /// n²|E|², proportional to the local electric energy density.
    pub fn energy_density(&self) -> f64 {
        self.n * self.n * self.e.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }
}

/// A mode field sampled on a grid of cells.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    samples: Vec<FieldSample>,
}

#[derive(Debug, Deserialize)]
struct FieldRow {
    x: f64,
    y: f64,
    z: f64,
    n: f64,
    ex_re: f64,
    ex_im: f64,
    ey_re: f64,
    ey_im: f64,
    ez_re: f64,
    ez_im: f64,
    cell_volume: f64,
}

impl SampledField {
    pub fn new(samples: Vec<FieldSample>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Validation("sampled field has no samples".into()));
        }
        for s in &samples {
            ensure_positive("cell_volume", s.cell_volume)?;
            if !s.n.is_finite() || s.e.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                return Err(Error::Validation("non-finite field sample".into()));
            }
        }
        Ok(Self { samples })
    }

    /// Parse `x,y,z,n,ex_re,ex_im,ey_re,ey_im,ez_re,ez_im,cell_volume`
    /// rows; `#` lines are comments.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut samples = Vec::new();
        for row in rdr.deserialize() {
            let r: FieldRow = row?;
            samples.push(FieldSample {
                position: [r.x, r.y, r.z],
                n: r.n,
                e: [
                    Complex64::new(r.ex_re, r.ex_im),
                    Complex64::new(r.ey_re, r.ey_im),
                    Complex64::new(r.ez_re, r.ez_im),
                ],
                cell_volume: r.cell_volume,
            });
        }
        Self::new(samples)
    }

    pub fn samples(&self) -> &[FieldSample] {
        &self.samples
    }

    /// Multiply every field component by `factor`.
    pub fn scaled(&self, factor: Complex64) -> Self {
        let samples = self
            .samples
            .iter()
            .map(|s| FieldSample {
                e: s.e.map(|c| c * factor),
                ..*s
            })
            .collect();
        Self { samples }
    }

    fn peak_density(&self) -> f64 {
        self.samples
            .iter()
            .map(FieldSample::energy_density)
            .fold(0.0, f64::max)
    }
}

/// ∫ n²|E|² dV / max(n²|E|²), m³ (or whatever unit the cell volumes carry).
pub fn effective_mode_volume(field: &SampledField) -> Result<f64> {
    let peak = field.peak_density();
    if peak <= 0.0 {
        return Err(Error::Validation("field is identically zero".into()));
    }
    let total: f64 = field
        .samples
        .iter()
        .map(|s| s.energy_density() * s.cell_volume)
        .sum();
    Ok(total / peak)
}

/// Local-to-peak energy density ratio at the grid sample located at `site`.
pub fn eta_ratio(field: &SampledField, site: [f64; 3]) -> Result<f64> {
    let peak = field.peak_density();
    if peak <= 0.0 {
        return Err(Error::Validation("field is identically zero".into()));
    }
    let sample = field
        .samples
        .iter()
        .find(|s| {
            let tol = 1e-9 * s.cell_volume.cbrt();
            s.position
                .iter()
                .zip(site.iter())
                .all(|(a, b)| (a - b).abs() <= tol)
        })
        .ok_or_else(|| invalid("site", format!("{site:?} is not a grid sample")))?;
    let local = sample.energy_density();
    if local <= 0.0 {
        return Err(invalid("site", "zero field at the emitter site"));
    }
    Ok(local / peak)
}

/// Vacuum electric field amplitude per photon at a site with local-to-peak
/// ratio `eta_site` and index `n_site`, using the standing-wave volume.
pub fn photon_field(mode: &ModeGeometry, eta_site: f64, n_site: f64) -> Result<f64> {
    if !(eta_site > 0.0 && eta_site <= 1.0) {
        return Err(invalid("eta_site", format!("must lie in (0, 1], got {eta_site}")));
    }
    ensure_positive("n_site", n_site)?;
    ensure_positive("v_eff_sw", mode.v_eff_sw)?;
    let omega = mode.omega0()?.value();
    Ok((HBAR * omega * eta_site / (2.0 * EPSILON_0 * n_site * n_site * mode.v_eff_m3())).sqrt())
}

/// Transition dipole magnitude (C·m) from the bulk spontaneous emission rate:
/// |μ|² = 3π²ħε₀c³γ_∥ / (n ω³).
pub fn dipole_moment(emitter: &DipoleEmitter) -> Result<f64> {
    emitter.validate()?;
    let omega = wavelength_to_angular(emitter.lambda_emit)?.value();
    let mu2 = 3.0 * PI * PI * HBAR * EPSILON_0 * SPEED_OF_LIGHT.powi(3) * emitter.gamma_parallel.value()
        / (emitter.n_host * omega.powi(3));
    Ok(mu2.sqrt())
}

/// Coherent coupling rate g = |μ·E_photon| / ħ for a dipole aligned with the
/// local mode field.
pub fn coupling_rate(
    emitter: &DipoleEmitter,
    mode: &ModeGeometry,
    eta_site: f64,
    n_site: f64,
) -> Result<Rate> {
    coupling_rate_aligned(emitter, mode, eta_site, n_site, 1.0)
}

/// As [`coupling_rate`], with `cos_theta` the projection of the dipole onto
/// the local field polarization.
pub fn coupling_rate_aligned(
    emitter: &DipoleEmitter,
    mode: &ModeGeometry,
    eta_site: f64,
    n_site: f64,
    cos_theta: f64,
) -> Result<Rate> {
    if !(-1.0..=1.0).contains(&cos_theta) {
        return Err(invalid("cos_theta", "must lie in [-1, 1]"));
    }
    let mu = dipole_moment(emitter)?;
    let e = photon_field(mode, eta_site, n_site)?;
    Rate::new((cos_theta * mu * e / HBAR).abs())
}

/// Coupling rate of the zero-phonon line alone: g·√(zpl_fraction).
pub fn zpl_coupling_rate(g: Rate, zpl_fraction: f64) -> Result<Rate> {
    if !(0.0..=1.0).contains(&zpl_fraction) {
        return Err(invalid("zpl_fraction", "must lie in [0, 1]"));
    }
    Rate::new(g.value() * zpl_fraction.sqrt())
}

/// Bad-cavity Purcell factor F = 2g² / (κ γ_s).
pub fn purcell_factor(g: Rate, kappa: Rate, gamma_s: Rate) -> Result<f64> {
    ensure_positive("kappa", kappa.value())?;
    ensure_positive("gamma_s", gamma_s.value())?;
    Ok(2.0 * g.value() * g.value() / (kappa.value() * gamma_s.value()))
}

/// Inverse of [`purcell_factor`]: g = √(F κ γ_s / 2).
pub fn g_from_purcell(f_o: f64, kappa: Rate, gamma_s: Rate) -> Result<Rate> {
    ensure_non_negative("f_o", f_o)?;
    ensure_positive("kappa", kappa.value())?;
    ensure_positive("gamma_s", gamma_s.value())?;
    Rate::new((f_o * kappa.value() * gamma_s.value() / 2.0).sqrt())
}
