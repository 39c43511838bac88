//! Shared domain values: angular frequencies, rates, and the parameter
//! records for the emitter-cavity system, a single whispering-gallery mode
//! and a sub-wavelength scatterer.
//!
//! Rates and frequencies are stored in rad/s. Every public constructor
//! taking `*_hz` and every JSON field ending in `_hz_over_2pi` uses the
//! ordinary frequency `value / 2π`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_non_negative, ensure_positive, invalid, Error, Result};

/// Vacuum speed of light, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;

const TWO_PI: f64 = 2.0 * PI;

/// Angular frequency in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct AngularFrequency(f64);

impl AngularFrequency {
    pub fn new(rad_per_s: f64) -> Result<Self> {
        ensure_positive("angular frequency", rad_per_s)?;
        Ok(Self(rad_per_s))
    }

    pub fn from_hz(hz: f64) -> Result<Self> {
        Self::new(hz * TWO_PI)
    }

    /// Unchecked constructor for detunings and frame offsets, which may be
    /// zero or negative.
    pub const fn from_raw(rad_per_s: f64) -> Self {
        Self(rad_per_s)
    }

    pub fn from_wavelength(lambda_m: f64) -> Result<Self> {
        wavelength_to_angular(lambda_m)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn hz(self) -> f64 {
        self.0 / TWO_PI
    }

    pub fn wavelength(self) -> f64 {
        TWO_PI * SPEED_OF_LIGHT / self.0
    }
}

/// Non-negative angular rate in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Rate(f64);

impl Rate {
    pub const ZERO: Rate = Rate(0.0);

    pub fn new(rad_per_s: f64) -> Result<Self> {
        ensure_non_negative("rate", rad_per_s)?;
        Ok(Self(rad_per_s))
    }

    pub fn from_hz(hz: f64) -> Result<Self> {
        Self::new(hz * TWO_PI)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn hz(self) -> f64 {
        self.0 / TWO_PI
    }
}

/// Cavity field decay rate κ = ω / (2Q); the energy decay rate is 2κ.
pub fn q_to_kappa(q: f64, omega: AngularFrequency) -> Result<Rate> {
    if q.is_nan() || q <= 0.0 {
        return Err(invalid("q", format!("must be > 0, got {q}")));
    }
    ensure_positive("omega", omega.value())?;
    Rate::new(omega.value() / (2.0 * q))
}

/// Inverse of [`q_to_kappa`]. A zero rate maps to an infinite Q.
pub fn kappa_to_q(kappa: Rate, omega: AngularFrequency) -> Result<f64> {
    ensure_positive("omega", omega.value())?;
    Ok(omega.value() / (2.0 * kappa.value()))
}

pub fn wavelength_to_angular(lambda_m: f64) -> Result<AngularFrequency> {
    ensure_positive("wavelength", lambda_m)?;
    AngularFrequency::new(TWO_PI * SPEED_OF_LIGHT / lambda_m)
}

pub fn angular_to_wavelength(omega: AngularFrequency) -> Result<f64> {
    ensure_positive("omega", omega.value())?;
    Ok(TWO_PI * SPEED_OF_LIGHT / omega.value())
}

/// Serde adapter: a rad/s newtype written as ordinary frequency in Hz.
mod hz {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub trait HzValue: Sized {
        fn to_hz(&self) -> f64;
        fn from_hz_checked(hz: f64) -> Result<Self>;
    }

    impl HzValue for Rate {
        fn to_hz(&self) -> f64 {
            self.hz()
        }
        fn from_hz_checked(hz: f64) -> Result<Self> {
            Rate::from_hz(hz)
        }
    }

    impl HzValue for AngularFrequency {
        fn to_hz(&self) -> f64 {
            self.hz()
        }
        fn from_hz_checked(hz: f64) -> Result<Self> {
            AngularFrequency::from_hz(hz)
        }
    }

    pub fn serialize<T: HzValue, S: Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(v.to_hz())
    }

    pub fn deserialize<'de, T: HzValue, D: Deserializer<'de>>(d: D) -> std::result::Result<T, D::Error> {
        let hz = f64::deserialize(d)?;
        T::from_hz_checked(hz).map_err(serde::de::Error::custom)
    }
}

// Bare values serialize as Hz, like the `hz` adapter.
macro_rules! hz_serde {
    ($t:ty) => {
        impl Serialize for $t {
            fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                hz::serialize(self, s)
            }
        }
        impl<'de> Deserialize<'de> for $t {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                hz::deserialize(d)
            }
        }
    };
}
hz_serde!(Rate);
hz_serde!(AngularFrequency);

/// Rates and frequencies of the coupled dipole-cavity system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    #[serde(rename = "g_hz_over_2pi", with = "hz")]
    pub g: Rate,
    /// Cavity field decay rate; the energy decay rate is `2 * kappa`.
    #[serde(rename = "kappa_hz_over_2pi", with = "hz")]
    pub kappa: Rate,
    #[serde(rename = "gamma_s_hz_over_2pi", with = "hz")]
    pub gamma_s: Rate,
    #[serde(rename = "gamma_p_hz_over_2pi", with = "hz")]
    pub gamma_p: Rate,
    #[serde(rename = "omega_c_hz_over_2pi", with = "hz")]
    pub omega_c: AngularFrequency,
    #[serde(rename = "omega_d_hz_over_2pi", with = "hz")]
    pub omega_d: AngularFrequency,
}

impl SystemParams {
    /// Build from ordinary frequencies (all `/2π`, Hz).
    pub fn from_hz(
        g: f64,
        kappa: f64,
        gamma_s: f64,
        gamma_p: f64,
        omega_c: f64,
        omega_d: f64,
    ) -> Result<Self> {
        let p = Self {
            g: Rate::from_hz(g)?,
            kappa: Rate::from_hz(kappa)?,
            gamma_s: Rate::from_hz(gamma_s)?,
            gamma_p: Rate::from_hz(gamma_p)?,
            omega_c: AngularFrequency::from_hz(omega_c)?,
            omega_d: AngularFrequency::from_hz(omega_d)?,
        };
        Ok(p)
    }

    /// Cavity-referenced detuning of the dipole, ω_d − ω_c.
    pub fn dipole_detuning(&self) -> f64 {
        self.omega_d.value() - self.omega_c.value()
    }

    pub fn purcell(&self) -> Result<f64> {
        crate::coupling::purcell_factor(self.g, self.kappa, self.gamma_s)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, r) in [
            ("g", self.g),
            ("kappa", self.kappa),
            ("gamma_s", self.gamma_s),
            ("gamma_p", self.gamma_p),
        ] {
            ensure_non_negative(name, r.value())?;
        }
        ensure_positive("omega_c", self.omega_c.value())?;
        ensure_positive("omega_d", self.omega_d.value())?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarization {
    TE,
    TM,
}

/// Geometric and optical record of one whispering-gallery mode.
///
/// `eta_s` and `eta_nc` are local-to-peak ratios of the electric field
/// energy density (≤ 1). Formulas written with a peak-to-local factor use
/// their reciprocal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeGeometry {
    pub polarization: Polarization,
    pub p: u32,
    pub m: i64,
    /// Vacuum wavelength, m.
    pub lambda0: f64,
    pub n_disk: f64,
    /// Standing-wave effective volume in units of (λ0 / n_disk)³.
    pub v_eff_sw: f64,
    pub eta_s: f64,
    pub eta_nc: f64,
    pub q_rad: f64,
    pub n_eff: f64,
}

impl ModeGeometry {
    pub fn validate(&self) -> Result<()> {
        if self.p < 1 {
            return Err(invalid("p", "radial order must be >= 1"));
        }
        ensure_positive("lambda0", self.lambda0)?;
        ensure_positive("n_disk", self.n_disk)?;
        ensure_positive("v_eff_sw", self.v_eff_sw)?;
        ensure_positive("q_rad", self.q_rad)?;
        ensure_positive("n_eff", self.n_eff)?;
        if !(self.eta_nc > 0.0 && self.eta_nc <= self.eta_s && self.eta_s <= 1.0) {
            return Err(Error::Validation(format!(
                "eta bounds violated: need 0 < eta_nc ({}) <= eta_s ({}) <= 1",
                self.eta_nc, self.eta_s
            )));
        }
        Ok(())
    }

    pub fn omega0(&self) -> Result<AngularFrequency> {
        wavelength_to_angular(self.lambda0)
    }

    /// Cubic material wavelength (λ0 / n_disk)³, m³.
    pub fn volume_unit(&self) -> f64 {
        (self.lambda0 / self.n_disk).powi(3)
    }

    /// Standing-wave effective mode volume, m³.
    pub fn v_eff_m3(&self) -> f64 {
        self.v_eff_sw * self.volume_unit()
    }

    /// Traveling-wave effective mode volume (twice the standing-wave value), m³.
    pub fn v_tw_m3(&self) -> f64 {
        2.0 * self.v_eff_m3()
    }
}

/// A sub-wavelength dielectric particle sitting in the mode field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scatterer {
    pub n_nc: f64,
    /// Physical volume, m³.
    pub v_nc: f64,
    /// Local-to-peak energy density ratio at the particle center.
    pub eta_at_site: f64,
}

impl Scatterer {
    pub fn new(n_nc: f64, v_nc: f64, eta_at_site: f64) -> Result<Self> {
        let s = Self {
            n_nc,
            v_nc,
            eta_at_site,
        };
        s.validate()?;
        Ok(s)
    }

    /// Sphere of the given diameter (m).
    pub fn sphere(n_nc: f64, diameter_m: f64, eta_at_site: f64) -> Result<Self> {
        ensure_positive("diameter", diameter_m)?;
        Self::new(n_nc, sphere_volume(diameter_m), eta_at_site)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n_nc.is_finite() && self.n_nc > 1.0) {
            return Err(invalid("n_nc", format!("must be > 1, got {}", self.n_nc)));
        }
        ensure_positive("v_nc", self.v_nc)?;
        if !(self.eta_at_site > 0.0 && self.eta_at_site <= 1.0) {
            return Err(invalid(
                "eta_at_site",
                format!("must lie in (0, 1], got {}", self.eta_at_site),
            ));
        }
        Ok(())
    }

    /// Polarizability contrast (n² − 1).
    pub fn contrast(&self) -> f64 {
        self.n_nc * self.n_nc - 1.0
    }
}

pub fn sphere_volume(diameter_m: f64) -> f64 {
    let r = 0.5 * diameter_m;
    4.0 / 3.0 * PI * r * r * r
}
