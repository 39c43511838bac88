//! Closed-form detected spectra in the room-temperature (fast dephasing)
//! limit.
//!
//! The collected field is the coherent sum of direct dipole radiation and
//! cavity leakage. Throughout, the detuning is Δω = ω_c − ω and the cavity
//! response enters as 1/(1 + iΔω/κ); this is the sign produced by the
//! master-equation engine in [`crate::dynamics`] with positive-frequency
//! detection.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coupling::purcell_factor;
use crate::error::{ensure_non_negative, ensure_positive, invalid, Error, Result};
use crate::trace::{Axis, SpectrumTrace};
use crate::units::{AngularFrequency, Rate, SystemParams};

/// Overlap of the collection optic with the dipole and cavity radiation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollectionChannel {
    pub eps_d: f64,
    pub eps_c: f64,
    pub phi_d: f64,
    pub phi_c: f64,
}

impl CollectionChannel {
    /// Far-field lens over a sub-wavelength scatterer: equal overlaps and a
    /// quarter-period lag of the direct emission.
    pub fn lens() -> Self {
        Self {
            eps_d: 1.0,
            eps_c: 1.0,
            phi_d: FRAC_PI_2,
            phi_c: 0.0,
        }
    }

    /// Fiber taper on the far side of the disk: sees only the cavity.
    pub fn taper() -> Self {
        Self {
            eps_d: 0.0,
            eps_c: 1.0,
            phi_d: 0.0,
            phi_c: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_non_negative("eps_d", self.eps_d)?;
        ensure_non_negative("eps_c", self.eps_c)?;
        if self.eps_d == 0.0 && self.eps_c == 0.0 {
            return Err(invalid("channel", "eps_d and eps_c are both zero"));
        }
        if !self.phi_d.is_finite() || !self.phi_c.is_finite() {
            return Err(invalid("channel", "phases must be finite"));
        }
        Ok(())
    }

    pub fn direct_amplitude(&self) -> Complex64 {
        Complex64::from_polar(self.eps_d, -self.phi_d)
    }
}

/// Cavity contribution of one mode at normalized detuning x = Δω/κ:
/// ε e^{−iφ} √F / (1 + i x).
#[inline]
pub fn cavity_term(f_o: f64, eps_c: f64, phi_c: f64, x: f64) -> Complex64 {
    Complex64::from_polar(eps_c * f_o.sqrt(), -phi_c) / Complex64::new(1.0, x)
}

/// One cavity mode of a [`MultiModeModel`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeTerm {
    #[serde(rename = "omega_c_hz_over_2pi")]
    pub center_hz: f64,
    #[serde(rename = "kappa_hz_over_2pi")]
    pub kappa_hz: f64,
    pub f_o: f64,
    #[serde(default = "one")]
    pub eps_c: f64,
    #[serde(default)]
    pub phi_c: f64,
}

fn one() -> f64 {
    1.0
}

/// Several decoupled cavity modes radiating coherently with one dipole.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiModeModel {
    pub modes: Vec<ModeTerm>,
    pub eps_d: f64,
    pub phi_d: f64,
    /// Overall intensity scale; absorbs the 1/γ_p prefactor.
    pub scale: f64,
}

impl MultiModeModel {
    pub fn validate(&self) -> Result<()> {
        for m in &self.modes {
            ensure_positive("kappa", m.kappa_hz)?;
            ensure_non_negative("f_o", m.f_o)?;
            ensure_non_negative("eps_c", m.eps_c)?;
            ensure_positive("omega_c", m.center_hz)?;
        }
        ensure_non_negative("eps_d", self.eps_d)?;
        if !self.scale.is_finite() {
            return Err(invalid("scale", "must be finite"));
        }
        Ok(())
    }

    /// Intensity at ordinary optical frequency `nu_hz`.
    pub fn intensity_at(&self, nu_hz: f64) -> f64 {
        let mut amp = Complex64::from_polar(self.eps_d, -self.phi_d);
        for m in &self.modes {
            let x = (m.center_hz - nu_hz) / m.kappa_hz;
            amp += cavity_term(m.f_o, m.eps_c, m.phi_c, x);
        }
        self.scale * amp.norm_sqr()
    }
}

/// S(ω) = (1/γ_p) |ε_d e^{−iφ_d} + ε_c e^{−iφ_c} √F / (1 + iΔω/κ)|²,
/// F = 2g²/(κγ_s), evaluated on absolute angular frequencies.
pub fn detected_spectrum(params: &SystemParams, ch: &CollectionChannel, omega_grid: &[f64]) -> Result<SpectrumTrace> {
    params.validate()?;
    ch.validate()?;
    ensure_positive("gamma_p", params.gamma_p.value())?;
    let model = MultiModeModel {
        modes: vec![ModeTerm {
            center_hz: params.omega_c.hz(),
            kappa_hz: params.kappa.hz(),
            f_o: purcell_factor(params.g, params.kappa, params.gamma_s)?,
            eps_c: ch.eps_c,
            phi_c: ch.phi_c,
        }],
        eps_d: ch.eps_d,
        phi_d: ch.phi_d,
        scale: 1.0 / params.gamma_p.value(),
    };
    multimode_spectrum(&model, omega_grid)
}

/// Lens-collected spectrum normalized to unit background,
/// |1 + i√F / (1 + iΔω/κ)|², on a grid of detunings Δω/2π in Hz.
pub fn lens_spectrum(f_o: f64, kappa: Rate, detuning_hz: &[f64]) -> Result<SpectrumTrace> {
    ensure_non_negative("f_o", f_o)?;
    ensure_positive("kappa", kappa.value())?;
    let k = kappa.hz();
    let s = detuning_hz
        .iter()
        .map(|&d| {
            let amp = Complex64::new(1.0, 0.0) + Complex64::i() * f_o.sqrt() / Complex64::new(1.0, d / k);
            amp.norm_sqr()
        })
        .collect();
    SpectrumTrace::new(Axis::DetuningHz, detuning_hz.to_vec(), s)
}

/// Coherent multi-mode generalization on absolute angular frequencies.
pub fn multimode_spectrum(model: &MultiModeModel, omega_grid: &[f64]) -> Result<SpectrumTrace> {
    model.validate()?;
    let s = omega_grid
        .iter()
        .map(|&w| model.intensity_at(w / (2.0 * std::f64::consts::PI)))
        .collect();
    SpectrumTrace::new(Axis::OmegaRadS, omega_grid.to_vec(), s)
}

/// One resonance of a drop filter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DropMode {
    #[serde(rename = "omega_c_hz_over_2pi")]
    pub omega_c: AngularFrequency,
    #[serde(rename = "kappa_hz_over_2pi")]
    pub kappa: Rate,
    pub depth: f64,
}

/// Waveguide emission passed by a side-coupled disk: Lorentzian dips with
/// no interference, background × Π(1 − d/(1 + (Δω/κ)²)).
pub fn drop_filter_spectrum(modes: &[DropMode], background: f64, omega_grid: &[f64]) -> Result<SpectrumTrace> {
    for m in modes {
        if !(0.0..=1.0).contains(&m.depth) {
            return Err(invalid("depth", format!("must lie in [0, 1], got {}", m.depth)));
        }
        ensure_positive("kappa", m.kappa.value())?;
    }
    let s = omega_grid
        .iter()
        .map(|&w| {
            modes.iter().fold(background, |acc, m| {
                let x = (m.omega_c.value() - w) / m.kappa.value();
                acc * (1.0 - m.depth / (1.0 + x * x))
            })
        })
        .collect();
    SpectrumTrace::new(Axis::OmegaRadS, omega_grid.to_vec(), s)
}

/// Magnitudes entering the classical source/cavity/continuum coupled-mode
/// picture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceCouplings {
    /// |s_s|: source projection onto the resonant radiation mode.
    pub source_to_radiation: f64,
    /// |s_c|: source projection onto the cavity mode.
    pub source_to_cavity: f64,
    /// |κ_c|: particle-mediated cavity-continuum overlap.
    pub cavity_to_radiation: f64,
}

/// Ratio of the cavity-mediated to the direct radiation amplitude for a
/// harmonic source at `omega_s`:
/// (|s_c|/4)·iω_c|κ_c| / [(|s_s|/2)(i(ω_c − ω_s) + κ)].
pub fn phase_lag(
    omega_s: AngularFrequency,
    omega_c: AngularFrequency,
    kappa: Rate,
    c: &SourceCouplings,
) -> Result<Complex64> {
    ensure_positive("kappa", kappa.value())?;
    ensure_positive("source_to_radiation", c.source_to_radiation)?;
    let num = Complex64::new(0.0, 0.25 * c.source_to_cavity * omega_c.value() * c.cavity_to_radiation);
    let den = 0.5
        * c.source_to_radiation
        * Complex64::new(kappa.value(), omega_c.value() - omega_s.value());
    let r = num / den;
    if !r.re.is_finite() || !r.im.is_finite() {
        return Err(Error::Numerical("phase lag ratio overflowed".into()));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::linspace;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn params(f_o: f64) -> SystemParams {
        let kappa = 15e9;
        let gs = 0.5e6;
        let g = (f_o * kappa * gs / 2.0).sqrt();
        SystemParams::from_hz(g, kappa, gs, 5e12, 4.41e14, 4.41e14).unwrap()
    }

    fn omega_grid(p: &SystemParams, half_width_kappas: f64, n: usize) -> Vec<f64> {
        let w0 = p.omega_c.value();
        let k = p.kappa.value();
        linspace(w0 - half_width_kappas * k, w0 + half_width_kappas * k, n)
    }

    #[test]
    fn no_cavity_channel_is_flat() {
        let p = params(0.2);
        let ch = CollectionChannel { eps_d: 0.7, eps_c: 0.0, phi_d: 0.3, phi_c: 0.0 };
        let t = detected_spectrum(&p, &ch, &omega_grid(&p, 5.0, 51)).unwrap();
        for s in t.intensity {
            assert_relative_eq!(s, 0.49 / p.gamma_p.value(), max_relative = 1e-12);
        }
    }

    #[test]
    fn taper_is_lorentzian() {
        let p = params(0.2);
        let grid = omega_grid(&p, 5.0, 101);
        let t = detected_spectrum(&p, &CollectionChannel::taper(), &grid).unwrap();
        let f = p.purcell().unwrap();
        for (w, s) in grid.iter().zip(&t.intensity) {
            let x = (p.omega_c.value() - w) / p.kappa.value();
            assert_relative_eq!(*s, f / (1.0 + x * x) / p.gamma_p.value(), max_relative = 1e-12);
        }
    }

    #[test]
    fn far_detuned_background_recovered() {
        let p = params(0.2);
        let ch = CollectionChannel::lens();
        let w = p.omega_c.value() + 1e6 * p.kappa.value();
        let t = detected_spectrum(&p, &ch, &[w]).unwrap();
        assert_relative_eq!(t.intensity[0] * p.gamma_p.value(), 1.0, max_relative = 1e-5);
    }

    #[test]
    fn lens_on_resonance_and_extrema() {
        let k = Rate::from_hz(15e9).unwrap();
        let t = lens_spectrum(0.2, k, &[0.0]).unwrap();
        assert_relative_eq!(t.intensity[0], 1.2, max_relative = 1e-14);

        // brute-force scan of x = Δω/κ on a 1e-5 grid
        let xs = linspace(-4.0, 4.0, 800_001);
        let det: Vec<f64> = xs.iter().map(|x| x * k.hz()).collect();
        let t = lens_spectrum(0.2, k, &det).unwrap();
        let (xmax, smax) = t.max().unwrap();
        let (xmin, smin) = t.min().unwrap();
        assert!((xmax / k.hz() - 0.8011).abs() < 1e-4);
        assert!((smax - 1.5582).abs() < 1e-4);
        assert!((xmin / k.hz() + 1.2483).abs() < 1e-4);
        assert!((smin - 0.6417).abs() < 1e-4);
        // closed-form roots of x² + √F x − 1 = 0
        let sf = 0.2f64.sqrt();
        assert!(((-sf + (0.2f64 + 4.0).sqrt()) / 2.0 - xmax / k.hz()).abs() < 1e-5);
        // crossing of the background at x = −√F/2
        let cross = lens_spectrum(0.2, k, &[-sf / 2.0 * k.hz()]).unwrap();
        assert!((cross.intensity[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lens_flat_far_away() {
        let k = Rate::from_hz(15e9).unwrap();
        let t = lens_spectrum(0.2, k, &[-101.0 * k.hz(), 101.0 * k.hz()]).unwrap();
        for s in t.intensity {
            assert!((s - 1.0).abs() < 1e-2 && (s - 1.0).abs() > 0.0);
        }
        let t = lens_spectrum(0.2, k, &[-1e4 * k.hz(), 1e4 * k.hz()]).unwrap();
        for s in t.intensity {
            assert!((s - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn phase_mirror() {
        let k = Rate::from_hz(1.0).unwrap();
        let xs = linspace(-3.0, 3.0, 61);
        let plus = lens_spectrum(0.3, k, &xs).unwrap();
        let mut ch = CollectionChannel::lens();
        ch.phi_d = -FRAC_PI_2;
        let p = SystemParams::from_hz((0.3f64 * 1.0 * 1.0 / 2.0).sqrt(), 1.0, 1.0, 1.0, 100.0, 100.0).unwrap();
        let grid: Vec<f64> = xs.iter().map(|x| 2.0 * PI * (100.0 - x)).collect();
        let minus = detected_spectrum(&p, &ch, &grid).unwrap();
        for (i, s) in minus.intensity.iter().enumerate() {
            // reflected: S_−(Δ) = S_+(−Δ)
            let mirrored = plus.intensity[xs.len() - 1 - i];
            assert_relative_eq!(s * p.gamma_p.value(), mirrored, max_relative = 1e-12);
        }
    }

    #[test]
    fn multimode_single_equals_detected() {
        let p = params(0.7);
        let ch = CollectionChannel { eps_d: 0.8, eps_c: 0.6, phi_d: 0.4, phi_c: -1.1 };
        let grid = omega_grid(&p, 8.0, 257);
        let a = detected_spectrum(&p, &ch, &grid).unwrap();
        let model = MultiModeModel {
            modes: vec![ModeTerm {
                center_hz: p.omega_c.hz(),
                kappa_hz: p.kappa.hz(),
                f_o: p.purcell().unwrap(),
                eps_c: 0.6,
                phi_c: -1.1,
            }],
            eps_d: 0.8,
            phi_d: 0.4,
            scale: 1.0 / p.gamma_p.value(),
        };
        let b = multimode_spectrum(&model, &grid).unwrap();
        assert_eq!(a.intensity, b.intensity);
    }

    #[test]
    fn multimode_separation_limit() {
        let (k, c1, c2) = (15e9, 4.41e14, 4.41e14 + 1e5 * 15e9);
        let lens = CollectionChannel::lens();
        let term = |c| ModeTerm { center_hz: c, kappa_hz: k, f_o: 0.2, eps_c: 1.0, phi_c: lens.phi_c };
        let model = MultiModeModel { modes: vec![term(c1), term(c2)], eps_d: 1.0, phi_d: lens.phi_d, scale: 1.0 };
        let det = linspace(-5.0 * k, 5.0 * k, 101);
        let single = lens_spectrum(0.2, Rate::from_hz(k).unwrap(), &det).unwrap();
        for c in [c1, c2] {
            let grid: Vec<f64> = det.iter().map(|d| 2.0 * PI * (c - d)).collect();
            let t = multimode_spectrum(&model, &grid).unwrap();
            for (s, r) in t.intensity.iter().zip(&single.intensity) {
                assert!((s / r - 1.0).abs() < 1e-3);
            }
        }
        let flat = MultiModeModel { modes: vec![ModeTerm { f_o: 0.0, ..term(c1) }, ModeTerm { f_o: 0.0, ..term(c2) }], ..model };
        let t = multimode_spectrum(&flat, &[2.0 * PI * c1, 2.0 * PI * c2]).unwrap();
        assert!(t.intensity.iter().all(|&s| (s - 1.0).abs() < 1e-15));
    }

    #[test]
    fn drop_filter_dips() {
        let w0 = AngularFrequency::new(3e15).unwrap();
        let k = Rate::new(1e11).unwrap();
        let full = drop_filter_spectrum(&[DropMode { omega_c: w0, kappa: k, depth: 1.0 }], 2.0, &[w0.value()]).unwrap();
        assert!(full.intensity[0].abs() < 1e-15);
        let none = drop_filter_spectrum(&[DropMode { omega_c: w0, kappa: k, depth: 0.0 }], 2.0, &[w0.value(), w0.value() + 1e11]).unwrap();
        assert!(none.intensity.iter().all(|&s| s == 2.0));
        assert!(drop_filter_spectrum(&[DropMode { omega_c: w0, kappa: k, depth: -0.1 }], 1.0, &[1.0]).is_err());

        // measured FWHM of the dip equals 2κ
        let grid = linspace(w0.value() - 5e11, w0.value() + 5e11, 1_000_001);
        let t = drop_filter_spectrum(&[DropMode { omega_c: w0, kappa: k, depth: 0.6 }], 1.0, &grid).unwrap();
        let below: Vec<f64> = grid.iter().zip(&t.intensity).filter(|(_, &s)| s < 1.0 - 0.3).map(|(w, _)| *w).collect();
        let width = below.last().unwrap() - below.first().unwrap();
        assert!((width / (2.0 * k.value()) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn phase_lag_quadrature() {
        let wc = AngularFrequency::new(3e15).unwrap();
        let k = Rate::new(1e11).unwrap();
        let c = SourceCouplings { source_to_radiation: 1.3, source_to_cavity: 0.4, cavity_to_radiation: 2e-4 };
        let on = phase_lag(wc, wc, k, &c).unwrap();
        assert!((on.arg() - FRAC_PI_2).abs() < 1e-9);
        // source above the cavity by κ: i/(1 − i) → 3π/4
        let above = phase_lag(AngularFrequency::new(wc.value() + k.value()).unwrap(), wc, k, &c).unwrap();
        assert!((above.arg() - 3.0 * FRAC_PI_4).abs() < 1e-9);
        // source below the cavity by κ: i/(1 + i) → π/4
        let below = phase_lag(AngularFrequency::new(wc.value() - k.value()).unwrap(), wc, k, &c).unwrap();
        assert!((below.arg() - FRAC_PI_4).abs() < 1e-9);
        let far = phase_lag(AngularFrequency::new(wc.value() + 1e7 * k.value()).unwrap(), wc, k, &c).unwrap();
        assert!(far.norm() < 1e-6 * on.norm());
    }

    proptest! {
        #[test]
        fn lens_matches_detected_quarter_lag(f_o in 1e-3f64..10.0, k_hz in 1e8f64..1e11) {
            let gs = 1e6;
            let p = SystemParams::from_hz((f_o * k_hz * gs / 2.0).sqrt(), k_hz, gs, 1e13, 4.4e14, 4.4e14).unwrap();
            let f_exact = p.purcell().unwrap();
            let grid: Vec<f64> = linspace(-20.0 * k_hz, 20.0 * k_hz, 81)
                .iter()
                .map(|d| p.omega_c.value() - 2.0 * PI * d)
                .collect();
            let det: Vec<f64> = grid.iter().map(|w| p.omega_c.hz() - w / (2.0 * PI)).collect();
            let lens = lens_spectrum(f_exact, p.kappa, &det).unwrap();
            let full = detected_spectrum(&p, &CollectionChannel::lens(), &grid).unwrap();
            for (a, b) in lens.intensity.iter().zip(&full.intensity) {
                let rel = (a - b * p.gamma_p.value()).abs() / a;
                prop_assert!(rel < 1e-12, "rel = {}", rel);
            }
        }
    }
}
