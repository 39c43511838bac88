//! Parametrized line-shape models shared by fitting and synthesis.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::convolve::{ConvolutionPlan, InstrumentResponse};
use crate::error::{invalid, Result};
use crate::spectrum::cavity_term;
use crate::trace::Axis;
use crate::units::SPEED_OF_LIGHT;

/// A model parameter with its initial (or fixed) value and optional bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "ParamRepr")]
pub struct FitParam {
    pub value: f64,
    pub free: bool,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ParamRepr {
    Bare(f64),
    Full {
        value: f64,
        #[serde(default = "yes")]
        free: bool,
        #[serde(default)]
        lower: Option<f64>,
        #[serde(default)]
        upper: Option<f64>,
    },
}

fn yes() -> bool {
    true
}

impl From<ParamRepr> for FitParam {
    fn from(r: ParamRepr) -> Self {
        match r {
            ParamRepr::Bare(value) => FitParam::free(value),
            ParamRepr::Full { value, free, lower, upper } => FitParam { value, free, lower, upper },
        }
    }
}

impl FitParam {
    pub fn free(value: f64) -> Self {
        Self {
            value,
            free: true,
            lower: None,
            upper: None,
        }
    }

    pub fn fixed(value: f64) -> Self {
        Self {
            value,
            free: false,
            lower: None,
            upper: None,
        }
    }

    pub fn bounded(value: f64, lower: f64, upper: f64) -> Self {
        Self {
            value,
            free: true,
            lower: Some(lower),
            upper: Some(upper),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LineKind {
    /// Coherent dipole + cavity modes, |ε_d e^{−iφ_d} + Σ cavity terms|².
    #[default]
    Fano,
    /// Transmission past side-coupled modes, 1 − Σ d/(1 + x²).
    Dips,
}

/// One resonance. `center` is in the units of the trace abscissa;
/// `strength` is the Purcell factor for [`LineKind::Fano`] and the dip
/// depth for [`LineKind::Dips`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeSpec {
    pub center: FitParam,
    pub kappa_hz_over_2pi: FitParam,
    #[serde(alias = "f_o", alias = "depth")]
    pub strength: FitParam,
    #[serde(default = "one")]
    pub eps_c: f64,
    #[serde(default)]
    pub phi_c: f64,
}

fn one() -> f64 {
    1.0
}

impl ModeSpec {
    pub fn new(center: f64, kappa_hz: f64, strength: f64) -> Self {
        Self {
            center: FitParam::free(center),
            kappa_hz_over_2pi: FitParam::free(kappa_hz),
            strength: FitParam::free(strength),
            eps_c: 1.0,
            phi_c: 0.0,
        }
    }
}

/// Ties `second` to `first`: same κ and strength, center offset by a fixed
/// `splitting` (abscissa units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoubletLock {
    pub first: usize,
    pub second: usize,
    pub splitting: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitModel {
    #[serde(default)]
    pub kind: LineKind,
    pub modes: Vec<ModeSpec>,
    #[serde(default = "one")]
    pub eps_d: f64,
    #[serde(default = "lens_phase")]
    pub phi_d: FitParam,
    #[serde(default)]
    pub lock: Option<DoubletLock>,
}

fn lens_phase() -> FitParam {
    FitParam::fixed(FRAC_PI_2)
}

impl FitModel {
    /// Lens-collected Fano model (ε_d = 1, φ_d = π/2).
    pub fn fano(modes: Vec<ModeSpec>) -> Self {
        Self {
            kind: LineKind::Fano,
            modes,
            eps_d: 1.0,
            phi_d: lens_phase(),
            lock: None,
        }
    }

    pub fn dips(modes: Vec<ModeSpec>) -> Self {
        Self {
            kind: LineKind::Dips,
            ..Self::fano(modes)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(l) = self.lock {
            if l.first == l.second || l.first >= self.modes.len() || l.second >= self.modes.len() {
                return Err(invalid("lock", "must name two distinct existing modes"));
            }
            if !l.splitting.is_finite() {
                return Err(invalid("lock", "splitting must be finite"));
            }
        }
        if !(self.eps_d.is_finite() && self.eps_d >= 0.0) {
            return Err(invalid("eps_d", "must be finite and >= 0"));
        }
        Ok(())
    }

    pub(crate) fn strength_name(&self) -> &'static str {
        match self.kind {
            LineKind::Fano => "f_o",
            LineKind::Dips => "depth",
        }
    }
}

/// Smooth multiplicative background: a polynomial in the window coordinate
/// s ∈ [−1, 1]. With no coefficients given, `degree + 1` free coefficients
/// are seeded by linear least squares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Background {
    #[serde(default = "cubic")]
    pub degree: usize,
    #[serde(default)]
    pub coefficients: Vec<FitParam>,
}

fn cubic() -> usize {
    3
}

impl Default for Background {
    fn default() -> Self {
        Self::auto(3)
    }
}

impl Background {
    pub fn auto(degree: usize) -> Self {
        Self {
            degree,
            coefficients: Vec::new(),
        }
    }

    pub fn fixed(coefficients: &[f64]) -> Self {
        Self {
            degree: coefficients.len().saturating_sub(1),
            coefficients: coefficients.iter().map(|&c| FitParam::fixed(c)).collect(),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::fixed(&[c])
    }
}

/// Ordinary frequency (Hz, up to a constant offset) of an abscissa value.
pub fn axis_frequency(axis: Axis, x: f64) -> f64 {
    match axis {
        Axis::OmegaRadS => x / (2.0 * PI),
        Axis::DetuningHz => -x,
        Axis::WavelengthNm => SPEED_OF_LIGHT / (x * 1e-9),
    }
}

/// |dν/dx| at `x`.
pub fn axis_frequency_slope(axis: Axis, x: f64) -> f64 {
    match axis {
        Axis::OmegaRadS => 1.0 / (2.0 * PI),
        Axis::DetuningHz => 1.0,
        Axis::WavelengthNm => SPEED_OF_LIGHT * 1e9 / (x * x),
    }
}

/// Fully resolved parameter values.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Resolved {
    pub modes: Vec<ResolvedMode>,
    pub phi_d: f64,
    pub coefficients: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ResolvedMode {
    pub center: f64,
    pub kappa_hz: f64,
    pub strength: f64,
    pub eps_c: f64,
    pub phi_c: f64,
}

impl Resolved {
    pub fn initial(model: &FitModel, coefficients: &[f64]) -> Self {
        let mut r = Self {
            modes: model
                .modes
                .iter()
                .map(|m| ResolvedMode {
                    center: m.center.value,
                    kappa_hz: m.kappa_hz_over_2pi.value,
                    strength: m.strength.value,
                    eps_c: m.eps_c,
                    phi_c: m.phi_c,
                })
                .collect(),
            phi_d: model.phi_d.value,
            coefficients: coefficients.to_vec(),
        };
        r.apply_lock(model.lock);
        r
    }

    pub fn apply_lock(&mut self, lock: Option<DoubletLock>) {
        if let Some(l) = lock {
            let a = self.modes[l.first];
            let b = &mut self.modes[l.second];
            b.center = a.center + l.splitting;
            b.kappa_hz = a.kappa_hz;
            b.strength = a.strength;
        }
    }
}

/// Model evaluation on a fixed abscissa.
#[derive(Debug, Clone)]
pub(crate) struct Evaluator {
    pub axis: Axis,
    pub kind: LineKind,
    pub eps_d: f64,
    nu: Vec<f64>,
    s: Vec<f64>,
    plan: Option<ConvolutionPlan>,
}

impl Evaluator {
    pub fn new(
        axis: Axis,
        abscissa: &[f64],
        model: &FitModel,
        response: &InstrumentResponse,
        center_wavelength_m: Option<f64>,
    ) -> Result<Self> {
        model.validate()?;
        let plan = ConvolutionPlan::new(abscissa, axis, response, center_wavelength_m)?;
        let (lo, hi) = abscissa
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        let mid = 0.5 * (lo + hi);
        let half = if hi > lo { 0.5 * (hi - lo) } else { 1.0 };
        Ok(Self {
            axis,
            kind: model.kind,
            eps_d: model.eps_d,
            nu: abscissa.iter().map(|&x| axis_frequency(axis, x)).collect(),
            s: abscissa.iter().map(|&x| (x - mid) / half).collect(),
            plan,
        })
    }

    /// Line shape without background or instrument response.
    pub fn shape(&self, r: &Resolved) -> Vec<f64> {
        let centers: Vec<f64> = r.modes.iter().map(|m| axis_frequency(self.axis, m.center)).collect();
        let direct = Complex64::from_polar(self.eps_d, -r.phi_d);
        self.nu
            .iter()
            .map(|&nu| match self.kind {
                LineKind::Fano => {
                    let mut amp = direct;
                    for (m, &c) in r.modes.iter().zip(&centers) {
                        amp += cavity_term(m.strength, m.eps_c, m.phi_c, (c - nu) / m.kappa_hz);
                    }
                    amp.norm_sqr()
                }
                LineKind::Dips => {
                    1.0 - r
                        .modes
                        .iter()
                        .zip(&centers)
                        .map(|(m, &c)| {
                            let x = (c - nu) / m.kappa_hz;
                            m.strength / (1.0 + x * x)
                        })
                        .sum::<f64>()
                }
            })
            .collect()
    }

    pub fn background(&self, coefficients: &[f64]) -> Vec<f64> {
        self.s
            .iter()
            .map(|&s| coefficients.iter().rev().fold(0.0, |acc, c| acc * s + c))
            .collect()
    }

    pub fn convolve(&self, y: Vec<f64>) -> Vec<f64> {
        match &self.plan {
            Some(p) => p.apply(&y),
            None => y,
        }
    }

    pub fn curve(&self, r: &Resolved) -> Vec<f64> {
        let shape = self.shape(r);
        let bg = self.background(&r.coefficients);
        self.convolve(shape.iter().zip(&bg).map(|(a, b)| a * b).collect())
    }

    /// Least-squares background coefficients for the given line shape.
    pub fn seed_background(&self, r: &Resolved, degree: usize, y: &[f64], weights: Option<&[f64]>) -> Vec<f64> {
        let shape = self.shape(r);
        let n = y.len();
        let cols = degree + 1;
        let mut a = nalgebra::DMatrix::zeros(n, cols);
        for k in 0..cols {
            let col = self.convolve(shape.iter().zip(&self.s).map(|(v, s)| v * s.powi(k as i32)).collect());
            for i in 0..n {
                a[(i, k)] = col[i] * weights.map_or(1.0, |w| w[i]);
            }
        }
        let b = nalgebra::DVector::from_iterator(n, y.iter().enumerate().map(|(i, v)| v * weights.map_or(1.0, |w| w[i])));
        match a.svd(true, true).solve(&b, 1e-14) {
            Ok(c) => c.iter().copied().collect(),
            Err(_) => {
                let mut c = vec![0.0; cols];
                c[0] = y.iter().sum::<f64>() / n as f64;
                c
            }
        }
    }
}
