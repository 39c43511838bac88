//! Instrument-response convolution.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, invalid, Result};
use crate::trace::{Axis, SpectrumTrace};
use crate::units::SPEED_OF_LIGHT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ResponseKind {
    #[default]
    None,
    Gaussian,
}

/// Spectrometer line shape, with its FWHM given in wavelength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct InstrumentResponse {
    pub kind: ResponseKind,
    /// Full width at half maximum, m.
    #[serde(default)]
    pub fwhm_m: f64,
}

impl InstrumentResponse {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn gaussian(fwhm_m: f64) -> Self {
        Self {
            kind: ResponseKind::Gaussian,
            fwhm_m,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == ResponseKind::Gaussian {
            ensure_positive("fwhm_m", self.fwhm_m)?;
        }
        Ok(())
    }

    /// FWHM in the units of `axis`. Frequency axes need the wavelength the
    /// trace is centred on.
    pub fn width_on_axis(&self, axis: Axis, center_wavelength_m: Option<f64>) -> Result<f64> {
        let lambda = || {
            center_wavelength_m
                .filter(|l| l.is_finite() && *l > 0.0)
                .ok_or_else(|| invalid("center_wavelength", "required to convert the response to a frequency axis"))
        };
        Ok(match axis {
            Axis::WavelengthNm => self.fwhm_m * 1e9,
            Axis::DetuningHz => SPEED_OF_LIGHT * self.fwhm_m / lambda()?.powi(2),
            Axis::OmegaRadS => 2.0 * std::f64::consts::PI * SPEED_OF_LIGHT * self.fwhm_m / lambda()?.powi(2),
        })
    }
}

/// Precomputed, row-normalized convolution weights for one abscissa.
#[derive(Debug, Clone)]
pub(crate) struct ConvolutionPlan {
    rows: Vec<(usize, Vec<f64>)>,
}

const SPACING_TOLERANCE: f64 = 0.1;
const CUTOFF_SIGMAS: f64 = 6.0;

impl ConvolutionPlan {
    /// `None` for the identity response.
    pub fn new(
        abscissa: &[f64],
        axis: Axis,
        response: &InstrumentResponse,
        center_wavelength_m: Option<f64>,
    ) -> Result<Option<Self>> {
        response.validate()?;
        if response.kind == ResponseKind::None {
            return Ok(None);
        }
        let n = abscissa.len();
        if n < 3 {
            return Err(invalid("trace", "at least three points needed for convolution"));
        }
        let fwhm = response.width_on_axis(axis, center_wavelength_m)?;
        let span = (abscissa[n - 1] - abscissa[0]).abs();
        if fwhm >= span {
            return Err(invalid(
                "response",
                format!("kernel FWHM {fwhm:e} is wider than the trace window {span:e}"),
            ));
        }
        let mean_step = span / (n - 1) as f64;
        if abscissa
            .windows(2)
            .any(|w| ((w[1] - w[0]).abs() - mean_step).abs() > SPACING_TOLERANCE * mean_step)
        {
            return Err(invalid("trace", "abscissa sampling is not uniform enough for convolution"));
        }
        let sigma = fwhm / (8.0 * 2f64.ln()).sqrt();
        let reach = CUTOFF_SIGMAS * sigma;
        // trapezoid weights absorb small spacing variations
        let weight = |j: usize| {
            let left = if j > 0 { (abscissa[j] - abscissa[j - 1]).abs() } else { 0.0 };
            let right = if j + 1 < n { (abscissa[j + 1] - abscissa[j]).abs() } else { 0.0 };
            0.5 * (left + right)
        };
        let mut rows = Vec::with_capacity(n);
        let (mut lo, mut hi) = (0usize, 0usize);
        for i in 0..n {
            let xi = abscissa[i];
            while (abscissa[lo] - xi).abs() > reach && lo < i {
                lo += 1;
            }
            hi = hi.max(i);
            while hi + 1 < n && (abscissa[hi + 1] - xi).abs() <= reach {
                hi += 1;
            }
            let mut w: Vec<f64> = (lo..=hi)
                .map(|j| {
                    let d = (abscissa[j] - xi) / sigma;
                    (-0.5 * d * d).exp() * weight(j)
                })
                .collect();
            let total: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= total);
            rows.push((lo, w));
        }
        Ok(Some(Self { rows }))
    }

    pub fn apply(&self, y: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|(start, w)| w.iter().zip(&y[*start..]).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Convolve a trace with the instrument response.
pub fn convolve_response(
    trace: &SpectrumTrace,
    response: &InstrumentResponse,
    center_wavelength_m: Option<f64>,
) -> Result<SpectrumTrace> {
    trace.validate()?;
    let plan = ConvolutionPlan::new(&trace.abscissa, trace.axis, response, center_wavelength_m)?;
    let mut out = trace.clone();
    if let Some(plan) = plan {
        out.intensity = plan.apply(&trace.intensity);
    }
    Ok(out)
}
