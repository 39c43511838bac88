//! Synthetic traces and initial-guess seeding.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::convolve::InstrumentResponse;
use super::model::{axis_frequency_slope, Background, Evaluator, FitModel, LineKind, Resolved};
use crate::error::{ensure_non_negative, invalid, Result};
use crate::trace::{is_strictly_monotone, Axis, SpectrumTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    #[default]
    None,
    /// y (1 + level·n)
    Multiplicative,
    /// y + level·max(y)·n
    Additive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Noise {
    #[serde(default)]
    pub kind: NoiseKind,
    #[serde(default)]
    pub level: f64,
    #[serde(default)]
    pub seed: u64,
}

impl Noise {
    pub fn multiplicative(level: f64, seed: u64) -> Self {
        Self {
            kind: NoiseKind::Multiplicative,
            level,
            seed,
        }
    }
}

/// Model × background, convolved with the response, with seeded Gaussian
/// noise. Identical inputs give bit-identical traces.
pub fn synthesize(
    model: &FitModel,
    background: &Background,
    response: &InstrumentResponse,
    center_wavelength_nm: Option<f64>,
    axis: Axis,
    abscissa: &[f64],
    noise: &Noise,
) -> Result<SpectrumTrace> {
    if abscissa.len() < 2 || !is_strictly_monotone(abscissa) {
        return Err(invalid("abscissa", "needs at least two strictly monotone points"));
    }
    ensure_non_negative("noise level", noise.level)?;
    let eval = Evaluator::new(axis, abscissa, model, response, center_wavelength_nm.map(|l| l * 1e-9))?;
    let coefficients: Vec<f64> = if background.coefficients.is_empty() {
        vec![1.0]
    } else {
        background.coefficients.iter().map(|c| c.value).collect()
    };
    let mut y = eval.curve(&Resolved::initial(model, &coefficients));
    add_noise(&mut y, noise)?;
    SpectrumTrace::new(axis, abscissa.to_vec(), y)
}

/// Applies seeded Gaussian noise in place.
pub fn add_noise(y: &mut [f64], noise: &Noise) -> Result<()> {
    ensure_non_negative("noise level", noise.level)?;
    if noise.kind == NoiseKind::None || noise.level == 0.0 {
        return Ok(());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let normal = Normal::new(0.0, noise.level).expect("level checked non-negative");
    let peak = y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    for v in y.iter_mut() {
        let n = normal.sample(&mut rng);
        match noise.kind {
            NoiseKind::Multiplicative => *v *= 1.0 + n,
            NoiseKind::Additive => *v += peak * n,
            NoiseKind::None => {}
        }
    }
    Ok(())
}

/// A resonance located by [`seed_modes`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedPeak {
    /// Position on the trace abscissa.
    pub center: f64,
    /// Half width at half maximum converted to Hz.
    pub kappa_hz: f64,
    /// Height of the feature relative to the median level.
    pub contrast: f64,
}

/// Up to `count` strongest local extrema: peaks for Fano traces, dips for
/// transmission traces. Returned in abscissa order.
pub fn seed_modes(trace: &SpectrumTrace, count: usize, kind: LineKind) -> Result<Vec<SeedPeak>> {
    trace.validate()?;
    let n = trace.len();
    if n < 5 {
        return Err(invalid("trace", "too short to seed"));
    }
    // 5-point moving average
    let smooth: Vec<f64> = (0..n)
        .map(|i| {
            let (a, b) = (i.saturating_sub(2), (i + 2).min(n - 1));
            trace.intensity[a..=b].iter().sum::<f64>() / (b - a + 1) as f64
        })
        .collect();
    let mut sorted = smooth.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[n / 2];
    let sign = if kind == LineKind::Dips { -1.0 } else { 1.0 };
    let dev: Vec<f64> = smooth.iter().map(|v| sign * (v - median)).collect();

    let mut candidates: Vec<usize> = (1..n - 1)
        .filter(|&i| dev[i] > 0.0 && dev[i] >= dev[i - 1] && dev[i] > dev[i + 1])
        .collect();
    candidates.sort_by(|&a, &b| dev[b].total_cmp(&dev[a]));

    let mut peaks: Vec<SeedPeak> = Vec::new();
    let mut taken: Vec<(usize, usize)> = Vec::new();
    for i in candidates {
        if peaks.len() == count {
            break;
        }
        if taken.iter().any(|&(a, b)| i >= a && i <= b) {
            continue;
        }
        let half = 0.5 * dev[i];
        let mut lo = i;
        while lo > 0 && dev[lo] > half {
            lo -= 1;
        }
        let mut hi = i;
        while hi + 1 < n && dev[hi] > half {
            hi += 1;
        }
        let x = &trace.abscissa;
        let hw = 0.5 * (x[hi] - x[lo]).abs();
        taken.push((lo, hi));
        peaks.push(SeedPeak {
            center: x[i],
            kappa_hz: hw * axis_frequency_slope(trace.axis, x[i]),
            contrast: dev[i] / median.abs().max(f64::MIN_POSITIVE),
        });
    }
    peaks.sort_by(|a, b| a.center.total_cmp(&b.center));
    Ok(peaks)
}
