use std::f64::consts::PI;

use fano_cqed::dynamics::numeric_spectrum_with;
use fano_cqed::fanofit::{add_noise, convolve_response, synthesize, Background, FitModel, InstrumentResponse, Noise};
use fano_cqed::spectrum::{detected_spectrum, drop_filter_spectrum, lens_spectrum, multimode_spectrum, DropMode, MultiModeModel};
use fano_cqed::trace::linspace;
use fano_cqed::units::SPEED_OF_LIGHT;
use fano_cqed::{Axis, CollectionChannel, Execution, Rate, SpectrumTrace, SystemParams};
use serde::Deserialize;

use crate::failure::{CliResult, Failure};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateDoc {
    pub spectrum: SpectrumSpec,
    pub grid: Grid,
    #[serde(default)]
    pub response: InstrumentResponse,
    #[serde(default)]
    pub center_wavelength_nm: Option<f64>,
    #[serde(default)]
    pub noise: Noise,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpectrumSpec {
    /// Normalized lens line shape on a detuning axis.
    Lens { f_o: f64, kappa_hz_over_2pi: f64 },
    /// Closed-form spectrum of a single mode and dipole.
    Detected {
        system: SystemParams,
        #[serde(default = "CollectionChannel::lens")]
        channel: CollectionChannel,
    },
    /// Time-domain spectrum from the moment equations.
    Numeric {
        system: SystemParams,
        #[serde(default = "CollectionChannel::lens")]
        channel: CollectionChannel,
    },
    Multimode { model: MultiModeModel },
    DropFilter {
        modes: Vec<DropMode>,
        #[serde(default = "one")]
        background: f64,
    },
    /// The fitter's forward model.
    FitModel {
        model: FitModel,
        #[serde(default)]
        background: Background,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub axis: Option<Axis>,
}

pub fn run(doc: &SimulateDoc, seed: Option<u64>) -> CliResult<SpectrumTrace> {
    let g = &doc.grid;
    if g.points < 2 || !g.start.is_finite() || !g.stop.is_finite() || g.start == g.stop {
        return Err(Failure::input("grid needs two or more points over a non-empty finite range"));
    }
    let xs = linspace(g.start, g.stop, g.points);
    let mut noise = doc.noise;
    if let Some(s) = seed {
        noise.seed = s;
    }
    let lambda_m = doc.center_wavelength_nm.map(|l| l * 1e-9);

    let trace = match &doc.spectrum {
        SpectrumSpec::Lens { f_o, kappa_hz_over_2pi } => {
            if g.axis.unwrap_or(Axis::DetuningHz) != Axis::DetuningHz {
                return Err(Failure::input("lens spectra use the detuning_hz axis"));
            }
            let kappa = Rate::from_hz(*kappa_hz_over_2pi)?;
            let t = lens_spectrum(*f_o, kappa, &xs)?;
            convolve_response(&t, &doc.response, lambda_m)?
        }
        SpectrumSpec::FitModel { model, background } => {
            let axis = g.axis.unwrap_or(Axis::WavelengthNm);
            return Ok(synthesize(model, background, &doc.response, doc.center_wavelength_nm, axis, &xs, &noise)?);
        }
        physical => {
            let axis = g.axis.unwrap_or(Axis::OmegaRadS);
            let omega = to_omega(axis, &xs)?;
            let t = match physical {
                SpectrumSpec::Detected { system, channel } => detected_spectrum(system, channel, &omega)?,
                SpectrumSpec::Numeric { system, channel } => {
                    numeric_spectrum_with(system, channel, &omega, Execution::default())?
                }
                SpectrumSpec::Multimode { model } => multimode_spectrum(model, &omega)?,
                SpectrumSpec::DropFilter { modes, background } => drop_filter_spectrum(modes, *background, &omega)?,
                _ => unreachable!("handled above"),
            };
            let t = SpectrumTrace::new(axis, xs, t.intensity)?;
            convolve_response(&t, &doc.response, lambda_m)?
        }
    };
    let mut trace = trace;
    add_noise(&mut trace.intensity, &noise)?;
    Ok(trace)
}

fn to_omega(axis: Axis, xs: &[f64]) -> CliResult<Vec<f64>> {
    match axis {
        Axis::OmegaRadS => Ok(xs.to_vec()),
        Axis::WavelengthNm => {
            if xs.iter().any(|&x| x <= 0.0) {
                return Err(Failure::input("wavelengths must be positive"));
            }
            Ok(xs.iter().map(|&l| 2.0 * PI * SPEED_OF_LIGHT / (l * 1e-9)).collect())
        }
        Axis::DetuningHz => Err(Failure::input(
            "detuning_hz grids are only defined for lens spectra; use omega_rad_s or wavelength_nm",
        )),
    }
}
