//! Least-squares extraction of cavity linewidths and Purcell factors from
//! spectrometer traces, plus the synthetic-trace generator used to test it.
//!
//! κ and the mode strengths are fitted in log space; every other parameter
//! is fitted linearly within its bounds. A polynomial background multiplies
//! the line shape and the product is convolved with the instrument
//! response before comparison with the data.

mod convolve;
mod lm;
mod model;
mod synth;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use convolve::{convolve_response, InstrumentResponse, ResponseKind};
pub use lm::{FitOptions, Termination};
pub use model::{axis_frequency, axis_frequency_slope, Background, DoubletLock, FitModel, FitParam, LineKind, ModeSpec};
pub use synth::{add_noise, seed_modes, synthesize, Noise, NoiseKind, SeedPeak};

use model::{Evaluator, Resolved};

use crate::error::{invalid, Error, Result};
use crate::par::{self, Execution};
use crate::trace::SpectrumTrace;

/// Everything about a fit except the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSpec {
    pub model: FitModel,
    #[serde(default)]
    pub background: Background,
    #[serde(default)]
    pub response: InstrumentResponse,
    /// Needed to express a wavelength response on a frequency axis.
    #[serde(default)]
    pub center_wavelength_nm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitProblem {
    pub trace: SpectrumTrace,
    pub spec: FitSpec,
}

impl FitProblem {
    pub fn new(trace: SpectrumTrace, spec: FitSpec) -> Self {
        Self { trace, spec }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub parameters: BTreeMap<String, f64>,
    /// One-sigma errors of the free parameters.
    pub errors: BTreeMap<String, f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub status: Termination,
    #[serde(skip)]
    pub initial_residual_norm: f64,
    /// Model at the optimum, on the trace abscissa.
    #[serde(skip)]
    pub curve: Vec<f64>,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.parameters.get(name).copied()
    }

    pub fn error(&self, name: &str) -> Option<f64> {
        self.errors.get(name).copied()
    }

    pub fn converged(&self) -> bool {
        matches!(self.status, Termination::Converged | Termination::AllFrozen)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Target {
    Center(usize),
    Kappa(usize),
    Strength(usize),
    PhiD,
    Coef(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Transform {
    Log,
    Linear { origin: f64, scale: f64 },
}

#[derive(Debug, Clone)]
struct Slot {
    name: String,
    target: Target,
    param: FitParam,
    transform: Transform,
}

impl Slot {
    fn to_internal(&self, p: f64) -> f64 {
        match self.transform {
            Transform::Log => p.ln(),
            Transform::Linear { origin, scale } => (p - origin) / scale,
        }
    }

    fn to_physical(&self, t: f64) -> f64 {
        match self.transform {
            Transform::Log => t.exp(),
            Transform::Linear { origin, scale } => origin + t * scale,
        }
    }

    /// dp/dθ
    fn slope(&self, p: f64) -> f64 {
        match self.transform {
            Transform::Log => p,
            Transform::Linear { scale, .. } => scale,
        }
    }

    fn bounds(&self) -> (f64, f64) {
        let lo = self.param.lower.unwrap_or(f64::NEG_INFINITY);
        let hi = self.param.upper.unwrap_or(f64::INFINITY);
        match self.transform {
            Transform::Log => (if lo > 0.0 { lo.ln() } else { f64::NEG_INFINITY }, if hi > 0.0 { hi.ln() } else { f64::NEG_INFINITY }),
            Transform::Linear { .. } => (self.to_internal(lo), self.to_internal(hi)),
        }
    }
}

fn assign(r: &mut Resolved, target: Target, v: f64) {
    match target {
        Target::Center(k) => r.modes[k].center = v,
        Target::Kappa(k) => r.modes[k].kappa_hz = v,
        Target::Strength(k) => r.modes[k].strength = v,
        Target::PhiD => r.phi_d = v,
        Target::Coef(i) => r.coefficients[i] = v,
    }
}

fn check_param(name: &str, p: &FitParam, positive: bool) -> Result<()> {
    let bad = |why: String| Error::Validation(format!("parameter `{name}`: {why}"));
    if !p.value.is_finite() {
        return Err(bad("initial value is not finite".into()));
    }
    if positive && p.value <= 0.0 {
        return Err(bad(format!("must be > 0, got {}", p.value)));
    }
    if let (Some(lo), Some(hi)) = (p.lower, p.upper) {
        if lo > hi {
            return Err(bad(format!("lower bound {lo} exceeds upper bound {hi}")));
        }
    }
    if p.lower.is_some_and(|lo| p.value < lo) || p.upper.is_some_and(|hi| p.value > hi) {
        return Err(bad(format!("initial value {} outside its bounds", p.value)));
    }
    Ok(())
}

fn build_slots(spec: &FitSpec, eval: &Evaluator, coefficients: &[FitParam]) -> Result<Vec<Slot>> {
    let model = &spec.model;
    let locked = model.lock.map(|l| l.second);
    let strength = model.strength_name();
    let mut slots = Vec::new();
    for (k, m) in model.modes.iter().enumerate() {
        let frozen = locked == Some(k);
        let prefix = format!("mode{k}");
        check_param(&format!("{prefix}.center"), &m.center, false)?;
        check_param(&format!("{prefix}.kappa_hz_over_2pi"), &m.kappa_hz_over_2pi, true)?;
        check_param(&format!("{prefix}.{strength}"), &m.strength, model.kind == model::LineKind::Fano)?;
        let width = m.kappa_hz_over_2pi.value / axis_frequency_slope(eval.axis, m.center.value);
        let lock = |mut p: FitParam| {
            if frozen {
                p.free = false;
            }
            p
        };
        slots.push(Slot {
            name: format!("{prefix}.center"),
            target: Target::Center(k),
            param: lock(m.center),
            transform: Transform::Linear { origin: m.center.value, scale: width },
        });
        slots.push(Slot {
            name: format!("{prefix}.kappa_hz_over_2pi"),
            target: Target::Kappa(k),
            param: lock(m.kappa_hz_over_2pi),
            transform: Transform::Log,
        });
        let strength_transform = match model.kind {
            model::LineKind::Fano => Transform::Log,
            model::LineKind::Dips => Transform::Linear { origin: m.strength.value, scale: m.strength.value.abs().max(1e-3) },
        };
        slots.push(Slot {
            name: format!("{prefix}.{strength}"),
            target: Target::Strength(k),
            param: lock(m.strength),
            transform: strength_transform,
        });
    }
    check_param("phi_d", &model.phi_d, false)?;
    slots.push(Slot {
        name: "phi_d".into(),
        target: Target::PhiD,
        param: model.phi_d,
        transform: Transform::Linear { origin: model.phi_d.value, scale: 1.0 },
    });
    let c_scale = coefficients.first().map_or(1.0, |c| c.value.abs()).max(f64::MIN_POSITIVE);
    for (i, c) in coefficients.iter().enumerate() {
        check_param(&format!("background.c{i}"), c, false)?;
        slots.push(Slot {
            name: format!("background.c{i}"),
            target: Target::Coef(i),
            param: *c,
            transform: Transform::Linear { origin: c.value, scale: c.value.abs().max(1e-3 * c_scale) },
        });
    }
    Ok(slots)
}

/// Fit one trace.
pub fn fit(problem: &FitProblem, options: &FitOptions) -> Result<FitResult> {
    let FitProblem { trace, spec } = problem;
    trace.validate()?;
    let eval = Evaluator::new(
        trace.axis,
        &trace.abscissa,
        &spec.model,
        &spec.response,
        spec.center_wavelength_nm.map(|l| l * 1e-9),
    )?;
    let weights: Option<Vec<f64>> = match &trace.uncertainty {
        Some(u) => {
            if u.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
                return Err(invalid("uncertainty", "must be finite and > 0"));
            }
            Some(u.iter().map(|s| 1.0 / s).collect())
        }
        None => None,
    };

    let coefficients: Vec<FitParam> = if spec.background.coefficients.is_empty() {
        let r0 = Resolved::initial(&spec.model, &[1.0]);
        eval.seed_background(&r0, spec.background.degree, &trace.intensity, weights.as_deref())
            .into_iter()
            .map(FitParam::free)
            .collect()
    } else {
        spec.background.coefficients.clone()
    };
    let slots = build_slots(spec, &eval, &coefficients)?;
    let base = Resolved::initial(&spec.model, &coefficients.iter().map(|c| c.value).collect::<Vec<_>>());
    let free: Vec<usize> = (0..slots.len()).filter(|&i| slots[i].param.free).collect();

    let resolve = |theta: &[f64]| {
        let mut r = base.clone();
        for (&i, &t) in free.iter().zip(theta) {
            assign(&mut r, slots[i].target, slots[i].to_physical(t));
        }
        r.apply_lock(spec.model.lock);
        r
    };
    let residuals = |theta: &[f64]| -> Vec<f64> {
        let c = eval.curve(&resolve(theta));
        c.iter()
            .zip(&trace.intensity)
            .enumerate()
            .map(|(i, (m, y))| (m - y) * weights.as_ref().map_or(1.0, |w| w[i]))
            .collect()
    };
    let norm = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>().sqrt();

    let theta0: Vec<f64> = free.iter().map(|&i| slots[i].to_internal(slots[i].param.value)).collect();
    let r_init = residuals(&theta0);
    let initial_residual_norm = norm(&r_init);
    if !initial_residual_norm.is_finite() {
        return Err(Error::Fit("initial residual is not finite".into()));
    }

    let report = |theta: &[f64], res: &[f64], iterations: usize, status: Termination, errors: BTreeMap<String, f64>| {
        let r = resolve(theta);
        let mut parameters = BTreeMap::new();
        for s in &slots {
            let v = match s.target {
                Target::Center(k) => r.modes[k].center,
                Target::Kappa(k) => r.modes[k].kappa_hz,
                Target::Strength(k) => r.modes[k].strength,
                Target::PhiD => r.phi_d,
                Target::Coef(i) => r.coefficients[i],
            };
            parameters.insert(s.name.clone(), v);
        }
        FitResult {
            parameters,
            errors,
            residual_norm: norm(res),
            iterations,
            status,
            initial_residual_norm,
            curve: eval.curve(&r),
        }
    };

    if free.is_empty() {
        return Ok(report(&[], &r_init, 0, Termination::AllFrozen, BTreeMap::new()));
    }
    if trace.len() <= free.len() {
        return Err(invalid("trace", format!("{} points cannot constrain {} free parameters", trace.len(), free.len())));
    }

    let (lower, upper): (Vec<f64>, Vec<f64>) = free.iter().map(|&i| slots[i].bounds()).unzip();
    let out = lm::minimize(&residuals, &theta0, &lower, &upper, options);

    let mut status = out.termination;
    let mut errors = BTreeMap::new();
    let dof = (trace.len() - free.len()) as f64;
    let s2 = out.residuals.iter().map(|v| v * v).sum::<f64>() / dof;
    let jtj = out.jacobian.transpose() * &out.jacobian;
    match jtj.clone().cholesky().map(|c| c.inverse()) {
        Some(cov) => {
            for (col, &i) in free.iter().enumerate() {
                let p = slots[i].to_physical(out.x[col]);
                errors.insert(slots[i].name.clone(), slots[i].slope(p).abs() * (cov[(col, col)] * s2).sqrt());
            }
        }
        None => {
            if status == Termination::Converged {
                status = Termination::SingularJacobian;
            }
        }
    }
    Ok(report(&out.x, &out.residuals, out.iterations, status, errors))
}

/// Fit independent problems, concurrently when `exec` allows.
pub fn fit_many(problems: &[FitProblem], options: &FitOptions, exec: Execution) -> Vec<Result<FitResult>> {
    par::map(exec, problems, |p| fit(p, options))
}
