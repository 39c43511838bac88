use fano_cqed::dynamics::{closed_form_spectrum, numeric_spectrum_with, relative_l2};
use fano_cqed::trace::linspace;
use fano_cqed::{CollectionChannel, Execution, SystemParams};
use serde::Deserialize;

use crate::failure::{CliResult, Failure};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegressDoc {
    pub g_hz_over_2pi: f64,
    pub kappa_hz_over_2pi: f64,
    pub gamma_s_hz_over_2pi: f64,
    pub omega_c_hz_over_2pi: f64,
    /// Overrides `regime_multiplier` when given.
    #[serde(default)]
    pub gamma_p_hz_over_2pi: Option<f64>,
    /// γ_p = multiplier · max(κ, g, γ_s).
    #[serde(default = "default_multiplier")]
    pub regime_multiplier: f64,
    #[serde(default = "CollectionChannel::lens")]
    pub channel: CollectionChannel,
    /// Half width of the window around ω_c, in units of κ.
    #[serde(default = "default_span")]
    pub span_kappa: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

fn default_multiplier() -> f64 {
    1e3
}

fn default_span() -> f64 {
    10.0
}

fn default_points() -> usize {
    401
}

fn default_threshold() -> f64 {
    1e-3
}

pub struct RegressReport {
    pub params: SystemParams,
    pub omega: Vec<f64>,
    pub numeric: Vec<f64>,
    pub closed: Vec<f64>,
    /// |S_numeric − S_closed| / max |S_closed| per point.
    pub rel_error: Vec<f64>,
    pub max_rel_error: f64,
    pub rel_l2: f64,
    pub threshold: f64,
}

impl RegressReport {
    pub fn passed(&self) -> bool {
        self.max_rel_error <= self.threshold
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# schema: fano-cqed/1\n# gamma_p_hz_over_2pi: {:e}\nomega_rad_s,S_numeric,S_closed,rel_error\n",
            self.params.gamma_p.hz()
        );
        for i in 0..self.omega.len() {
            out.push_str(&format!(
                "{:e},{:e},{:e},{:e}\n",
                self.omega[i], self.numeric[i], self.closed[i], self.rel_error[i]
            ));
        }
        out.push_str(&format!(
            "# max_rel_error: {:e} (threshold {:e}, {})\n",
            self.max_rel_error,
            self.threshold,
            if self.passed() { "pass" } else { "fail" }
        ));
        out
    }
}

pub fn run(doc: &RegressDoc, tolerance: Option<f64>, exec: Execution) -> CliResult<RegressReport> {
    let positive = |v: f64| v.is_finite() && v > 0.0;
    if !positive(doc.regime_multiplier) || !positive(doc.span_kappa) || doc.points < 2 {
        return Err(Failure::input("regime_multiplier and span_kappa must be positive, points at least 2"));
    }
    let gamma_p = doc.gamma_p_hz_over_2pi.unwrap_or_else(|| {
        doc.regime_multiplier * doc.kappa_hz_over_2pi.max(doc.g_hz_over_2pi).max(doc.gamma_s_hz_over_2pi)
    });
    let params = SystemParams::from_hz(
        doc.g_hz_over_2pi,
        doc.kappa_hz_over_2pi,
        doc.gamma_s_hz_over_2pi,
        gamma_p,
        doc.omega_c_hz_over_2pi,
        doc.omega_c_hz_over_2pi,
    )?;
    params.validate()?;

    let (wc, k) = (params.omega_c.value(), params.kappa.value());
    let omega = linspace(wc - doc.span_kappa * k, wc + doc.span_kappa * k, doc.points);
    let numeric = numeric_spectrum_with(&params, &doc.channel, &omega, exec)?.intensity;
    let closed = closed_form_spectrum(&params, &doc.channel, &omega)?.intensity;

    let peak = closed.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let rel_error: Vec<f64> = numeric
        .iter()
        .zip(&closed)
        .map(|(n, c)| {
            let d = (n - c).abs();
            if d == 0.0 {
                0.0
            } else {
                d / peak
            }
        })
        .collect();
    let max_rel_error = rel_error.iter().fold(0.0f64, |a, &v| a.max(v));
    let rel_l2 = if peak > 0.0 { relative_l2(&numeric, &closed) } else { 0.0 };
    Ok(RegressReport {
        params,
        omega,
        numeric,
        closed,
        rel_error,
        max_rel_error,
        rel_l2,
        threshold: tolerance.unwrap_or(doc.threshold),
    })
}
