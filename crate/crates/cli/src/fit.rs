use fano_cqed::fanofit::{fit, FitOptions, FitProblem, FitResult, FitSpec};
use fano_cqed::SpectrumTrace;
use serde::Deserialize;

use crate::failure::CliResult;

#[derive(Debug, Deserialize)]
pub struct FitDoc {
    #[serde(flatten)]
    pub spec: FitSpec,
    #[serde(default)]
    pub options: FitOptions,
}

pub fn run(trace: SpectrumTrace, doc: FitDoc, tolerance: Option<f64>) -> CliResult<(FitResult, SpectrumTrace)> {
    let mut options = doc.options;
    if let Some(t) = tolerance {
        options.tolerance = t;
    }
    let problem = FitProblem::new(trace, doc.spec);
    let result = fit(&problem, &options)?;
    Ok((result, problem.trace))
}

/// Data, model and residual on the trace abscissa.
pub fn overlay_csv(trace: &SpectrumTrace, result: &FitResult) -> String {
    let mut out = format!("# schema: fano-cqed/1\n{},intensity,model,residual\n", trace.axis.column());
    for ((x, y), m) in trace.abscissa.iter().zip(&trace.intensity).zip(&result.curve) {
        out.push_str(&format!("{x:e},{y:e},{m:e},{:e}\n", y - m));
    }
    out
}
