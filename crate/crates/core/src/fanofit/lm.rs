//! Bounded Levenberg–Marquardt on a dense residual vector.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Stop when ‖∇‖r‖‖ ≤ tolerance·(1 + ‖r‖).
    pub tolerance: f64,
    /// Initial damping λ.
    pub damping: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            tolerance: 1e-10,
            damping: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIterations,
    SingularJacobian,
    AllFrozen,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::MaxIterations => "max_iterations",
            Termination::SingularJacobian => "singular_jacobian",
            Termination::AllFrozen => "all_frozen",
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct LmOutcome {
    pub x: Vec<f64>,
    pub residuals: Vec<f64>,
    pub jacobian: DMatrix<f64>,
    pub iterations: usize,
    pub termination: Termination,
}

const FD_STEP: f64 = 1e-6;
const MAX_DAMPING: f64 = 1e16;

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Central-difference Jacobian. Steps are taken inside the bounds.
pub(crate) fn jacobian<F>(f: &F, x: &[f64], r0: &[f64], lower: &[f64], upper: &[f64]) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let m = r0.len();
    let mut j = DMatrix::zeros(m, x.len());
    let mut xp = x.to_vec();
    for k in 0..x.len() {
        let h = FD_STEP * x[k].abs().max(1.0);
        let hi = (x[k] + h).min(upper[k]);
        let lo = (x[k] - h).max(lower[k]);
        xp[k] = hi;
        let rp = f(&xp);
        xp[k] = lo;
        let rm = f(&xp);
        xp[k] = x[k];
        let (rp, rm, span) = match (hi > x[k], lo < x[k]) {
            (true, true) => (rp, rm, hi - lo),
            (true, false) => (rp, r0.to_vec(), hi - x[k]),
            (false, true) => (r0.to_vec(), rm, x[k] - lo),
            (false, false) => continue,
        };
        for i in 0..m {
            j[(i, k)] = (rp[i] - rm[i]) / span;
        }
    }
    j
}

/// Minimize ½‖f(x)‖² for x in the box [lower, upper].
pub(crate) fn minimize<F>(f: &F, x0: &[f64], lower: &[f64], upper: &[f64], opts: &FitOptions) -> LmOutcome
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = x0.len();
    let clamp = |x: &mut [f64]| {
        for k in 0..n {
            x[k] = x[k].clamp(lower[k], upper[k]);
        }
    };
    let mut x = x0.to_vec();
    clamp(&mut x);
    let mut r = f(&x);
    let mut cost = sum_sq(&r);
    let mut lambda = opts.damping;
    let tol = opts.tolerance;

    for iter in 0..opts.max_iter {
        let j = jacobian(f, &x, &r, lower, upper);
        let jt = j.transpose();
        let a = &jt * &j;
        let g = &jt * DVector::from_column_slice(&r);
        let diag: Vec<f64> = (0..n).map(|k| a[(k, k)]).collect();
        if diag.iter().any(|&d| d == 0.0 || !d.is_finite()) {
            return LmOutcome {
                x,
                residuals: r,
                jacobian: j,
                iterations: iter,
                termination: Termination::SingularJacobian,
            };
        }
        // gradient of ‖r‖ with components pushing against an active bound removed
        let pg = (0..n)
            .map(|k| {
                let at_lo = x[k] <= lower[k] && g[k] > 0.0;
                let at_hi = x[k] >= upper[k] && g[k] < 0.0;
                if at_lo || at_hi {
                    0.0
                } else {
                    g[k] * g[k]
                }
            })
            .sum::<f64>()
            .sqrt();
        let norm = cost.sqrt();
        if pg <= tol * (1.0 + norm) * norm {
            return done(x, r, j, iter, Termination::Converged);
        }

        loop {
            let mut lhs = a.clone();
            for k in 0..n {
                lhs[(k, k)] += lambda * diag[k];
            }
            let step = match lhs.cholesky() {
                Some(ch) => ch.solve(&(-&g)),
                None => {
                    lambda *= 10.0;
                    if lambda > MAX_DAMPING {
                        return done(x, r, j, iter + 1, Termination::SingularJacobian);
                    }
                    continue;
                }
            };
            let mut xn: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            clamp(&mut xn);
            let rn = f(&xn);
            let cn = sum_sq(&rn);
            if cn.is_finite() && cn < cost {
                let small_gain = cost - cn <= tol * tol * cn;
                x = xn;
                r = rn;
                cost = cn;
                lambda = (lambda / 3.0).max(1e-15);
                if small_gain {
                    let j = jacobian(f, &x, &r, lower, upper);
                    return done(x, r, j, iter + 1, Termination::Converged);
                }
                break;
            }
            lambda *= 4.0;
            if lambda > MAX_DAMPING {
                // no descent direction left at machine precision
                return done(x, r, j, iter + 1, Termination::Converged);
            }
        }
    }
    let j = jacobian(f, &x, &r, lower, upper);
    done(x, r, j, opts.max_iter, Termination::MaxIterations)
}

fn done(x: Vec<f64>, residuals: Vec<f64>, jacobian: DMatrix<f64>, iterations: usize, termination: Termination) -> LmOutcome {
    LmOutcome {
        x,
        residuals,
        jacobian,
        iterations,
        termination,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| vec![10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]];
        let inf = f64::INFINITY;
        let out = minimize(&f, &[-1.2, 1.0], &[-inf, -inf], &[inf, inf], &FitOptions::default());
        assert_eq!(out.termination, Termination::Converged);
        assert!((out.x[0] - 1.0).abs() < 1e-8 && (out.x[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn respects_bounds() {
        let f = |x: &[f64]| vec![x[0] - 3.0];
        let out = minimize(&f, &[0.0], &[-1.0], &[1.0], &FitOptions::default());
        assert_eq!(out.x[0], 1.0);
        assert_eq!(out.termination, Termination::Converged);
    }

    #[test]
    fn exponential_decay() {
        let ts: Vec<f64> = (0..40).map(|i| i as f64 * 0.1).collect();
        let data: Vec<f64> = ts.iter().map(|t| 2.5 * (-1.3 * t).exp()).collect();
        let f = |x: &[f64]| ts.iter().zip(&data).map(|(t, y)| x[0] * (-x[1] * t).exp() - y).collect();
        let inf = f64::INFINITY;
        let out = minimize(&f, &[1.0, 0.5], &[-inf, 0.0], &[inf, inf], &FitOptions::default());
        assert!((out.x[0] - 2.5).abs() < 1e-8 && (out.x[1] - 1.3).abs() < 1e-8);
    }

    #[test]
    fn insensitive_parameter_is_singular() {
        let f = |x: &[f64]| vec![x[0] - 1.0, x[0] + 1.0];
        let inf = f64::INFINITY;
        let out = minimize(&f, &[0.3, 7.0], &[-inf, -inf], &[inf, inf], &FitOptions::default());
        assert_eq!(out.termination, Termination::SingularJacobian);
    }

    #[test]
    fn step_limit_reported() {
        let f = |x: &[f64]| vec![10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]];
        let inf = f64::INFINITY;
        let opts = FitOptions { max_iter: 2, ..Default::default() };
        let out = minimize(&f, &[-1.2, 1.0], &[-inf, -inf], &[inf, inf], &opts);
        assert_eq!(out.termination, Termination::MaxIterations);
        assert_eq!(out.iterations, 2);
    }
}
