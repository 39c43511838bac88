//! Adaptive Dormand–Prince 5(4) integrator for small fixed-size systems.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-11,
            atol: 1e-13,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// difference between 5th and embedded 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], terms: &[(f64, &[f64; N])], h: f64) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrate `dy/dt = f(y)` (autonomous) from `t0` to `t1`, returning the
/// state at `t1`. `h` carries the step size between calls.
pub fn integrate<const N: usize, F>(
    f: &F,
    mut y: [f64; N],
    t0: f64,
    t1: f64,
    h: &mut f64,
    tol: &Tolerances,
    stats: &mut Stats,
) -> Result<[f64; N]>
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let mut t = t0;
    if t1 <= t0 {
        return Ok(y);
    }
    if *h <= 0.0 || !h.is_finite() {
        *h = (t1 - t0) * 1e-3;
    }
    let mut k1 = f(&y);
    let mut steps = 0usize;
    while t < t1 {
        if steps >= tol.max_steps {
            return Err(Error::Numerical(format!(
                "step limit {} reached at t = {t:e} (h = {:e}, accepted {}, rejected {})",
                tol.max_steps, *h, stats.accepted, stats.rejected
            )));
        }
        steps += 1;
        let last = t + *h >= t1;
        let step = if last { t1 - t } else { *h };

        let k2 = f(&axpy(&y, &[(A21, &k1)], step));
        let k3 = f(&axpy(&y, &[(A31, &k1), (A32, &k2)], step));
        let k4 = f(&axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], step));
        let k5 = f(&axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], step));
        let k6 = f(&axpy(&y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], step));
        let y5 = axpy(&y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], step);
        let k7 = f(&y5);

        let mut err = 0.0f64;
        for i in 0..N {
            let e = step * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = tol.atol + tol.rtol * y[i].abs().max(y5[i].abs());
            err = err.max((e / sc).abs());
        }
        if !err.is_finite() {
            return Err(Error::Numerical(format!("non-finite error estimate at t = {t:e}, h = {step:e}")));
        }
        if err <= 1.0 {
            t = if last { t1 } else { t + step };
            y = y5;
            k1 = k7;
            stats.accepted += 1;
        } else {
            stats.rejected += 1;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        // keep the carried step from collapsing onto a short final segment
        if !(last && err <= 1.0) {
            *h = step * factor;
        }
        if *h < 1e-14 * t.abs().max(t1 - t0) {
            return Err(Error::Numerical(format!("step size underflow at t = {t:e} (h = {:e})", *h)));
        }
    }
    Ok(y)
}
