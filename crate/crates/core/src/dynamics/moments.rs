//! Equal-time moments in the single-excitation manifold.
//!
//! The real state vector is `(p_d, p_c, X, Y)` with `x = X + iY = ⟨â†σ̂₋⟩`.
//! With δ = ω_c − ω_d and Γ = κ + γ_s/2 + γ_p the master equation gives
//!
//! ```text
//! ṗ_d = −γ_s p_d − 2gX
//! ṗ_c = −2κ p_c + 2gX
//! Ẋ   = −ΓX − δY + g(p_d − p_c)
//! Ẏ   =  δX − ΓY
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ode::{integrate, Stats, Tolerances};
use super::propagator::{matvec, RegressionGenerator};
use crate::error::{invalid, Error, Result};
use crate::units::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentState {
    pub t: f64,
    /// ⟨â⟩ in the frame rotating at ω_c.
    pub a_mean: Complex64,
    /// ⟨σ̂₋⟩ in the frame rotating at ω_c.
    pub sigma_mean: Complex64,
    pub p_c: f64,
    pub p_d: f64,
    /// ⟨â†σ̂₋⟩.
    pub x_cross: Complex64,
}

impl MomentState {
    /// Dipole excited, cavity empty.
    pub fn excited() -> Self {
        Self {
            t: 0.0,
            a_mean: Complex64::new(0.0, 0.0),
            sigma_mean: Complex64::new(0.0, 0.0),
            p_c: 0.0,
            p_d: 1.0,
            x_cross: Complex64::new(0.0, 0.0),
        }
    }

    /// Population left in the system.
    pub fn population(&self) -> f64 {
        self.p_c + self.p_d
    }

    /// `p_c p_d − |x|²`, non-negative for a physical state.
    pub fn cauchy_schwarz_margin(&self) -> f64 {
        self.p_c * self.p_d - self.x_cross.norm_sqr()
    }

    pub(crate) fn vector(&self) -> [f64; 4] {
        [self.p_d, self.p_c, self.x_cross.re, self.x_cross.im]
    }
}

/// Coefficients of the second-moment equations.
#[derive(Debug, Clone, Copy)]
pub(crate) struct MomentGenerator {
    pub g: f64,
    pub kappa: f64,
    pub gamma_s: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl MomentGenerator {
    pub fn new(p: &SystemParams) -> Self {
        let kappa = p.kappa.value();
        let gamma_s = p.gamma_s.value();
        Self {
            g: p.g.value(),
            kappa,
            gamma_s,
            gamma: kappa + 0.5 * gamma_s + p.gamma_p.value(),
            delta: -p.dipole_detuning(),
        }
    }

    /// Row-major 4×4 matrix of the linear system.
    pub fn matrix(&self) -> [[f64; 4]; 4] {
        let Self { g, kappa, gamma_s, gamma, delta } = *self;
        [
            [-gamma_s, 0.0, -2.0 * g, 0.0],
            [0.0, -2.0 * kappa, 2.0 * g, 0.0],
            [g, -g, -gamma, -delta],
            [0.0, 0.0, delta, -gamma],
        ]
    }

    #[inline]
    pub fn rhs(&self, v: &[f64; 4]) -> [f64; 4] {
        let Self { g, kappa, gamma_s, gamma, delta } = *self;
        [
            -gamma_s * v[0] - 2.0 * g * v[2],
            -2.0 * kappa * v[1] + 2.0 * g * v[2],
            -gamma * v[2] - delta * v[3] + g * (v[0] - v[1]),
            delta * v[2] - gamma * v[3],
        ]
    }

    /// Emission rate into all loss channels, γ_s p_d + 2κ p_c.
    #[inline]
    pub fn emission_rate(&self, v: &[f64; 4]) -> f64 {
        self.gamma_s * v[0] + 2.0 * self.kappa * v[1]
    }

    /// Slowest non-zero decay rate of the population dynamics, from the
    /// eigenvalues of the 4×4 system.
    pub fn slowest_rate(&self) -> Option<f64> {
        let m = nalgebra::Matrix4::from_fn(|i, j| self.matrix()[i][j]);
        let scale = m.abs().max().max(f64::MIN_POSITIVE);
        m.complex_eigenvalues()
            .iter()
            .map(|l| -l.re)
            .filter(|r| *r > 1e-12 * scale)
            .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.min(r))))
    }
}

/// Moments at each time in `t_grid`, starting from the excited dipole.
pub fn moment_evolution(params: &SystemParams, t_grid: &[f64]) -> Result<Vec<MomentState>> {
    moment_evolution_from(params, MomentState::excited(), t_grid, &Tolerances::default())
}

/// Moments at each time in `t_grid` from an arbitrary initial state.
///
/// The second moments are integrated adaptively; the first moments follow
/// the exact 2×2 propagator. `t_grid` must be non-decreasing and start at
/// or after `initial.t`.
pub fn moment_evolution_from(
    params: &SystemParams,
    initial: MomentState,
    t_grid: &[f64],
    tol: &Tolerances,
) -> Result<Vec<MomentState>> {
    params.validate()?;
    if t_grid.iter().any(|t| !t.is_finite()) {
        return Err(invalid("t_grid", "contains non-finite values"));
    }
    if t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("t_grid", "must be non-decreasing"));
    }
    if t_grid.first().is_some_and(|&t0| t0 < initial.t) {
        return Err(invalid("t_grid", "starts before the initial state"));
    }
    let gen = MomentGenerator::new(params);
    let first = RegressionGenerator::cavity_frame(params);
    let f = |v: &[f64; 4]| gen.rhs(v);

    let mut out = Vec::with_capacity(t_grid.len());
    let mut v = initial.vector();
    let mut t = initial.t;
    let mut h = 0.0;
    let mut stats = Stats::default();
    for &tn in t_grid {
        v = integrate(&f, v, t, tn, &mut h, tol, &mut stats)
            .map_err(|e| Error::Numerical(format!("moment evolution to t = {tn:e}: {e}")))?;
        t = tn;
        let [a_mean, sigma_mean] = matvec(&first.propagator(tn - initial.t), [initial.a_mean, initial.sigma_mean]);
        out.push(MomentState {
            t,
            a_mean,
            sigma_mean,
            p_d: v[0],
            p_c: v[1],
            x_cross: Complex64::new(v[2], v[3]),
        });
    }
    log::debug!("moment evolution: {} accepted, {} rejected steps", stats.accepted, stats.rejected);
    Ok(out)
}

/// Total emitted quanta ∫₀^∞ (γ_s p_d + 2κ p_c) dt from the excited dipole,
/// integrated adaptively until the remaining population drops below
/// `residual`. Returns `(emitted, remaining)`.
pub fn emitted_quanta(params: &SystemParams, residual: f64, tol: &Tolerances) -> Result<(f64, f64)> {
    params.validate()?;
    let gen = MomentGenerator::new(params);
    let rate = gen
        .slowest_rate()
        .ok_or_else(|| Error::Numerical("no decay channel: population never leaves the system".into()))?;
    let f = |y: &[f64; 5]| {
        let v = [y[0], y[1], y[2], y[3]];
        let d = gen.rhs(&v);
        [d[0], d[1], d[2], d[3], gen.emission_rate(&v)]
    };
    let mut y = [1.0, 0.0, 0.0, 0.0, 0.0];
    let chunk = 1.0 / rate;
    let mut t = 0.0;
    let mut h = 0.0;
    let mut stats = Stats::default();
    for _ in 0..400 {
        y = integrate(&f, y, t, t + chunk, &mut h, tol, &mut stats)?;
        t += chunk;
        let remaining = y[0] + y[1];
        if remaining.abs() < residual {
            return Ok((y[4], remaining));
        }
    }
    Err(Error::Numerical(format!(
        "population {:e} still above {residual:e} at t = {t:e}",
        y[0] + y[1]
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::ode::Tolerances;
    use proptest::prelude::*;

    fn params(g: f64, k: f64, gs: f64, gp: f64, det: f64) -> SystemParams {
        SystemParams::from_hz(g, k, gs, gp, 1e3, 1e3 + det).unwrap()
    }

    #[test]
    fn uncoupled_decay() {
        let p = params(0.0, 3.0, 0.7, 2.0, 0.0);
        let ts: Vec<f64> = (0..50).map(|i| i as f64 * 0.01).collect();
        let traj = moment_evolution(&p, &ts).unwrap();
        let gs = p.gamma_s.value();
        for s in &traj {
            assert!((s.p_d - (-gs * s.t).exp()).abs() < 1e-10);
            assert_eq!(s.p_c, 0.0);
        }
    }

    #[test]
    fn vacuum_rabi() {
        let p = params(1.0, 0.0, 0.0, 0.0, 0.0);
        let g = p.g.value();
        let ts: Vec<f64> = (0..200).map(|i| i as f64 * 0.0123).collect();
        let traj = moment_evolution(&p, &ts).unwrap();
        for s in &traj {
            let c = (g * s.t).cos();
            assert!((s.p_d - c * c).abs() < 1e-8, "t = {}", s.t);
            assert!((s.p_c - (1.0 - c * c)).abs() < 1e-8);
        }
    }

    #[test]
    fn rejects_unsorted_grid() {
        let p = params(1.0, 1.0, 1.0, 1.0, 0.0);
        assert!(moment_evolution(&p, &[0.0, 2.0, 1.0]).is_err());
        assert!(moment_evolution(&p, &[-1.0]).is_err());
    }

    #[test]
    fn coherent_amplitudes_follow_propagator() {
        let p = params(0.5, 1.0, 0.2, 0.3, 0.1);
        let mut init = MomentState::excited();
        init.sigma_mean = Complex64::new(0.3, 0.0);
        let traj = moment_evolution_from(&p, init, &[0.0, 0.2], &Tolerances::default()).unwrap();
        assert_eq!(traj[0].sigma_mean, init.sigma_mean);
        assert!(traj[1].a_mean.norm() > 0.0);
    }

    /// Lindblad evolution of the 3×3 density matrix on {|g,0⟩, |e,0⟩, |g,1⟩}
    /// in the frame rotating at ω_c.
    fn lindblad_populations(p: &SystemParams, t_end: f64) -> (f64, f64, Complex64) {
        let g = p.g.value();
        let k = p.kappa.value();
        let gs = p.gamma_s.value();
        let gp = p.gamma_p.value();
        let wd = p.dipole_detuning();
        // H = wd |e0⟩⟨e0| + i g (|g1⟩⟨e0| − |e0⟩⟨g1|)
        let i = Complex64::new(0.0, 1.0);
        let z = Complex64::new(0.0, 0.0);
        let h = [[z, z, z], [z, Complex64::new(wd, 0.0), -i * g], [z, i * g, z]];
        let rhs = |y: &[f64; 18]| {
            let rho: Vec<Complex64> = (0..9).map(|n| Complex64::new(y[2 * n], y[2 * n + 1])).collect();
            let r = |a: usize, b: usize| rho[3 * a + b];
            let mut d = [[z; 3]; 3];
            for a in 0..3 {
                for b in 0..3 {
                    let mut c = z;
                    for m in 0..3 {
                        c += h[a][m] * r(m, b) - r(a, m) * h[m][b];
                    }
                    d[a][b] = -i * c;
                }
            }
            // σ̂₋ = |g0⟩⟨e0| at γ_s, â = |g0⟩⟨g1| at 2κ, σ_z dephasing at γ_p/2
            d[0][0] += gs * r(1, 1) + 2.0 * k * r(2, 2);
            for (n, rate) in [(1usize, gs), (2, 2.0 * k)] {
                for b in 0..3 {
                    d[n][b] -= 0.5 * rate * r(n, b);
                    d[b][n] -= 0.5 * rate * r(b, n);
                }
            }
            // dephasing damps coherences between |e0⟩ and the other two states
            for b in [0usize, 2] {
                d[1][b] -= gp * r(1, b);
                d[b][1] -= gp * r(b, 1);
            }
            let mut out = [0.0; 18];
            for a in 0..3 {
                for b in 0..3 {
                    out[2 * (3 * a + b)] = d[a][b].re;
                    out[2 * (3 * a + b) + 1] = d[a][b].im;
                }
            }
            out
        };
        let mut y = [0.0; 18];
        y[2 * 4] = 1.0;
        let mut hh = 0.0;
        let y = integrate(&rhs, y, 0.0, t_end, &mut hh, &Tolerances::default(), &mut Stats::default()).unwrap();
        // ⟨â†σ̂₋⟩ = ρ_{e0,g1}
        (y[2 * 4], y[2 * 8], Complex64::new(y[2 * 5], y[2 * 5 + 1]))
    }

    #[test]
    fn matches_density_matrix() {
        for (g, k, gs, gp, det) in [(1.0, 0.4, 0.3, 0.2, 0.5), (2.0, 3.0, 0.1, 5.0, -1.0), (0.3, 0.1, 1.0, 0.0, 0.0)] {
            let p = params(g, k, gs, gp, det);
            let t = 0.37;
            let s = moment_evolution(&p, &[t]).unwrap()[0];
            let (pd, pc, x) = lindblad_populations(&p, t);
            assert!((s.p_d - pd).abs() < 1e-9, "{pd} vs {}", s.p_d);
            assert!((s.p_c - pc).abs() < 1e-9);
            assert!((s.x_cross - x).norm() < 1e-9, "{x} vs {}", s.x_cross);
        }
    }

    #[test]
    fn conservation_fixed_cases() {
        for (g, k, gs, gp, det) in [(1.0, 0.5, 0.2, 0.0, 0.0), (3.0, 10.0, 0.05, 40.0, 2.0)] {
            let p = params(g, k, gs, gp, det);
            let (q, rem) = emitted_quanta(&p, 1e-10, &Tolerances::default()).unwrap();
            assert!((q + rem - 1.0).abs() < 1e-9, "q = {q}");
        }
        assert!(emitted_quanta(&params(0.0, 1.0, 0.0, 1.0, 0.0), 1e-10, &Tolerances::default()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn physical_trajectory(g in 0.0f64..3.0, k in 0.05f64..3.0, gs in 0.05f64..3.0,
                               gp in 0.0f64..10.0, det in -3.0f64..3.0) {
            let p = params(g, k, gs, gp, det);
            let rate = MomentGenerator::new(&p).slowest_rate().unwrap();
            let ts: Vec<f64> = (0..120).map(|i| i as f64 * 4.0 / (rate * 120.0)).collect();
            let traj = moment_evolution(&p, &ts).unwrap();
            let mut prev = f64::INFINITY;
            for s in &traj {
                let tol = 1e-9;
                prop_assert!(s.cauchy_schwarz_margin() >= -tol);
                prop_assert!(s.p_c >= -tol && s.p_d >= -tol && s.p_d <= 1.0 + tol);
                prop_assert!(s.population() <= prev + tol);
                prev = s.population();
            }
        }
    }
}
