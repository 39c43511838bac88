//! Acceptance criteria. Prints one `PASS`/`FAIL` line per criterion and
//! exits non-zero if any criterion fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fano_cqed::coupling::g_from_purcell;
use fano_cqed::dynamics::ode::Tolerances;
use fano_cqed::dynamics::{closed_form_spectrum, emitted_quanta, moment_evolution, numeric_spectrum, relative_l2};
use fano_cqed::fanofit::{
    fit, synthesize, Background, FitModel, FitOptions, FitProblem, FitSpec, InstrumentResponse, ModeSpec, Noise,
};
use fano_cqed::scatterer::{backscatter, doublet_loss_from_qs, scattering_q};
use fano_cqed::spectrum::{detected_spectrum, lens_spectrum, multimode_spectrum, phase_lag, ModeTerm, MultiModeModel, SourceCouplings};
use fano_cqed::trace::linspace;
use fano_cqed::units::{sphere_volume, ModeGeometry, Polarization, Scatterer};
use fano_cqed::{AngularFrequency, Axis, CollectionChannel, Rate, SystemParams};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn purcell_inversion() -> Outcome {
    let g = g_from_purcell(0.2, Rate::from_hz(15e9).unwrap(), Rate::from_hz(0.5e6).unwrap()).unwrap();
    let mhz = g.hz() / 1e6;
    outcome(rel(mhz, 28.0) < 0.05, format!("g/2π = {mhz:.3} MHz vs 28 MHz ({:.2}%)", 100.0 * rel(mhz, 28.0)))
}

fn te_p1_852() -> ModeGeometry {
    ModeGeometry {
        polarization: Polarization::TE,
        p: 1,
        m: 93,
        lambda0: 852e-9,
        n_disk: 1.45,
        v_eff_sw: 43.0,
        eta_s: 0.073,
        eta_nc: 0.024,
        q_rad: 4.5e8,
        n_eff: 1.27,
    }
}

fn tm_637(p: u32, v: f64, eta_s: f64, eta_nc: f64) -> ModeGeometry {
    ModeGeometry {
        polarization: Polarization::TM,
        p,
        m: 113,
        lambda0: 637e-9,
        n_disk: 1.45,
        v_eff_sw: v,
        eta_s,
        eta_nc,
        q_rad: 1e6,
        n_eff: 1.15,
    }
}

const FROZEN_SPLIT_TE1_852: f64 = 2.742_796_426_059_167e-5;

fn mode_splitting() -> Outcome {
    let mode = te_p1_852();
    let sc = Scatterer::sphere(2.4, 200e-9, mode.eta_nc).unwrap();
    let s = backscatter(&mode, &sc).unwrap().normalized_splitting();
    let reported = rel(s, 2.2e-5);
    let frozen = rel(s, FROZEN_SPLIT_TE1_852);
    outcome(
        reported <= 0.30 && frozen < 1e-6,
        format!("2|β|/ω₀ = {s:.6e}: {:.1}% from 2.2e-5, {frozen:.1e} from frozen value", 100.0 * reported),
    )
}

fn scattering_q_check() -> Outcome {
    let tm1 = tm_637(1, 82.0, 0.061, 0.021);
    let tm3 = tm_637(3, 106.0, 0.24, 0.079);
    let q1 = scattering_q(&tm1, &Scatterer::sphere(2.4, 200e-9, tm1.eta_nc).unwrap()).unwrap();
    let q3 = scattering_q(&tm3, &Scatterer::sphere(2.4, 200e-9, tm3.eta_nc).unwrap()).unwrap();
    let within = |q: f64, t: f64| (0.5..=2.0).contains(&(q / t));

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let mut mode = tm_637(1, rng.random_range(20.0..200.0), 0.1, rng.random_range(0.005..0.1));
        let v = sphere_volume(rng.random_range(50e-9..300e-9));
        let n = rng.random_range(1.3..3.5);
        let base = scattering_q(&mode, &Scatterer::new(n, v, mode.eta_nc).unwrap()).unwrap();
        let c = rng.random_range(0.2..5.0);
        let vol = scattering_q(&mode, &Scatterer::new(n, c * v, mode.eta_nc).unwrap()).unwrap();
        worst = worst.max(rel(vol * c * c, base));
        let before = base;
        mode.v_eff_sw *= c;
        let veff = scattering_q(&mode, &Scatterer::new(n, v, mode.eta_nc).unwrap()).unwrap();
        worst = worst.max(rel(veff, c * before));
    }
    outcome(
        within(q1, 2.7e4) && within(q3, 9.0e3) && worst < 1e-12,
        format!("TM1 Q_s = {q1:.3e} (2.7e4), TM3 Q_s = {q3:.3e} (9.0e3), scaling laws worst {worst:.1e}"),
    )
}

fn doublet_asymmetry() -> Outcome {
    let d = doublet_loss_from_qs(3.4e5, 3.4e5, 0.0).unwrap();
    outcome(
        d.q_low == 1.7e5 && d.q_high == 3.4e5,
        format!("q_low = {:e}, q_high = {:e}", d.q_low, d.q_high),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let draws = 20;
    let mut lines = Vec::new();
    let mut worst = 0.0f64;
    let mut passed = 0;
    let mut largest_passing_f: f64 = 0.0;
    let mut smallest_failing_f: f64 = f64::INFINITY;
    for i in 0..draws {
        // stratified in log F over [1e-3, 10], endpoints included
        let u = if i == 0 { 0.0 } else if i == draws - 1 { 1.0 } else { (i as f64 + rng.random_range(0.0..1.0)) / draws as f64 };
        let f_o = 10f64.powf(-3.0 + 4.0 * u);
        let gamma_s = 1e6 * 10f64.powf(rng.random_range(-1.0..1.0));
        let kappa = gamma_s * 10f64.powf(rng.random_range(-2.0..2.0));
        let g = (f_o * kappa * gamma_s / 2.0).sqrt();
        let gamma_p = 1e3 * kappa.max(g).max(gamma_s);
        let nu_c = 4.7e14;
        let p = SystemParams::from_hz(g, kappa, gamma_s, gamma_p, nu_c, nu_c).unwrap();
        let grid: Vec<f64> = linspace(-10.0, 10.0, 801).iter().map(|x| 2.0 * PI * (nu_c + x * kappa)).collect();
        let ch = CollectionChannel::lens();
        let a = numeric_spectrum(&p, &ch, &grid).unwrap();
        let b = closed_form_spectrum(&p, &ch, &grid).unwrap();
        let err = relative_l2(&a.intensity, &b.intensity);
        worst = worst.max(err);
        if err < 1e-3 {
            passed += 1;
            largest_passing_f = largest_passing_f.max(f_o);
        } else {
            smallest_failing_f = smallest_failing_f.min(f_o);
        }
        lines.push(format!("F_o = {f_o:.3e}, κ/γ_s = {:.2e}: {err:.2e}", kappa / gamma_s));
    }
    for l in &lines {
        println!("      {l}");
    }
    outcome(
        passed == draws,
        format!(
            "{passed}/{draws} draws below 1e-3, worst relative L2 {worst:.2e}; largest passing F_o {largest_passing_f:.2e}, smallest failing F_o {smallest_failing_f:.2e}"
        ),
    )
}

fn conservation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let hz = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| 10f64.powf(rng.random_range(lo..hi));
        let g = hz(&mut rng, -1.0, 1.0);
        let kappa = hz(&mut rng, -1.0, 1.0);
        let gamma_s = hz(&mut rng, -1.0, 1.0);
        let gamma_p = hz(&mut rng, -1.0, 1.5);
        let det = rng.random_range(-3.0..3.0);
        let p = SystemParams::from_hz(g, kappa, gamma_s, gamma_p, 1e3, 1e3 + det).unwrap();
        let (q, _) = emitted_quanta(&p, 1e-10, &Tolerances::default()).unwrap();
        worst = worst.max((q - 1.0).abs());
    }
    let p = SystemParams::from_hz(1.0, 0.0, 0.0, 0.0, 1e3, 1e3).unwrap();
    let gv = p.g.value();
    let ts: Vec<f64> = (0..=1000).map(|i| i as f64 * 5.0 * PI / gv / 1000.0).collect();
    let rabi = moment_evolution(&p, &ts)
        .unwrap()
        .iter()
        .map(|s| (s.p_d - (gv * s.t).cos().powi(2)).abs())
        .fold(0.0, f64::max);
    outcome(
        worst < 1e-6 && rabi < 1e-8,
        format!("worst |∫emission − 1| = {worst:.2e} over 50 draws, vacuum Rabi max error {rabi:.2e}"),
    )
}

fn phase_lag_check() -> Outcome {
    let wc = AngularFrequency::new(2.957e15).unwrap();
    let k = Rate::new(2.0 * PI * 15e9).unwrap();
    let c = SourceCouplings { source_to_radiation: 1.0, source_to_cavity: 0.3, cavity_to_radiation: 1e-4 };
    let on = phase_lag(wc, wc, k, &c).unwrap().arg();
    // source detuned above the cavity by κ
    let ws = AngularFrequency::new(wc.value() + k.value()).unwrap();
    let off = phase_lag(ws, wc, k, &c).unwrap().arg();
    let (e1, e2) = ((on - FRAC_PI_2).abs(), (off - 3.0 * FRAC_PI_4).abs());
    outcome(e1 < 1e-9 && e2 < 1e-9, format!("resonant lag error {e1:.1e} rad, lag at ω_s − ω_c = κ off 3π/4 by {e2:.1e} rad"))
}

fn lineshape_geometry() -> Outcome {
    let f_o: f64 = 0.2;
    let k = Rate::from_hz(15e9).unwrap();
    let xs = linspace(-4.0, 4.0, 800_001);
    let det: Vec<f64> = xs.iter().map(|x| x * k.hz()).collect();
    let t = lens_spectrum(f_o, k, &det).unwrap();
    let (xmax, smax) = t.max().unwrap();
    let (xmin, smin) = t.min().unwrap();
    let (xmax, xmin) = (xmax / k.hz(), xmin / k.hz());
    // background crossing between the two extrema
    let i0 = xs.iter().position(|&x| x >= xmin).unwrap();
    let i1 = xs.iter().position(|&x| x >= xmax).unwrap();
    let j = (i0..i1).find(|&i| t.intensity[i] < 1.0 && t.intensity[i + 1] >= 1.0).unwrap();
    let (y0, y1) = (t.intensity[j] - 1.0, t.intensity[j + 1] - 1.0);
    let cross = xs[j] - y0 * (xs[j + 1] - xs[j]) / (y1 - y0);
    let errs = [
        (xmax - 0.8011).abs(),
        (smax - 1.5582).abs(),
        (xmin + 1.2483).abs(),
        (smin - 0.6417).abs(),
        (cross + f_o.sqrt() / 2.0).abs(),
    ];
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    outcome(
        worst < 1e-4,
        format!("max ({xmax:.5}, {smax:.5}), min ({xmin:.5}, {smin:.5}), crossing {cross:.5}; worst deviation {worst:.1e}"),
    )
}

fn fit_window(kappa: f64, f_o: f64, noise: Noise) -> (f64, f64) {
    let x = linspace(-8.0 * kappa, 8.0 * kappa, 801);
    let truth = FitModel::fano(vec![ModeSpec::new(0.0, kappa, f_o)]);
    let bg = Background::fixed(&[1.0, 0.05, -0.02, 0.01]);
    let t = synthesize(&truth, &bg, &InstrumentResponse::none(), None, Axis::DetuningHz, &x, &noise).unwrap();
    let spec = FitSpec {
        model: FitModel::fano(vec![ModeSpec::new(0.05 * kappa, 1.1 * kappa, 1.2 * f_o)]),
        background: Background::auto(3),
        response: InstrumentResponse::none(),
        center_wavelength_nm: None,
    };
    let r = fit(&FitProblem::new(t, spec), &FitOptions::default()).unwrap();
    (
        r.get("mode0.kappa_hz_over_2pi").unwrap() / kappa - 1.0,
        r.get("mode0.f_o").unwrap() / f_o - 1.0,
    )
}

fn fit_round_trip() -> Outcome {
    let windows = [(15e9, 0.20), (73e9, 0.020), (30e9, 0.5), (8e9, 0.1)];
    let mut ok = true;
    let mut parts = Vec::new();
    for (kappa, f_o) in windows {
        let (mut sk, mut sf) = (0.0, 0.0);
        for seed in 0..50 {
            let (ek, ef) = fit_window(kappa, f_o, Noise::multiplicative(0.01, seed));
            sk += ek * ek;
            sf += ef * ef;
        }
        let (rk, rf) = ((sk / 50.0).sqrt(), (sf / 50.0).sqrt());
        let (zk, zf) = fit_window(kappa, f_o, Noise::default());
        ok &= rk < 0.02 && rf < 0.02 && zk.abs() < 1e-3 && zf.abs() < 1e-3;
        parts.push(format!(
            "κ/2π {:.0} GHz F_o {f_o}: RMS κ {:.2}% F_o {:.2}%, exact {:.0e}/{:.0e}",
            kappa / 1e9,
            100.0 * rk,
            100.0 * rf,
            zk.abs(),
            zf.abs()
        ));
    }
    outcome(ok, parts.join("; "))
}

fn special_cases() -> Outcome {
    let kappa: f64 = 15e9;
    let gamma_s = 0.5e6;
    let f_o: f64 = 0.2;
    let g = (f_o * kappa * gamma_s / 2.0).sqrt();
    let nu_c = 4.7e14;
    let p = SystemParams::from_hz(g, kappa, gamma_s, 5e13, nu_c, nu_c).unwrap();
    let grid: Vec<f64> = linspace(-20.0, 20.0, 4001).iter().map(|x| 2.0 * PI * (nu_c + x * kappa)).collect();

    let det = detected_spectrum(&p, &CollectionChannel::lens(), &grid).unwrap();
    let offsets: Vec<f64> = grid.iter().map(|w| p.omega_c.hz() - w / (2.0 * PI)).collect();
    let lens = lens_spectrum(f_o, p.kappa, &offsets).unwrap();
    let gp = p.gamma_p.value();
    let lens_err = det
        .intensity
        .iter()
        .zip(&lens.intensity)
        .map(|(d, l)| (d * gp - l).abs())
        .fold(0.0, f64::max);

    let taper = CollectionChannel::taper();
    let single = detected_spectrum(&p, &taper, &grid).unwrap();
    let model = MultiModeModel {
        modes: vec![ModeTerm { center_hz: p.omega_c.hz(), kappa_hz: p.kappa.hz(), f_o: p.purcell().unwrap(), eps_c: 1.0, phi_c: 0.0 }],
        eps_d: 0.0,
        phi_d: 0.0,
        scale: 1.0 / gp,
    };
    let multi = multimode_spectrum(&model, &grid).unwrap();
    let identical = multi.intensity == single.intensity;

    // ε_d = 0: Lorentzian whose fitted half-width is κ
    let mut trace = single.clone();
    let scale = trace.max().unwrap().1;
    trace.intensity.iter_mut().for_each(|v| *v /= scale);
    let mut spec_model = FitModel::fano(vec![ModeSpec::new(2.0 * PI * (nu_c + 0.2 * kappa), 1.3 * kappa, 0.8)]);
    spec_model.eps_d = 0.0;
    let spec = FitSpec { model: spec_model, background: Background::auto(0), response: InstrumentResponse::none(), center_wavelength_nm: None };
    let r = fit(&FitProblem::new(trace, spec), &FitOptions::default()).unwrap();
    let width_err = rel(r.get("mode0.kappa_hz_over_2pi").unwrap(), kappa);

    outcome(
        lens_err < 1e-12 && identical && width_err < 1e-3,
        format!("lens vs detected max {lens_err:.1e}, single-mode multimode identical: {identical}, Lorentzian half-width off by {width_err:.1e}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("Purcell inversion", purcell_inversion),
        ("mode splitting", mode_splitting),
        ("scattering Q", scattering_q_check),
        ("doublet asymmetry", doublet_asymmetry),
        ("oracle equivalence", oracle_equivalence),
        ("conservation", conservation),
        ("phase lag", phase_lag_check),
        ("Fano lineshape geometry", lineshape_geometry),
        ("fit round trip", fit_round_trip),
        ("spectrum special cases", special_cases),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {} [{:.2} s]",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
