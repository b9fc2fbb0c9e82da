use std::f64::consts::PI;

use ionpa_core::drive_model::{Coupling, DriveParams, PaStrength};
use ionpa_core::gate_designer::{
    default_phi_target, design_point, infidelity, infidelity_curve, optimize_time, required_power, timing_error,
    GateProtocol, GateSpec,
};
use ionpa_core::ion_crystal::{transverse_modes, NormalModeSet, TrapConfig};
use ionpa_core::ode::IntegratorConfig;
use ionpa_core::phase_space::{mode_phase, Dynamics, ModeParams};
use ionpa_core::{hz_to_angular, AMU, ELEMENTARY_CHARGE, TWO_PI};

const TAU: f64 = 180e-6;

fn trap() -> TrapConfig {
    TrapConfig {
        n_ions: 5,
        omega_t: hz_to_angular(3.045e6),
        omega_ax: hz_to_angular(0.62e6),
        mass: 171.0 * AMU,
        charge: ELEMENTARY_CHARGE,
        d_t: 250e-6,
        eta1: None,
        delta_k: None,
    }
}

fn protocol(dynamics: Dynamics) -> GateProtocol {
    GateProtocol {
        trap: trap(),
        tau: TAU,
        phi_target: None,
        pair: (0, 1),
        dynamics,
        mode_dependent_g: false,
        timing_fraction: 0.01,
        integrator: IntegratorConfig::default(),
    }
}

fn spec_at(g_hz: f64, dynamics: Dynamics) -> (GateSpec, NormalModeSet) {
    let p = protocol(dynamics);
    let modes = transverse_modes(&p.trap).unwrap();
    (p.spec(&modes, hz_to_angular(g_hz)).unwrap().0, modes)
}

#[test]
fn unamplified_optimum_matches_dense_scan() {
    let (spec, modes) = spec_at(0.0, Dynamics::Rwa);
    let Coupling::Direct { f } = spec.drive.coupling else { unreachable!() };
    let mu = spec.drive.mu;
    // each free loop: |alpha_m| = (2 f_m s_m / delta_m) |sin(delta_m t / 2)|
    let terms: Vec<(f64, f64)> = (0..5)
        .map(|m| {
            let fm = f * (modes.omega[0] / modes.omega[m]).sqrt();
            let sm = modes.u[(0, m)].abs() + modes.u[(1, m)].abs();
            let dm = mu - modes.omega[m];
            ((2.0 * fm * sm / dm).powi(2), dm)
        })
        .collect();
    let eps = |t: f64| terms.iter().map(|(a, d)| a * (0.5 * d * t).sin().powi(2)).sum::<f64>();
    let period = TWO_PI / (mu - modes.omega[0]);
    let n = 400_001;
    let (lo, hi) = (0.8 * period, 1.2 * period);
    let step = (hi - lo) / (n - 1) as f64;
    let (t_best, e_best) = (0..n)
        .map(|k| lo + k as f64 * step)
        .map(|t| (t, eps(t)))
        .fold((0.0, f64::INFINITY), |b, x| if x.1 < b.1 { x } else { b });

    let (t_opt, fid) = optimize_time(&spec).unwrap();
    assert!((t_opt - t_best).abs() <= step, "{t_opt} vs {t_best}");
    assert!(1.0 - fid <= e_best * (1.0 + 1e-6) + 1e-15, "{} vs {e_best}", 1.0 - fid);
    assert!((1.0 - fid - eps(t_opt)).abs() < 1e-12);
}

#[test]
fn power_falls_as_amplification_rises() {
    let cfg = IntegratorConfig::default();
    let phi = default_phi_target(5);
    let w1 = hz_to_angular(3.045e6);
    let fs: Vec<f64> = (0..=100)
        .map(|k| required_power(hz_to_angular(0.5e3 * k as f64), TAU, phi, w1, Dynamics::Rwa, &cfg).unwrap().f)
        .collect();
    assert!(fs.windows(2).all(|w| w[1] < w[0]));
    let d0 = TWO_PI / TAU;
    assert!((fs[0] / (d0 * (phi / (4.0 * PI)).sqrt()) - 1.0).abs() < 1e-14);
}

#[test]
fn full_dynamics_power_reproduces_the_phase() {
    let cfg = IntegratorConfig::with_tolerances(1e-12, 1e-15);
    let phi = default_phi_target(5);
    let w1 = hz_to_angular(3.045e6);
    for g_hz in [0.0, 15e3, 35e3] {
        let g = hz_to_angular(g_hz);
        let p = required_power(g, TAU, phi, w1, Dynamics::Full, &cfg).unwrap();
        let mp = ModeParams {
            f: p.f,
            delta: p.delta,
            g,
            theta: 0.0,
            mu: p.mu,
            s: 1.0,
        };
        let got = mode_phase(&mp, Dynamics::Full, p.t_loop, &cfg).unwrap();
        assert!((got / phi - 1.0).abs() < 1e-6, "g = {g_hz}: {got} vs {phi}");
    }
}

#[test]
fn centre_of_mass_only_gate_is_single_loop_algebra() {
    let (mut spec, modes) = spec_at(20e3, Dynamics::Rwa);
    spec.modes = modes.com_only();
    let Coupling::Direct { f } = spec.drive.coupling else { unreachable!() };
    let delta = spec.drive.mu - modes.omega[0];
    let g = hz_to_angular(20e3);
    let dp = (delta * delta - g * g).sqrt();
    let s = 2.0 / 5f64.sqrt();
    assert!((dp * TAU / TWO_PI - 1.0).abs() < 1e-12);
    let half = infidelity(&spec, 0.5 * TAU).unwrap();
    assert!((half / (2.0 * f * s / (delta - g)).powi(2) - 1.0).abs() < 1e-12);
    let (t_opt, fid) = optimize_time(&spec).unwrap();
    assert!((t_opt / TAU - 1.0).abs() < 1e-5);
    assert!(1.0 - fid < 1e-9);
}

#[test]
fn timing_loss_is_quadratic() {
    let (spec, _) = spec_at(30e3, Dynamics::Rwa);
    let (t_opt, _) = optimize_time(&spec).unwrap();
    let xs = [1e-3, 2e-3, 4e-3, 8e-3];
    let ys: Vec<f64> = xs.iter().map(|&x| timing_error(&spec, t_opt, x).unwrap().mean).collect();
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (mx, my) = (lx.iter().sum::<f64>() / 4.0, ly.iter().sum::<f64>() / 4.0);
    let slope = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / lx.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!((slope - 2.0).abs() < 0.2, "exponent {slope}");
}

#[test]
fn best_amplification_is_interior() {
    let p = protocol(Dynamics::Rwa);
    let modes = transverse_modes(&p.trap).unwrap();
    let gs: Vec<f64> = (0..=12).map(|k| 5e3 * k as f64).collect();
    let fid: Vec<f64> = gs
        .iter()
        .map(|&g| design_point(&p, &modes, hz_to_angular(g)).unwrap().fidelity)
        .collect();
    let best = (0..fid.len()).fold(0, |b, i| if fid[i] > fid[b] { i } else { b });
    assert!(best > 0 && best < fid.len() - 1, "argmax at {} kHz: {fid:?}", gs[best] / 1e3);
    assert!(fid[best] > fid[0]);
}

#[test]
fn residual_is_never_negative() {
    let (spec, _) = spec_at(25e3, Dynamics::Rwa);
    let times: Vec<f64> = (0..2000).map(|k| k as f64 * 2.0 * TAU / 2000.0).collect();
    assert!(infidelity_curve(&spec, &times).unwrap().iter().all(|e| *e >= 0.0));
}

#[test]
fn drive_rejects_pa_beyond_a_mode_detuning() {
    // keep mu but push g above the lowest mode's detuning
    let (spec, _) = spec_at(0.0, Dynamics::Rwa);
    let bad = GateSpec {
        drive: DriveParams {
            pa: PaStrength::Direct { g: hz_to_angular(1e6) },
            ..spec.drive
        },
        ..spec
    };
    assert!(infidelity(&bad, TAU).is_err());
}
