//! Numerically integrated loops against the closed-form loop algebra.

use std::f64::consts::PI;

use ionpa_core::drive_model::{bogoliubov, loop_quantities, spectator_bound};
use ionpa_core::numerics::linspace;
use ionpa_core::ode::IntegratorConfig;
use ionpa_core::phase_space::{
    integrate_mode, loop_period, mode_phase, rwa_phase_bogoliubov_frame, rwa_trajectory, Dynamics, ModeParams,
};
use proptest::prelude::*;

fn mode(f: f64, delta: f64, g: f64, theta: f64, s: f64) -> ModeParams {
    ModeParams {
        f,
        delta,
        g,
        theta,
        mu: 1e3 * delta,
        s,
    }
}

fn tight() -> IntegratorConfig {
    IntegratorConfig::with_tolerances(1e-12, 1e-15)
}

#[test]
fn sdf_only_table_row() {
    let (f, delta) = (0.07, 1.0);
    let p = mode(f, delta, 0.0, 0.0, 1.0);
    let phi = mode_phase(&p, Dynamics::Rwa, 2.0 * PI / delta, &tight()).unwrap();
    let want = 4.0 * PI * (f / delta).powi(2);
    assert!((phi - want).abs() < 1e-6 * want, "{phi} vs {want}");
}

#[test]
fn strong_pa_table_row() {
    // delta - g = 0.02 (delta + g)
    let (f, delta) = (0.01, 1.0);
    let g = delta * 0.98 / 1.02;
    let p = mode(f, delta, g, 0.0, 1.0);
    let b = bogoliubov(delta, g, 0.0, p.mu).unwrap();
    let phi = mode_phase(&p, Dynamics::Rwa, p.nominal_period(), &tight()).unwrap();
    let exact = loop_quantities(f, delta, g).unwrap().phi_loop;
    assert!((phi / exact - 1.0).abs() < 1e-8);
    // the limit form replaces delta + g by 2 delta; with delta - g = x (delta + g)
    // that undercounts the area by exactly (1 + x)^2
    let limit = 4.0 * PI * (f / delta).powi(2) / (4.0 * b.squeeze.powi(6));
    assert!((phi / limit - 1.02f64.powi(2)).abs() < 1e-8, "{phi} vs {limit}");
}

#[test]
fn loops_close_on_a_parameter_grid() {
    let delta = 1.0;
    for &gr in &linspace(0.0, 0.95, 20) {
        for &fr in &linspace(0.005, 0.5, 20) {
            let p = mode(fr * delta, delta, gr * delta, 0.0, 1.0);
            let t = p.nominal_period();
            let tr = integrate_mode(&p, Dynamics::Rwa, &[t], &tight()).unwrap();
            let dp = bogoliubov(delta, p.g, 0.0, p.mu).unwrap().delta_prime;
            assert!(
                tr.alpha[0].norm() < 1e-9 * p.f / dp,
                "g/delta = {gr}, f/delta = {fr}: |alpha| = {:e}",
                tr.alpha[0].norm()
            );
        }
    }
}

#[test]
fn spectator_excursion_bounded_on_dense_grid() {
    for (f, delta, g, s) in [(0.02, 3.0, 0.9, 0.8), (0.05, 1.4, 1.1, -0.6), (0.01, 2.0, 0.0, 1.0)] {
        let p = mode(f, delta, g, 0.0, s);
        let bound = spectator_bound(f * s.abs(), delta, g, None).unwrap().bound;
        let grid = linspace(0.0, 3.0 * p.nominal_period(), 6001);
        let tr = integrate_mode(&p, Dynamics::Rwa, &grid, &tight()).unwrap();
        let mut peak: f64 = 0.0;
        for (t, a) in grid.iter().zip(&tr.alpha) {
            let closed = rwa_trajectory(f, delta, g, 0.0, s, *t).unwrap().norm();
            assert!(closed <= bound * (1.0 + 1e-12));
            assert!(a.norm() <= bound * (1.0 + 1e-9));
            peak = peak.max(closed);
        }
        // the bound is reached at half a loop
        let half = rwa_trajectory(f, delta, g, 0.0, s, p.nominal_period() / 2.0).unwrap().norm();
        assert!((half / bound - 1.0).abs() < 1e-12);
        assert!(peak <= bound * (1.0 + 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn phase_is_frame_independent(gr in 0.0f64..0.9, fr in 0.01f64..0.3, theta in -1.5f64..1.5,
                                  s in -1.0f64..1.0, frac in 0.1f64..2.5) {
        prop_assume!(s.abs() > 0.05);
        let p = mode(fr, 1.0, gr, theta, s);
        let t = frac * p.nominal_period();
        let a = mode_phase(&p, Dynamics::Rwa, t, &tight()).unwrap();
        let b = rwa_phase_bogoliubov_frame(&p, t, &tight()).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(b.abs()), "{} vs {}", a, b);
    }

    #[test]
    fn rwa_period_is_independent_of_phase(gr in 0.0f64..0.95, theta in -3.0f64..3.0) {
        let p = mode(0.0, 1.0, gr, theta, 1.0);
        let t = loop_period(&p, Dynamics::Rwa, &IntegratorConfig::default()).unwrap();
        prop_assert!((t / p.nominal_period() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn phase_is_quadratic_in_force(gr in 0.0f64..0.9, fr in 0.01f64..0.3, k in 0.1f64..5.0) {
        let p = mode(fr, 1.0, gr, 0.0, 1.0);
        let q = ModeParams { f: k * fr, ..p };
        let t = p.nominal_period();
        let a = mode_phase(&p, Dynamics::Full, t, &tight()).unwrap();
        let b = mode_phase(&q, Dynamics::Full, t, &tight()).unwrap();
        prop_assert!((b / (k * k * a) - 1.0).abs() < 1e-8);
    }
}
