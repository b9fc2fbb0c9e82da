//! Brute-force master-equation check of the closed-form spin correlators.
//! The density matrix of a few spins is propagated with classic RK4.

#[path = "common/liouvillian.rs"]
mod liouvillian;

use ionpa_core::drive_model::DecoherenceRates;
use ionpa_core::spin_squeezing::xi_squared;
use liouvillian::*;
use num_complex::Complex64;

fn check(n: usize, j: f64, rates: DecoherenceRates, t: f64) {
    let oracle = correlators(n, j, &rates, t, 1500);
    let got = ionpa_core::spin_squeezing::correlators(j, t, &rates, n).unwrap();
    let closed = [
        got.sp,
        got.pp,
        got.pm,
        got.pz,
        Complex64::new(got.z, 0.0),
        Complex64::new(got.zz, 0.0),
    ];
    let names = ["s+", "s+s+", "s+s-", "s+sz", "sz", "szsz"];
    for ((name, o), c) in names.iter().zip(oracle).zip(closed) {
        assert!((o - c).norm() < 1e-9, "{name}: oracle {o} vs closed form {c}");
    }
}

#[test]
fn coherent_ising_four_spins() {
    check(4, 1.0, DecoherenceRates::none(), 1.7);
}

#[test]
fn dephasing_and_symmetric_flips() {
    check(4, 1.0, DecoherenceRates::symmetric(0.12, 0.04).unwrap(), 2.3);
}

#[test]
fn asymmetric_flips_three_spins() {
    check(3, 0.7, DecoherenceRates::new(0.05, 0.09, 0.02).unwrap(), 1.4);
}

#[test]
fn asymmetric_flips_four_spins() {
    check(4, -1.2, DecoherenceRates::new(0.0, 0.03, 0.11).unwrap(), 3.0);
}

#[test]
fn squeezing_parameter_from_full_state() {
    // Collective moments straight from the density matrix.
    let (n, j, t) = (4, 1.0, 1.1);
    let rates = DecoherenceRates::new(0.06, 0.05, 0.02).unwrap();
    let model = Model::new(n, j, &rates);
    let mut rho = plus_x(n);
    model.evolve(&mut rho, t, 1500);
    let collective = |op: [[f64; 2]; 2]| {
        (0..n).fold(M::zeros(1 << n, 1 << n), |acc, k| acc + site_op(n, k, op))
    };
    let sx_op = (collective(SP) + collective(SM)) * c(0.5);
    let sy_op = (collective(SP) - collective(SM)) * Complex64::new(0.0, -0.5);
    let sz_op = collective(SZ) * c(0.5);
    let mx = expect(&rho, &sx_op).re;
    let my = expect(&rho, &sy_op).re;
    let mz = expect(&rho, &sz_op).re;
    let vy = expect(&rho, &(&sy_op * &sy_op)).re - my * my;
    let vz = expect(&rho, &(&sz_op * &sz_op)).re - mz * mz;
    let cov = 0.5 * expect(&rho, &(&sy_op * &sz_op + &sz_op * &sy_op)).re - my * mz;
    let len2 = mx * mx + my * my + mz * mz;
    let min_var = 0.5 * (vy + vz - ((vy - vz).powi(2) + 4.0 * cov * cov).sqrt());
    let oracle = n as f64 * min_var / len2;
    let (xi2, _) = xi_squared(j, t, &rates, n).unwrap();
    assert!((xi2 - oracle).abs() < 1e-9, "{xi2} vs {oracle}");
}
