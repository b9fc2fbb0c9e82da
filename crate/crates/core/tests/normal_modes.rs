//! Chain equilibrium and transverse modes against an independent cyclic
//! Jacobi eigensolver, plus structural properties of the mode matrix.

use ionpa_core::ion_crystal::{equilibrium_positions, transverse_modes, TrapConfig};
use ionpa_core::{hz_to_angular, AMU, ELEMENTARY_CHARGE};
use proptest::prelude::*;

fn trap(n: usize, axial_hz: f64) -> TrapConfig {
    TrapConfig {
        n_ions: n,
        omega_t: hz_to_angular(3.045e6),
        omega_ax: hz_to_angular(axial_hz),
        mass: 171.0 * AMU,
        charge: ELEMENTARY_CHARGE,
        d_t: 250e-6,
        eta1: None,
        delta_k: None,
    }
}

/// Classic cyclic Jacobi rotations on a dense symmetric matrix. Returns
/// eigenvalues and eigenvectors (as columns).
fn jacobi(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let scale: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum();
        if off <= 1e-32 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let vals = (0..n).map(|i| a[i][i]).collect();
    let vecs = (0..n).map(|m| (0..n).map(|i| v[i][m]).collect()).collect();
    (vals, vecs)
}

/// Transverse stiffness written out from the Coulomb expansion.
fn stiffness(pos: &[f64], wt: f64, wa: f64) -> Vec<Vec<f64>> {
    let n = pos.len();
    let mut k = vec![vec![0.0; n]; n];
    for i in 0..n {
        k[i][i] = wt * wt;
        for j in 0..n {
            if i != j {
                let c = wa * wa / (pos[i] - pos[j]).abs().powi(3);
                k[i][j] += c;
                k[i][i] -= c;
            }
        }
    }
    k
}

#[test]
fn five_ions_against_jacobi() {
    let cfg = trap(5, 0.62e6);
    let modes = transverse_modes(&cfg).unwrap();
    let pos = equilibrium_positions(5).unwrap();
    let (vals, vecs) = jacobi(stiffness(&pos, cfg.omega_t, cfg.omega_ax));
    let mut order: Vec<usize> = (0..5).collect();
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
    for (m, &k) in order.iter().enumerate() {
        let w = vals[k].sqrt();
        assert!((modes.omega[m] - w).abs() < 1e-9 * w, "mode {m}: {} vs {w}", modes.omega[m]);
        let overlap: f64 = (0..5).map(|i| modes.u[(i, m)] * vecs[k][i]).sum();
        assert!((overlap.abs() - 1.0).abs() < 1e-10, "mode {m} overlap {overlap}");
    }
}

#[test]
fn force_balance_holds() {
    for n in [2, 3, 7, 20, 50] {
        let u = equilibrium_positions(n).unwrap();
        for i in 0..n {
            let mut r = u[i];
            for j in 0..n {
                if j < i {
                    r -= 1.0 / (u[i] - u[j]).powi(2);
                } else if j > i {
                    r += 1.0 / (u[j] - u[i]).powi(2);
                }
            }
            assert!(r.abs() < 1e-11, "n = {n}, ion {i}: residual {r:e}");
        }
        for i in 0..n {
            assert!((u[i] + u[n - 1 - i]).abs() < 1e-14);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mode_matrix_is_orthogonal(n in 1usize..=50, ratio in 0.02f64..0.12) {
        // keep the chain linear: omega_ax well below the zig-zag threshold
        let axial = 3.045e6 * ratio * (10.0 / n.max(10) as f64);
        let modes = transverse_modes(&trap(n, axial)).unwrap();
        let u = &modes.u;
        let gram = u.transpose() * u;
        let outer = u * u.transpose();
        for a in 0..n {
            for b in 0..n {
                let want = if a == b { 1.0 } else { 0.0 };
                prop_assert!((gram[(a, b)] - want).abs() < 1e-12);
                prop_assert!((outer[(a, b)] - want).abs() < 1e-12);
            }
        }
        prop_assert_eq!(modes.omega[0], hz_to_angular(3.045e6));
        for i in 0..n {
            prop_assert!((u[(i, 0)] - 1.0 / (n as f64).sqrt()).abs() < 1e-15);
        }
        for m in 1..n {
            prop_assert!(modes.omega[m] < modes.omega[0]);
        }
    }
}
