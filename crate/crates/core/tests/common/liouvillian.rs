//! Dense master-equation model of a few spins, used as an oracle for the
//! closed-form correlators. Bit `k` of a basis index set means spin `k` up.

use ionpa_core::drive_model::DecoherenceRates;
use nalgebra::DMatrix;
use num_complex::Complex64;

pub type M = DMatrix<Complex64>;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Single-site operator embedded at `site`.
pub fn site_op(n: usize, site: usize, op: [[f64; 2]; 2]) -> M {
    let dim = 1 << n;
    M::from_fn(dim, dim, |r, col| {
        for k in 0..n {
            if k != site && (r >> k) & 1 != (col >> k) & 1 {
                return c(0.0);
            }
        }
        c(op[(r >> site) & 1][(col >> site) & 1])
    })
}

// rows/cols indexed by [down, up]
pub const SP: [[f64; 2]; 2] = [[0.0, 0.0], [1.0, 0.0]];
pub const SM: [[f64; 2]; 2] = [[0.0, 1.0], [0.0, 0.0]];
pub const SZ: [[f64; 2]; 2] = [[-1.0, 0.0], [0.0, 1.0]];

pub struct Model {
    h: M,
    jumps: Vec<M>,
}

impl Model {
    pub fn new(n: usize, j: f64, rates: &DecoherenceRates) -> Self {
        let dim = 1 << n;
        let mut h = M::zeros(dim, dim);
        for a in 0..n {
            for b in a + 1..n {
                h += site_op(n, a, SZ) * site_op(n, b, SZ) * c(j / n as f64);
            }
        }
        let mut jumps = Vec::new();
        for k in 0..n {
            jumps.push(site_op(n, k, SM) * c(rates.gamma_ud.sqrt()));
            jumps.push(site_op(n, k, SP) * c(rates.gamma_du.sqrt()));
            jumps.push(site_op(n, k, SZ) * c((rates.gamma_el / 4.0).sqrt()));
        }
        Model { h, jumps }
    }

    fn rhs(&self, rho: &M) -> M {
        let i = Complex64::new(0.0, 1.0);
        let mut d = (&self.h * rho - rho * &self.h) * (-i);
        for l in &self.jumps {
            let ld = l.adjoint();
            let ldl = &ld * l;
            d += l * rho * &ld - (&ldl * rho + rho * &ldl) * c(0.5);
        }
        d
    }

    pub fn evolve(&self, rho: &mut M, t: f64, steps: usize) {
        let h = t / steps as f64;
        for _ in 0..steps {
            let k1 = self.rhs(rho);
            let k2 = self.rhs(&(&*rho + &k1 * c(h / 2.0)));
            let k3 = self.rhs(&(&*rho + &k2 * c(h / 2.0)));
            let k4 = self.rhs(&(&*rho + &k3 * c(h)));
            *rho += (k1 + k2 * c(2.0) + k3 * c(2.0) + k4) * c(h / 6.0);
        }
    }
}

pub fn plus_x(n: usize) -> M {
    let dim = 1 << n;
    M::from_element(dim, dim, c(1.0 / dim as f64))
}

pub fn expect(rho: &M, op: &M) -> Complex64 {
    (op * rho).trace()
}


/// Oracle values of `<s+_0>`, `<s+_0 s+_1>`, `<s+_0 s-_1>`, `<s+_0 sz_1>`,
/// `<sz_0>` and `<sz_0 sz_1>` after time `t` from all spins along +x.
pub fn correlators(n: usize, j: f64, rates: &DecoherenceRates, t: f64, steps: usize) -> [Complex64; 6] {
    let model = Model::new(n, j, rates);
    let mut rho = plus_x(n);
    model.evolve(&mut rho, t, steps);
    [
        expect(&rho, &site_op(n, 0, SP)),
        expect(&rho, &(site_op(n, 0, SP) * site_op(n, 1, SP))),
        expect(&rho, &(site_op(n, 0, SP) * site_op(n, 1, SM))),
        expect(&rho, &(site_op(n, 0, SP) * site_op(n, 1, SZ))),
        expect(&rho, &site_op(n, 0, SZ)),
        expect(&rho, &(site_op(n, 0, SZ) * site_op(n, 1, SZ))),
    ]
}
