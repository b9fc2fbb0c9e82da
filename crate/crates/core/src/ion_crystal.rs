//! Linear ion chain: equilibrium positions, transverse normal modes and the
//! Lamb-Dicke diagnostic.
//!
//! Positions are in the usual dimensionless unit `l = (e^2 / 4 pi eps0 M w_ax^2)^(1/3)`.
//! Mode frequencies are angular (rad/s) and sorted descending, so index 0 is
//! the centre-of-mass mode.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Error, Result};
use crate::HBAR;

const MAX_NEWTON_ITER: usize = 200;
const RESIDUAL_TOL: f64 = 1e-12;

/// Trap and species parameters for an N-ion linear chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrapConfig {
    pub n_ions: usize,
    /// Transverse (c.o.m.) angular frequency, rad/s.
    pub omega_t: f64,
    /// Axial angular frequency, rad/s.
    pub omega_ax: f64,
    /// Ion mass, kg.
    pub mass: f64,
    /// Ion charge, C.
    pub charge: f64,
    /// Characteristic trap dimension, m.
    pub d_t: f64,
    /// Lamb-Dicke parameter of the c.o.m. mode, if known.
    #[serde(default)]
    pub eta1: Option<f64>,
    /// Wave-vector difference of the force beams, 1/m. Used to derive `eta1`.
    #[serde(default)]
    pub delta_k: Option<f64>,
}

impl TrapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_ions < 1 {
            return Err(invalid("n_ions", "must be >= 1"));
        }
        require_positive("omega_t", self.omega_t)?;
        require_positive("omega_ax", self.omega_ax)?;
        require_positive("mass", self.mass)?;
        require_positive("charge", self.charge)?;
        require_positive("d_t", self.d_t)?;
        if self.omega_ax >= self.omega_t {
            return Err(invalid(
                "omega_ax",
                format!(
                    "must be below omega_t for a linear chain ({} >= {})",
                    self.omega_ax, self.omega_t
                ),
            ));
        }
        if let Some(eta) = self.eta1 {
            require_positive("eta1", eta)?;
        }
        if let Some(dk) = self.delta_k {
            require_positive("delta_k", dk)?;
        }
        Ok(())
    }

    /// c.o.m. Lamb-Dicke parameter: the explicit value, else `delta_k * z0_1`.
    pub fn lamb_dicke_eta1(&self) -> Option<f64> {
        self.eta1
            .or_else(|| self.delta_k.map(|dk| dk * zero_point_length(self.mass, self.omega_t)))
    }
}

/// Transverse normal modes of the chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalModeSet {
    /// Angular mode frequencies, descending.
    pub omega: Vec<f64>,
    /// Mode matrix, `u[(i, m)]` = participation of ion `i` in mode `m`.
    pub u: DMatrix<f64>,
    /// Zero-point lengths `sqrt(hbar / 2 M w_m)`, m.
    pub z0: Vec<f64>,
}

impl NormalModeSet {
    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    /// Keeps only the c.o.m. mode (single-mode idealization).
    pub fn com_only(&self) -> NormalModeSet {
        NormalModeSet {
            omega: vec![self.omega[0]],
            u: self.u.columns(0, 1).into_owned(),
            z0: vec![self.z0[0]],
        }
    }
}

pub fn zero_point_length(mass: f64, omega: f64) -> f64 {
    (HBAR / (2.0 * mass * omega)).sqrt()
}

fn force_residual(u: &[f64]) -> DVector<f64> {
    let n = u.len();
    DVector::from_fn(n, |i, _| {
        let mut r = u[i];
        for (j, &uj) in u.iter().enumerate() {
            if j < i {
                r -= 1.0 / (u[i] - uj).powi(2);
            } else if j > i {
                r += 1.0 / (uj - u[i]).powi(2);
            }
        }
        r
    })
}

fn force_jacobian(u: &[f64]) -> DMatrix<f64> {
    let n = u.len();
    let mut jac = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = 1.0;
        for j in 0..n {
            if j != i {
                let c = 2.0 / (u[i] - u[j]).abs().powi(3);
                diag += c;
                jac[(i, j)] = -c;
            }
        }
        jac[(i, i)] = diag;
    }
    jac
}

/// Dimensionless equilibrium positions of `n` ions, ascending and symmetric
/// about zero. Damped Newton iteration from a uniform-spacing start.
pub fn equilibrium_positions(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(invalid("n_ions", "must be >= 1"));
    }
    if n == 1 {
        return Ok(vec![0.0]);
    }
    let half_len = 0.65 * (n - 1) as f64 * 2.018 / (n as f64).powf(0.559);
    let mut u: Vec<f64> = (0..n)
        .map(|i| half_len * (2.0 * i as f64 / (n - 1) as f64 - 1.0))
        .collect();
    let mut res = force_residual(&u);
    let mut norm = res.amax();
    let mut iter = 0;
    while norm >= RESIDUAL_TOL {
        if iter >= MAX_NEWTON_ITER {
            return Err(Error::SolverFailure {
                iterations: iter,
                residual: norm,
            });
        }
        iter += 1;
        let step = force_jacobian(&u).lu().solve(&res).ok_or(Error::SolverFailure {
            iterations: iter,
            residual: norm,
        })?;
        // backtrack until the chain stays ordered and the residual drops;
        // near convergence the full Newton step is taken unconditionally
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(step.iter()).map(|(x, s)| x - lambda * s).collect();
            if trial.windows(2).all(|w| w[1] > w[0]) {
                let r = force_residual(&trial);
                let nr = r.amax();
                if nr < norm || (lambda == 1.0 && norm < 1e-8) {
                    u = trial;
                    res = r;
                    norm = nr;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-10 {
                return Err(Error::SolverFailure {
                    iterations: iter,
                    residual: norm,
                });
            }
        }
    }
    // enforce exact mirror symmetry
    for i in 0..n / 2 {
        let a = 0.5 * (u[n - 1 - i] - u[i]);
        u[i] = -a;
        u[n - 1 - i] = a;
    }
    if n % 2 == 1 {
        u[n / 2] = 0.0;
    }
    Ok(u)
}

/// Transverse Hessian `K_ij` in (rad/s)^2 for the given dimensionless positions.
pub fn transverse_hessian(positions: &[f64], omega_t: f64, omega_ax: f64) -> DMatrix<f64> {
    let n = positions.len();
    let wa2 = omega_ax * omega_ax;
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut coulomb = 0.0;
        for j in 0..n {
            if j != i {
                let c = wa2 / (positions[i] - positions[j]).abs().powi(3);
                coulomb += c;
                k[(i, j)] = c;
            }
        }
        k[(i, i)] = omega_t * omega_t - coulomb;
    }
    k
}

/// Transverse normal modes, sorted by descending frequency with a
/// deterministic eigenvector sign.
pub fn transverse_modes(cfg: &TrapConfig) -> Result<NormalModeSet> {
    cfg.validate()?;
    let n = cfg.n_ions;
    let positions = equilibrium_positions(n)?;
    let k = transverse_hessian(&positions, cfg.omega_t, cfg.omega_ax);
    let eig = k.symmetric_eigen();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut omega = Vec::with_capacity(n);
    let mut u = DMatrix::zeros(n, n);
    for (m, &idx) in order.iter().enumerate() {
        let lam = eig.eigenvalues[idx];
        if lam <= 0.0 {
            return Err(Error::ChainUnstable {
                mode: m + 1,
                eigenvalue: lam,
            });
        }
        omega.push(lam.sqrt());
        let mut col = eig.eigenvectors.column(idx).into_owned();
        let sum: f64 = col.iter().sum();
        let flip = if sum.abs() > 1e-9 {
            sum < 0.0
        } else {
            col.iter()
                .find(|c| c.abs() > 1e-9)
                .is_some_and(|c| *c < 0.0)
        };
        if flip {
            col.neg_mut();
        }
        u.set_column(m, &col);
    }

    // The uniform vector is an exact eigenvector with eigenvalue omega_t^2
    // (Coulomb rows sum to zero); pin it to remove eigensolver roundoff.
    let com = 1.0 / (n as f64).sqrt();
    debug_assert!((omega[0] - cfg.omega_t).abs() < 1e-8 * cfg.omega_t);
    omega[0] = cfg.omega_t;
    u.column_mut(0).fill(com);
    // Near-degenerate neighbours pick up roundoff overlap with the uniform
    // vector; the exact modes are orthogonal to it.
    for m in 1..n {
        let overlap = u.column(m).sum() * com;
        let mut col = u.column(m) - DVector::from_element(n, overlap * com);
        col /= col.norm();
        u.set_column(m, &col);
    }

    let z0 = omega.iter().map(|&w| zero_point_length(cfg.mass, w)).collect();
    Ok(NormalModeSet { omega, u, z0 })
}

/// Lamb-Dicke diagnostic for the c.o.m. mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambDickeCheck {
    /// `S / [(eta1/N) sqrt(6 Phi <Sz^2> / pi)]`; valid when >> 1.
    pub ratio: f64,
    /// Estimated c.o.m. occupation `3 Phi <Sz^2> / (pi N S^2)`.
    pub n_com: f64,
}

pub fn lamb_dicke_check(eta1: f64, n_ions: usize, phi: f64, sz2: f64, squeeze: f64) -> Result<LambDickeCheck> {
    require_positive("eta1", eta1)?;
    require_positive("phi", phi)?;
    require_positive("sz2", sz2)?;
    require_positive("squeeze", squeeze)?;
    if n_ions == 0 {
        return Err(invalid("n_ions", "must be >= 1"));
    }
    let n = n_ions as f64;
    let threshold = (eta1 / n) * (6.0 * phi * sz2 / std::f64::consts::PI).sqrt();
    Ok(LambDickeCheck {
        ratio: squeeze / threshold,
        n_com: 3.0 * phi * sz2 / (std::f64::consts::PI * n * squeeze * squeeze),
    })
}
