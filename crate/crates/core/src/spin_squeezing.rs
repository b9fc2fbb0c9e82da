//! Exact spin correlators of the uniform dissipative Ising model started
//! from all spins along +x, the Ramsey squeezing parameter assembled from
//! them, and its sensitivity to drive imperfections.
//!
//! Conventions: `H = (J/N) sum_{i<j} sz_i sz_j`, `s+ = |up><down|`, and the
//! Lindblad channels `sqrt(G_ud) s-`, `sqrt(G_du) s+`, `sqrt(G_el/4) sz`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::drive_model::DecoherenceRates;
use crate::error::{invalid, require_non_negative, require_positive, Error, Result};
use crate::numerics::{golden_section, logspace, mean_std};
use crate::rng;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `sin(z)/z` with a series near the origin.
pub fn sinc(z: Complex64) -> Complex64 {
    if z.norm() < 1e-4 {
        let z2 = z * z;
        1.0 - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

fn check_inputs(j: f64, t: f64, rates: &DecoherenceRates, n: usize) -> Result<()> {
    if n < 2 {
        return Err(invalid("n", "need at least 2 spins"));
    }
    if !j.is_finite() {
        return Err(invalid("j", "must be finite"));
    }
    require_non_negative("t", t)?;
    rates.validate()
}

/// The two auxiliary functions `(Phi(J,t), Psi(J,t))` of the exact solution.
pub fn phi_psi(j: f64, t: f64, rates: &DecoherenceRates, n: usize) -> Result<(Complex64, Complex64)> {
    check_inputs(j, t, rates, n)?;
    Ok(phi_psi_unchecked(j, t, rates, n))
}

fn phi_psi_unchecked(j: f64, t: f64, rates: &DecoherenceRates, n: usize) -> (Complex64, Complex64) {
    let gamma = rates.gamma();
    let gr = rates.gamma_r();
    let s = Complex64::new(2.0 * j / n as f64, 2.0 * gamma);
    let root = (s * s - rates.gamma_ud * rates.gamma_du).sqrt();
    let decay = (-gr * t / 2.0).exp();
    let sc = sinc(root * t);
    let phi = decay * ((root * t).cos() + t * gr / 2.0 * sc);
    let psi = decay * t * (I * s - 2.0 * gamma) * sc;
    (phi, psi)
}

/// Single- and two-site expectation values (sites `i != j`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlators {
    pub sp: Complex64,
    /// `<s+_i s+_j>`
    pub pp: Complex64,
    /// `<s+_i s-_j>`
    pub pm: Complex64,
    /// `<s+_i sz_j>`
    pub pz: Complex64,
    pub z: f64,
    pub zz: f64,
}

pub fn correlators(j: f64, t: f64, rates: &DecoherenceRates, n: usize) -> Result<Correlators> {
    check_inputs(j, t, rates, n)?;
    Ok(correlators_unchecked(j, t, rates, n))
}

fn correlators_unchecked(j: f64, t: f64, rates: &DecoherenceRates, n: usize) -> Correlators {
    let big = rates.big_gamma();
    let e1 = (-big * t).exp();
    let e2 = (-2.0 * big * t).exp();
    let k = (n - 2) as i32;
    let (phi1, psi1) = phi_psi_unchecked(j, t, rates, n);
    let (phi2, _) = phi_psi_unchecked(2.0 * j, t, rates, n);
    let (phi0, _) = phi_psi_unchecked(0.0, t, rates, n);
    let gr = rates.gamma_r();
    // population relaxes at the total flip rate towards -4 gamma / G_r
    let z = if gr > 0.0 {
        4.0 * rates.gamma() / gr * ((-gr * t).exp() - 1.0)
    } else {
        0.0
    };
    Correlators {
        sp: e1 / 2.0 * phi1.powi(n as i32 - 1),
        pp: e2 / 4.0 * phi2.powi(k),
        pm: e2 / 4.0 * phi0.powi(k),
        pz: e1 / 2.0 * psi1 * phi1.powi(k),
        z,
        zz: z * z,
    }
}

/// Collective spin moments needed for the squeezing parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinMoments {
    pub mean: [f64; 3],
    pub var_y: f64,
    pub var_z: f64,
    pub cov_yz: f64,
}

impl SpinMoments {
    pub fn from_correlators(c: &Correlators, n: usize) -> Self {
        let nf = n as f64;
        let pairs = nf * (nf - 1.0);
        let sx = 2.0 * c.sp.re;
        let sy = 2.0 * c.sp.im;
        let yy = 2.0 * c.pm.re - 2.0 * c.pp.re;
        let yz = 2.0 * c.pz.im;
        let my = nf / 2.0 * sy;
        let mz = nf / 2.0 * c.z;
        SpinMoments {
            mean: [nf / 2.0 * sx, my, mz],
            var_y: (nf + pairs * yy) / 4.0 - my * my,
            var_z: (nf + pairs * c.zz) / 4.0 - mz * mz,
            cov_yz: pairs * yz / 4.0 - my * mz,
        }
    }

    pub fn contrast_len(&self) -> f64 {
        self.mean.iter().map(|m| m * m).sum::<f64>().sqrt()
    }

    /// Variance of `cos(psi) S_z - sin(psi) S_y`.
    pub fn var_at(&self, psi: f64) -> f64 {
        let (s, c) = psi.sin_cos();
        c * c * self.var_z + s * s * self.var_y - 2.0 * s * c * self.cov_yz
    }
}

/// Ramsey squeezing `xi_R^2` and the optimal quadrature angle.
pub fn xi_squared(j: f64, t: f64, rates: &DecoherenceRates, n: usize) -> Result<(f64, f64)> {
    check_inputs(j, t, rates, n)?;
    xi_from_moments(&SpinMoments::from_correlators(&correlators_unchecked(j, t, rates, n), n), n, t)
}

fn xi_from_moments(m: &SpinMoments, n: usize, t: f64) -> Result<(f64, f64)> {
    let len = m.contrast_len();
    let nf = n as f64;
    if !(len > 1e-12 * nf) || !len.is_finite() {
        return Err(Error::ContrastCollapse {
            t,
            contrast: len / (nf / 2.0),
        });
    }
    let d = m.var_y - m.var_z;
    let min_var = 0.5 * (m.var_y + m.var_z - d.hypot(2.0 * m.cov_yz));
    let psi = if d == 0.0 && m.cov_yz == 0.0 {
        0.0
    } else {
        0.5 * (2.0 * m.cov_yz).atan2(d)
    };
    Ok((nf * min_var / (len * len), psi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezingResult {
    pub xi2: f64,
    pub psi_opt: f64,
    pub t_opt: f64,
    /// `|<S>| / (N/2)` at `t_opt`.
    pub contrast: f64,
}

fn evaluate(j: f64, t: f64, rates: &DecoherenceRates, n: usize) -> Result<SqueezingResult> {
    let m = SpinMoments::from_correlators(&correlators_unchecked(j, t, rates, n), n);
    let (xi2, psi_opt) = xi_from_moments(&m, n, t)?;
    Ok(SqueezingResult {
        xi2,
        psi_opt,
        t_opt: t,
        contrast: m.contrast_len() / (n as f64 / 2.0),
    })
}

/// Upper end of the time search: ten times the larger of the ideal
/// one-axis-twisting time scale and the flip-limited optimum, but never past
/// the first coherent contrast zero `pi N / 4J` so small chains do not pick
/// up a revival.
pub fn search_horizon(j: f64, rates: &DecoherenceRates, n: usize) -> f64 {
    let oat = (n as f64).powf(1.0 / 3.0) / j;
    let gr = rates.gamma_r();
    let flip = if gr > 0.0 { (j / (2.0 * gr)).powf(1.0 / 3.0) / j } else { 0.0 };
    let revival = std::f64::consts::PI * n as f64 / (4.0 * j);
    (10.0 * oat.max(flip)).min(revival)
}

/// Minimizes `xi_R^2` over the interaction time: a 200-point log grid over
/// `(0, t_hi]` followed by golden-section refinement around the best point.
pub fn minimize_xi(j: f64, rates: &DecoherenceRates, n: usize) -> Result<SqueezingResult> {
    require_positive("j", j)?;
    check_inputs(j, 0.0, rates, n)?;
    let t_hi = search_horizon(j, rates, n);
    let grid = logspace(t_hi * 1e-5, t_hi, 200);
    let score = |t: f64| match evaluate(j, t, rates, n) {
        Ok(r) if r.xi2.is_finite() => r.xi2,
        _ => f64::INFINITY,
    };
    let values: Vec<f64> = grid.iter().map(|&t| score(t)).collect();
    let (k, best) = values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    if !best.is_finite() {
        return Err(Error::SearchFailure(format!(
            "xi^2 undefined on the whole grid up to t = {t_hi:e}"
        )));
    }
    let lo = grid[k.saturating_sub(1)];
    let hi = grid[(k + 1).min(grid.len() - 1)];
    let (t_opt, _) = golden_section(score, lo, hi, 1e-6 * grid[k]);
    let refined = evaluate(j, t_opt, rates, n)?;
    if refined.xi2 <= best {
        Ok(refined)
    } else {
        evaluate(j, grid[k], rates, n)
    }
}

/// Rate-to-coupling ratios after PA with effective squeezing `s_eff`.
pub fn pa_scaled_rates(ratio_el: f64, ratio_r: f64, s_eff: f64) -> Result<(f64, f64)> {
    require_non_negative("ratio_el", ratio_el)?;
    require_non_negative("ratio_r", ratio_r)?;
    if !(s_eff > 0.0 && s_eff <= 1.0) {
        return Err(invalid("s_eff", "must lie in (0, 1]"));
    }
    Ok((ratio_el * s_eff, ratio_r * s_eff))
}

/// Relative Ising coupling `J(theta)/J(0)` for a mode with squeezing `s`.
pub fn j_ratio_of_theta(theta: f64, s: f64) -> f64 {
    let c = theta.cos();
    (1.0 + c) / 2.0 + s.powi(4) * (1.0 - c) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaSensitivity {
    /// Optimum at `theta = 0`.
    pub baseline: SqueezingResult,
    pub mean_shift: f64,
    pub std_shift: f64,
    /// `theta^4 / 16` averaged over the Gaussian, i.e. `3 sigma^4 / 16`.
    pub analytic_mean: f64,
}

/// `xi_R^2` shift at fixed interaction time when the PA/SDF phase is `theta`.
pub fn theta_shift(j: f64, rates: &DecoherenceRates, n: usize, s: f64, theta: f64, baseline: &SqueezingResult) -> Result<f64> {
    let jt = j * j_ratio_of_theta(theta, s);
    Ok(xi_squared(jt, baseline.t_opt, rates, n)?.0 - baseline.xi2)
}

/// Monte Carlo over `theta ~ N(0, sigma_theta)` with the interaction time
/// held at the `theta = 0` optimum. Sample `k` uses stream `k` of `seed`.
pub fn theta_sensitivity(
    j: f64,
    rates: &DecoherenceRates,
    n: usize,
    s: f64,
    sigma_theta: f64,
    n_samples: usize,
    seed: u64,
) -> Result<ThetaSensitivity> {
    require_non_negative("sigma_theta", sigma_theta)?;
    if n_samples < 2 {
        return Err(invalid("n_samples", "need at least 2 samples"));
    }
    if !(s > 0.0 && s <= 1.0) {
        return Err(invalid("s", "must lie in (0, 1]"));
    }
    let baseline = minimize_xi(j, rates, n)?;
    let shifts = (0..n_samples as u64)
        .map(|k| theta_shift(j, rates, n, s, sigma_theta * rng::normal(seed, k), &baseline))
        .collect::<Result<Vec<_>>>()?;
    let (mean_shift, std_shift) = mean_std(&shifts);
    Ok(ThetaSensitivity {
        baseline,
        mean_shift,
        std_shift,
        analytic_mean: 3.0 * sigma_theta.powi(4) / 16.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaSensitivity {
    /// `|Delta J / J|`.
    pub dj_over_j: f64,
    /// `(Delta J / J)^2`.
    pub dxi2: f64,
    /// Whether the quadratic estimate applies (`N` well below `J / G_r`).
    pub valid: bool,
}

/// Squeezing loss from a relative detuning error `sigma_delta / delta`
/// on a mode with squeezing `s`.
pub fn delta_sensitivity(j: f64, rates: &DecoherenceRates, n: usize, sigma_delta_over_delta: f64, s: f64) -> Result<DeltaSensitivity> {
    require_positive("j", j)?;
    require_non_negative("sigma_delta_over_delta", sigma_delta_over_delta)?;
    if !(s > 0.0 && s <= 1.0) {
        return Err(invalid("s", "must lie in (0, 1]"));
    }
    let dj = sigma_delta_over_delta / (2.0 * s.powi(4));
    let gr = rates.gamma_r();
    Ok(DeltaSensitivity {
        dj_over_j: dj,
        dxi2: dj * dj,
        valid: gr == 0.0 || (n as f64) < 0.1 * j / gr,
    })
}
