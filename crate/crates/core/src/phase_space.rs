//! Coherent-displacement dynamics of the driven, parametrically amplified
//! modes, geometric-phase extraction and the effective squeezing obtained
//! from the full (counter-rotating) equations of motion.
//!
//! Each mode obeys, in the frame rotating at the SDF frequency `mu`,
//!
//! ```text
//! da/dt = i d a - i f s (1 + E) - 2 i g cos(2 mu t - theta) (a + a* E),   E = exp(2 i mu t)
//! ```
//!
//! and the rotating-wave version keeps only the static parts,
//! `da/dt = i d a - i g e^{i theta} a* - i f s`. Alongside `a` the quadratic
//! propagator `a_hom = u a0 + v a0*` is carried, which defines the
//! interaction-picture displacement `b = u* a - v a*` whose enclosed area is
//! the geometric phase.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::drive_model::{bogoliubov, DriveParams};
use crate::error::{invalid, require_non_negative, require_positive, Error, Result};
use crate::ion_crystal::{NormalModeSet, TrapConfig};
use crate::numerics::{bracketed_root, linspace};
use crate::ode::{Integrator, IntegratorConfig};
use crate::TWO_PI;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Which equations of motion to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dynamics {
    Rwa,
    Full,
}

/// Per-mode branch weights for a fixed spin configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinBranch {
    sigma: Vec<i8>,
    s: Vec<f64>,
}

impl SpinBranch {
    /// `s_m = sum_i U[i][m] sigma_i`; every `sigma_i` must be +1 or -1.
    pub fn new(modes: &NormalModeSet, sigma: &[i8]) -> Result<Self> {
        if sigma.len() != modes.len() {
            return Err(invalid(
                "sigma",
                format!("expected {} spins, got {}", modes.len(), sigma.len()),
            ));
        }
        if sigma.iter().any(|&x| x != 1 && x != -1) {
            return Err(invalid("sigma", "entries must be +1 or -1"));
        }
        let s = (0..modes.len())
            .map(|m| {
                sigma
                    .iter()
                    .enumerate()
                    .map(|(i, &x)| modes.u[(i, m)] * x as f64)
                    .sum()
            })
            .collect();
        Ok(SpinBranch {
            sigma: sigma.to_vec(),
            s,
        })
    }

    pub fn sigma(&self) -> &[i8] {
        &self.sigma
    }

    pub fn weights(&self) -> &[f64] {
        &self.s
    }
}

/// Everything one mode needs to be integrated on its own.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeParams {
    /// SDF coupling, rad/s.
    pub f: f64,
    /// Detuning `mu - omega_m`, rad/s.
    pub delta: f64,
    /// PA coupling, rad/s.
    pub g: f64,
    pub theta: f64,
    /// SDF frequency, rad/s (only the full dynamics depends on it).
    pub mu: f64,
    /// Branch weight `s_m`.
    pub s: f64,
}

impl ModeParams {
    /// The RWA needs `g < delta`; the full dynamics only positivity.
    pub fn validate_for(&self, dynamics: Dynamics) -> Result<()> {
        match dynamics {
            Dynamics::Rwa => self.validate(),
            Dynamics::Full => {
                ModeParams { g: 0.0, ..*self }.validate()?;
                require_non_negative("g", self.g)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("f", self.f), ("theta", self.theta), ("s", self.s)] {
            if !v.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        require_positive("delta", self.delta)?;
        require_non_negative("g", self.g)?;
        require_positive("mu", self.mu)?;
        if self.g >= self.delta {
            return Err(Error::UnstableSqueezing {
                g: self.g,
                delta: self.delta,
            });
        }
        Ok(())
    }

    /// RWA loop period `2 pi / delta'`.
    pub fn nominal_period(&self) -> f64 {
        TWO_PI / ((self.delta - self.g) * (self.delta + self.g)).sqrt()
    }
}

/// Sampled solution of one mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeTrajectory {
    /// Displacement in the `mu`-rotating frame.
    pub alpha: Vec<Complex64>,
    /// Interaction-picture displacement.
    pub beta_ip: Vec<Complex64>,
    /// Accumulated geometric phase of this mode, rad.
    pub phi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub t: Vec<f64>,
    /// `modes[m]` holds mode `m`'s samples on the grid `t`.
    pub modes: Vec<ModeTrajectory>,
    pub mode_of: Dynamics,
}

/// Closed-form RWA displacement at time `t` for `alpha(0) = 0`.
pub fn rwa_trajectory(f: f64, delta: f64, g: f64, theta: f64, s: f64, t: f64) -> Result<Complex64> {
    require_positive("delta", delta)?;
    require_non_negative("g", g)?;
    if g >= delta {
        return Err(Error::UnstableSqueezing { g, delta });
    }
    let b = bogoliubov(delta, g, theta, 1.0)?;
    let dp = b.delta_prime;
    // Bogoliubov frame: a circle of radius |f'| s / delta'
    let beta = b.f_prime(f) * (s / dp) * (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, dp * t));
    Ok(beta * b.r.cosh() + Complex64::from_polar(b.r.sinh(), theta) * beta.conj())
}

#[inline]
fn c(y: &[f64], k: usize) -> Complex64 {
    Complex64::new(y[k], y[k + 1])
}

#[inline]
fn put(dy: &mut [f64], k: usize, z: Complex64) {
    dy[k] = z.re;
    dy[k + 1] = z.im;
}

/// Right-hand side of the 7-real state (alpha, u, v, phi).
fn rhs(p: &ModeParams, dynamics: Dynamics, t: f64, y: &[f64; 7], dy: &mut [f64; 7]) {
    let a = c(y, 0);
    let u = c(y, 2);
    let v = c(y, 4);
    let id = I * p.delta;
    let (da, du, dv, force) = match dynamics {
        Dynamics::Rwa => {
            let pa = I * Complex64::from_polar(p.g, p.theta);
            let force = Complex64::new(0.0, -p.f * p.s);
            (
                id * a - pa * a.conj() + force,
                id * u - pa * v.conj(),
                id * v - pa * u.conj(),
                force,
            )
        }
        Dynamics::Full => {
            let (sn, cs) = (2.0 * p.mu * t).sin_cos();
            let e = Complex64::new(cs, sn);
            let cos_pa = cs * p.theta.cos() + sn * p.theta.sin();
            let k = I * (2.0 * p.g * cos_pa);
            let force = Complex64::new(0.0, -p.f * p.s) * (1.0 + e);
            (
                id * a - k * (a + a.conj() * e) + force,
                id * u - k * (u + v.conj() * e),
                id * v - k * (v + u.conj() * e),
                force,
            )
        }
    };
    let beta = u.conj() * a - v * a.conj();
    let dbeta = u.conj() * force - v * force.conj();
    put(dy, 0, da);
    put(dy, 2, du);
    put(dy, 4, dv);
    dy[6] = -2.0 * (beta.conj() * dbeta).im;
}

fn initial_state() -> [f64; 7] {
    [0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]
}

fn beta_of(y: &[f64; 7]) -> Complex64 {
    let (a, u, v) = (c(y, 0), c(y, 2), c(y, 4));
    u.conj() * a - v * a.conj()
}

/// Integrates one mode from `alpha(0) = 0`, sampling at the (ascending,
/// non-negative) times `grid`.
pub fn integrate_mode(p: &ModeParams, dynamics: Dynamics, grid: &[f64], cfg: &IntegratorConfig) -> Result<ModeTrajectory> {
    p.validate_for(dynamics)?;
    if grid.windows(2).any(|w| w[1] < w[0]) || grid.first().is_some_and(|&t| t < 0.0) {
        return Err(invalid("t", "sample times must be ascending and non-negative"));
    }
    let f = |t: f64, y: &[f64; 7], dy: &mut [f64; 7]| rhs(p, dynamics, t, y, dy);
    let mut ig = Integrator::<7>::new(*cfg)?;
    let mut y = initial_state();
    let mut t = 0.0;
    let mut out = ModeTrajectory {
        alpha: Vec::with_capacity(grid.len()),
        beta_ip: Vec::with_capacity(grid.len()),
        phi: Vec::with_capacity(grid.len()),
    };
    for &tk in grid {
        ig.integrate(&f, t, &mut y, tk)?;
        t = tk;
        out.alpha.push(c(&y, 0));
        out.beta_ip.push(beta_of(&y));
        out.phi.push(y[6]);
    }
    Ok(out)
}

/// Geometric phase of one mode accumulated over `[0, t_end]`.
pub fn mode_phase(p: &ModeParams, dynamics: Dynamics, t_end: f64, cfg: &IntegratorConfig) -> Result<f64> {
    require_positive("t_end", t_end)?;
    Ok(integrate_mode(p, dynamics, &[t_end], cfg)?.phi[0])
}

/// Integrates every mode of the chain for one spin branch on a uniform grid
/// of `samples` points over `[0, t_end]`.
pub fn integrate_full(
    drive: &DriveParams,
    modes: &NormalModeSet,
    trap: &TrapConfig,
    branch: &SpinBranch,
    t_end: f64,
    samples: usize,
    dynamics: Dynamics,
    cfg: &IntegratorConfig,
) -> Result<TrajectoryRecord> {
    require_positive("t_end", t_end)?;
    if samples < 2 {
        return Err(invalid("samples", "need at least 2 time samples"));
    }
    if branch.weights().len() != modes.len() {
        return Err(invalid("sigma", "branch does not match the mode set"));
    }
    let set = drive.bogoliubov_set(modes, trap)?;
    let grid = linspace(0.0, t_end, samples);
    let per_mode = set
        .entries
        .iter()
        .zip(branch.weights())
        .map(|(e, &s)| {
            let p = ModeParams {
                f: e.f,
                delta: e.transform.delta,
                g: e.transform.g,
                theta: drive.theta,
                mu: drive.mu,
                s,
            };
            integrate_mode(&p, dynamics, &grid, cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrajectoryRecord {
        t: grid,
        modes: per_mode,
        mode_of: dynamics,
    })
}

/// Total geometric phase `Phi(t)` summed over modes.
pub fn geometric_phase(rec: &TrajectoryRecord) -> Vec<f64> {
    (0..rec.t.len())
        .map(|k| rec.modes.iter().map(|m| m.phi[k]).sum())
        .collect()
}

/// Geometric phase over `[0, t_end]` computed from the RWA dynamics in the
/// Bogoliubov frame, where the quadratic part is a plain rotation at
/// `delta'`. Independent route to the same area as [`mode_phase`].
pub fn rwa_phase_bogoliubov_frame(p: &ModeParams, t_end: f64, cfg: &IntegratorConfig) -> Result<f64> {
    p.validate()?;
    require_positive("t_end", t_end)?;
    let b = bogoliubov(p.delta, p.g, p.theta, p.mu)?;
    let fp = b.f_prime(p.f) * p.s;
    let dp = b.delta_prime;
    // state: b (2 reals), phi
    let f = |t: f64, y: &[f64; 3], dy: &mut [f64; 3]| {
        let bb = Complex64::new(y[0], y[1]);
        let db = I * dp * bb - I * fp;
        dy[0] = db.re;
        dy[1] = db.im;
        // interaction picture: beta = e^{-i d' t} b
        let rot = Complex64::from_polar(1.0, -dp * t);
        let beta = rot * bb;
        let dbeta = rot * (-I * fp);
        dy[2] = -2.0 * (beta.conj() * dbeta).im;
    };
    let mut ig = Integrator::<3>::new(*cfg)?;
    let mut y = [0.0; 3];
    ig.integrate(&f, 0.0, &mut y, t_end)?;
    Ok(y[2])
}

/// Rotation angle per period of a symplectic one-mode map `a -> u a + v a*`.
/// Errors if the map is hyperbolic (parametrically unstable).
fn monodromy_angle(u: Complex64, v: Complex64, g: f64, delta: f64) -> Result<f64> {
    let det = u.norm_sqr() - v.norm_sqr();
    let sin2 = u.im * u.im - v.norm_sqr();
    if !(sin2 > 0.0) {
        return Err(Error::UnstableSqueezing { g, delta });
    }
    Ok((sin2 / det).sqrt().atan2(u.re / det.sqrt()))
}

/// Loop period extracted numerically from the homogeneous dynamics.
///
/// The quadratic part of the full equations is periodic in time with
/// period `pi / mu`, so the propagator over an integer number of drive
/// periods is a symplectic rotation whose angle gives the effective loop
/// frequency (Floquet exponent). Under the RWA any interval works.
pub fn loop_period(p: &ModeParams, dynamics: Dynamics, cfg: &IntegratorConfig) -> Result<f64> {
    let span = match dynamics {
        Dynamics::Rwa => {
            p.validate()?;
            p.nominal_period() / 8.0
        }
        Dynamics::Full => {
            // the counter-rotating terms move the instability edge below
            // delta = g
            p.validate_for(dynamics)?;
            let drive_period = std::f64::consts::PI / p.mu;
            let k = if p.g < p.delta {
                (p.nominal_period() / (8.0 * drive_period)).floor().clamp(1.0, 64.0)
            } else {
                64.0
            };
            k * drive_period
        }
    };
    let tight = IntegratorConfig {
        rel_tol: cfg.rel_tol.min(1e-12),
        abs_tol: cfg.abs_tol.min(1e-14),
        ..*cfg
    };
    let hom = ModeParams { f: 0.0, ..*p };
    let f = |t: f64, y: &[f64; 7], dy: &mut [f64; 7]| rhs(&hom, dynamics, t, y, dy);
    let mut ig = Integrator::<7>::new(tight)?;
    let mut y = initial_state();
    ig.integrate(&f, 0.0, &mut y, span)?;
    let angle = monodromy_angle(c(&y, 2), c(&y, 4), p.g, p.delta)?;
    Ok(TWO_PI * span / angle)
}

/// RWA validity class of a mode, from the counter-rotating shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum RwaRegion {
    Valid,
    Marginal,
    Broken,
}

impl std::fmt::Display for RwaRegion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RwaRegion::Valid => "VALID",
            RwaRegion::Marginal => "MARGINAL",
            RwaRegion::Broken => "BROKEN",
        })
    }
}

/// `VALID` below `delta'/20`, `MARGINAL` on `[delta'/20, delta'/2)`,
/// `BROKEN` from `delta'/2` up.
pub fn rwa_region(g: f64, delta: f64, mu: f64) -> Result<RwaRegion> {
    let b = bogoliubov(delta, g, 0.0, mu)?;
    Ok(region_of(b.rwa_shift, b.delta_prime))
}

fn region_of(shift: f64, delta_prime: f64) -> RwaRegion {
    if shift < delta_prime / 20.0 {
        RwaRegion::Valid
    } else if shift < delta_prime / 2.0 {
        RwaRegion::Marginal
    } else {
        RwaRegion::Broken
    }
}

/// Outcome of an effective-squeezing evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SEffResult {
    pub g: f64,
    pub tau: f64,
    /// Effective squeezing from the full dynamics.
    pub s_eff: f64,
    /// RWA squeezing at the RWA operating point with the same `tau`.
    pub s_rwa: f64,
    /// Operating detuning, rad/s.
    pub delta: f64,
    pub mu: f64,
    /// Full-dynamics loop time at the operating point, s.
    pub t_min: f64,
    /// SDF coupling reaching `phi_target` in one loop with PA, rad/s.
    pub f: f64,
    /// Same without PA, rad/s.
    pub f_sdf: f64,
    /// Counter-rotating shift and `delta'` at the RWA operating point.
    pub rwa_shift: f64,
    pub delta_prime: f64,
    pub region: RwaRegion,
}

/// Detuning whose full-dynamics loop period equals `tau`, for PA strength
/// `g` on a mode at `omega1` (with `mu = omega1 + delta`).
pub fn detuning_for_period(g: f64, tau: f64, omega1: f64, cfg: &IntegratorConfig) -> Result<f64> {
    require_non_negative("g", g)?;
    require_positive("tau", tau)?;
    require_positive("omega1", omega1)?;
    let target = TWO_PI / tau;
    if g == 0.0 {
        // no parametric term: the homogeneous motion is an exact rotation
        return Ok(target);
    }
    let freq_gap = |delta: f64| -> Result<f64> {
        let p = ModeParams {
            f: 0.0,
            delta,
            g,
            theta: 0.0,
            mu: omega1 + delta,
            s: 1.0,
        };
        match loop_period(&p, Dynamics::Full, cfg) {
            Ok(period) => Ok(TWO_PI / period - target),
            // inside the parametric instability the loop never closes
            Err(Error::UnstableSqueezing { .. }) => Ok(-target),
            Err(e) => Err(e),
        }
    };
    let mut hi = (target * target + g * g).sqrt();
    let mut tries = 0;
    while freq_gap(hi)? <= 0.0 {
        hi = g + 2.0 * (hi - g);
        tries += 1;
        if tries > 60 {
            return Err(Error::RootFinding(format!(
                "loop period {tau:e} s unreachable for g = {g:e} rad/s"
            )));
        }
    }
    // walk down towards (and past) delta = g until the loop is too slow
    let mut lo = g;
    let mut step = hi - g;
    while freq_gap(lo)? > 0.0 {
        lo -= step;
        step *= 2.0;
        if lo <= 0.0 {
            return Err(Error::RootFinding(format!(
                "no slow-loop bracket for tau = {tau:e} s, g = {g:e} rad/s"
            )));
        }
    }
    bracketed_root(freq_gap, lo, hi, 1e-10, 400)
}

/// How the detuning is chosen when extracting `S_eff`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SEffProtocol {
    /// `delta` from the RWA relation `tau = 2 pi / delta'`; the actual loop
    /// time is whatever the full dynamics gives.
    #[default]
    FixedDetuning,
    /// `delta` retuned until the full-dynamics loop period equals `tau`.
    MatchedPeriod,
}

/// Detuning, loop time and force that make one loop enclose a given phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub delta: f64,
    pub mu: f64,
    /// Full-dynamics loop period, s.
    pub t_loop: f64,
    /// Force giving `phi_target` over one loop with unit branch weight, rad/s.
    pub f: f64,
}

/// Operating point for PA strength `g` and nominal loop period `tau` on a
/// mode at `omega1`.
///
/// The detuning follows `protocol`. The loop time is the full-dynamics
/// period at that detuning, and the force is scaled until one loop encloses
/// `phi_target` (the phase is exactly quadratic in `f`).
pub fn operating_point(
    g: f64,
    tau: f64,
    omega1: f64,
    phi_target: f64,
    protocol: SEffProtocol,
    cfg: &IntegratorConfig,
) -> Result<OperatingPoint> {
    require_positive("phi_target", phi_target)?;
    require_positive("tau", tau)?;
    require_positive("omega1", omega1)?;
    require_non_negative("g", g)?;
    let target = TWO_PI / tau;
    let delta = match protocol {
        SEffProtocol::FixedDetuning => (target * target + g * g).sqrt(),
        SEffProtocol::MatchedPeriod => detuning_for_period(g, tau, omega1, cfg)?,
    };
    let mut p = ModeParams {
        f: 0.0,
        delta,
        g,
        theta: 0.0,
        mu: omega1 + delta,
        s: 1.0,
    };
    let t_loop = loop_period(&p, Dynamics::Full, cfg)?;
    // probe force giving O(1) displacements
    p.f = TWO_PI / t_loop;
    let phi = mode_phase(&p, Dynamics::Full, t_loop, cfg)?;
    if !(phi > 0.0) {
        return Err(Error::RootFinding(format!(
            "non-positive loop phase {phi:e} at g = {g:e}"
        )));
    }
    Ok(OperatingPoint {
        delta,
        mu: p.mu,
        t_loop,
        f: p.f * (phi_target / phi).sqrt(),
    })
}

/// Effective squeezing for PA strength `g`, nominal loop period `tau` and
/// target single-loop phase `phi_target`, on a mode at `omega1`: the ratio
/// of `f t_loop` at the [`operating_point`] with PA to the same product
/// without PA.
pub fn s_eff(
    g: f64,
    tau: f64,
    omega1: f64,
    phi_target: f64,
    protocol: SEffProtocol,
    cfg: &IntegratorConfig,
) -> Result<SEffResult> {
    let op = operating_point(g, tau, omega1, phi_target, protocol, cfg)?;
    let sdf = operating_point(0.0, tau, omega1, phi_target, protocol, cfg)?;
    let target = TWO_PI / tau;
    let delta_rwa = (target * target + g * g).sqrt();
    let b = bogoliubov(delta_rwa, g, 0.0, omega1 + delta_rwa)?;
    Ok(SEffResult {
        g,
        tau,
        s_eff: (op.f * op.t_loop) / (sdf.f * sdf.t_loop),
        s_rwa: b.squeeze,
        delta: op.delta,
        mu: op.mu,
        t_min: op.t_loop,
        f: op.f,
        f_sdf: sdf.f,
        rwa_shift: b.rwa_shift,
        delta_prime: b.delta_prime,
        region: region_of(b.rwa_shift, b.delta_prime),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn mode(f: f64, delta: f64, g: f64, theta: f64) -> ModeParams {
        ModeParams {
            f,
            delta,
            g,
            theta,
            mu: 1e3 * delta,
            s: 1.0,
        }
    }

    #[test]
    fn far_point_of_sdf_circle() {
        // half a loop: |alpha| = 2 f s / delta
        let a = rwa_trajectory(0.3, 2.0, 0.0, 0.0, 1.0, PI / 2.0).unwrap();
        assert_relative_eq!(a.norm(), 2.0 * 0.3 / 2.0, max_relative = 1e-14);
        assert_eq!(rwa_trajectory(0.3, 2.0, 0.5, 0.2, 1.0, 0.0).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn mirror_of_sine_cosine_form() {
        // (f/d')[sin + i(cos - 1)/S^2] is the same orbit written with the
        // opposite sign of the mode operator: mirrored and rotated by -i
        let (f, d, g) = (0.1, 1.0, 0.6);
        let b = bogoliubov(d, g, 0.0, 1.0).unwrap();
        for t in [0.3, 1.7, 4.0] {
            let x = b.delta_prime * t;
            let other = Complex64::new(x.sin(), (x.cos() - 1.0) / b.squeeze.powi(2)) * (f / b.delta_prime);
            let a = rwa_trajectory(f, d, g, 0.0, 1.0, t).unwrap();
            assert!((a - (-I * other.conj())).norm() < 1e-15);
        }
    }

    #[test]
    fn closed_form_matches_rwa_integration() {
        let p = mode(0.1, 1.0, 0.6, 0.7);
        let grid = linspace(0.0, 1.3 * p.nominal_period(), 9);
        let tr = integrate_mode(&p, Dynamics::Rwa, &grid, &IntegratorConfig::default()).unwrap();
        for (t, a) in grid.iter().zip(&tr.alpha) {
            let exact = rwa_trajectory(p.f, p.delta, p.g, p.theta, p.s, *t).unwrap();
            assert!((a - exact).norm() < 1e-9, "t = {t}: {a} vs {exact}");
        }
    }

    #[test]
    fn rwa_orbit_is_a_circle_in_the_bogoliubov_frame() {
        let p = mode(0.2, 1.0, 0.5, 0.4);
        let b = bogoliubov(p.delta, p.g, p.theta, p.mu).unwrap();
        let centre = -b.f_prime(p.f) * p.s / b.delta_prime;
        let grid = linspace(0.0, p.nominal_period(), 33);
        let tr = integrate_mode(&p, Dynamics::Rwa, &grid, &IntegratorConfig::default()).unwrap();
        for beta in &tr.beta_ip {
            let bf = beta * b.r.cosh() - Complex64::from_polar(b.r.sinh(), p.theta) * beta.conj();
            assert!(((bf - centre).norm() - centre.norm()).abs() < 1e-9);
        }
    }

    #[test]
    fn sdf_loop_phase_calibration() {
        let p = mode(0.1, 1.0, 0.0, 0.0);
        let phi = mode_phase(&p, Dynamics::Rwa, p.nominal_period(), &IntegratorConfig::default()).unwrap();
        assert_relative_eq!(phi, 4.0 * PI * 0.01, max_relative = 1e-8);
    }

    #[test]
    fn phase_quadratic_in_branch_weight() {
        let cfg = IntegratorConfig::default();
        let p1 = mode(0.1, 1.0, 0.4, 0.3);
        let p2 = ModeParams { s: 2.0, ..p1 };
        let t = p1.nominal_period();
        let r = mode_phase(&p2, Dynamics::Rwa, t, &cfg).unwrap() / mode_phase(&p1, Dynamics::Rwa, t, &cfg).unwrap();
        assert_relative_eq!(r, 4.0, max_relative = 1e-9);
    }

    #[test]
    fn zero_drive_gives_zero_phase() {
        let p = mode(0.0, 1.0, 0.4, 0.0);
        let grid = linspace(0.0, 3.0, 5);
        let tr = integrate_mode(&p, Dynamics::Rwa, &grid, &IntegratorConfig::default()).unwrap();
        assert!(tr.phi.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn rwa_period_by_monodromy() {
        let p = mode(0.1, 1.0, 0.6, 0.0);
        let t = loop_period(&p, Dynamics::Rwa, &IntegratorConfig::default()).unwrap();
        assert_relative_eq!(t, TWO_PI / 0.8, max_relative = 1e-10);
    }

    #[test]
    fn full_period_without_pa_is_exact() {
        let p = mode(0.1, 1.0, 0.0, 0.0);
        let t = loop_period(&p, Dynamics::Full, &IntegratorConfig::default()).unwrap();
        assert_relative_eq!(t, TWO_PI, max_relative = 1e-10);
    }

    #[test]
    fn counter_rotating_terms_shorten_the_loop() {
        let p = ModeParams {
            mu: 40.0,
            ..mode(0.1, 1.0, 0.9, 0.0)
        };
        let full = loop_period(&p, Dynamics::Full, &IntegratorConfig::default()).unwrap();
        assert!(full < p.nominal_period());
    }

    #[test]
    fn region_thresholds() {
        assert_eq!(rwa_region(0.0, 1.0, 10.0).unwrap(), RwaRegion::Valid);
        assert_eq!(region_of(1.0, 20.0), RwaRegion::Marginal);
        assert_eq!(region_of(0.999, 20.0), RwaRegion::Valid);
        assert_eq!(region_of(10.0, 20.0), RwaRegion::Broken);
        assert_eq!(region_of(9.99, 20.0), RwaRegion::Marginal);
    }

    #[test]
    fn branch_weights_from_modes() {
        let trap = TrapConfig {
            n_ions: 2,
            omega_t: 10.0,
            omega_ax: 3.0,
            mass: 1.0,
            charge: 1.0,
            d_t: 1.0,
            eta1: None,
            delta_k: None,
        };
        let modes = crate::ion_crystal::transverse_modes(&trap).unwrap();
        let b = SpinBranch::new(&modes, &[1, 1]).unwrap();
        assert_relative_eq!(b.weights()[0], 2f64.sqrt(), max_relative = 1e-14);
        assert!(b.weights()[1].abs() < 1e-14);
        assert!(SpinBranch::new(&modes, &[1, 0]).is_err());
    }
}
