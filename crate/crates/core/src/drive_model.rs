//! Drive configuration, Bogoliubov transformation of the parametrically
//! amplified modes, and the closed-form single-loop algebra built on it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_non_negative, require_positive, Error, Result};
use crate::ion_crystal::{NormalModeSet, TrapConfig};
use crate::{HBAR, TWO_PI};

/// How the spin-dependent force strength is given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// c.o.m. coupling `f_1` in rad/s; other modes scale with `z0_m`.
    Direct { f: f64 },
    /// Peak force in N; `f_m = F z0_m / (2 hbar)`.
    Force { force: f64 },
}

/// How the parametric drive strength is given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PaStrength {
    /// c.o.m. PA coupling `g` in rad/s.
    Direct { g: f64 },
    /// Modulation voltage amplitude in V; `g_m = e V / (M w_m d_T^2)`.
    Voltage { volts: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    pub coupling: Coupling,
    /// SDF angular frequency, rad/s.
    pub mu: f64,
    pub pa: PaStrength,
    /// Relative PA/SDF phase, rad.
    pub theta: f64,
    /// If false every mode sees the c.o.m. value of `g`.
    #[serde(default)]
    pub mode_dependent_g: bool,
}

impl DriveParams {
    /// Per-mode SDF couplings `f_m`, rad/s.
    pub fn couplings(&self, modes: &NormalModeSet) -> Vec<f64> {
        match self.coupling {
            Coupling::Direct { f } => modes.z0.iter().map(|z| f * z / modes.z0[0]).collect(),
            Coupling::Force { force } => modes.z0.iter().map(|z| force * z / (2.0 * HBAR)).collect(),
        }
    }

    /// Per-mode PA couplings `g_m`, rad/s.
    pub fn pa_couplings(&self, modes: &NormalModeSet, trap: &TrapConfig) -> Vec<f64> {
        let w1 = modes.omega[0];
        let g1 = match self.pa {
            PaStrength::Direct { g } => g,
            PaStrength::Voltage { volts } => trap.charge * volts / (trap.mass * w1 * trap.d_t * trap.d_t),
        };
        modes
            .omega
            .iter()
            .map(|w| if self.mode_dependent_g { g1 * w1 / w } else { g1 })
            .collect()
    }

    pub fn detunings(&self, modes: &NormalModeSet) -> Vec<f64> {
        modes.omega.iter().map(|w| self.mu - w).collect()
    }

    /// Checks the drive against a concrete mode set.
    pub fn validate(&self, modes: &NormalModeSet, trap: &TrapConfig) -> Result<()> {
        require_positive("mu", self.mu)?;
        if !self.theta.is_finite() {
            return Err(invalid("theta", "must be finite"));
        }
        match self.coupling {
            Coupling::Direct { f } => require_non_negative("f", f)?,
            Coupling::Force { force } => require_non_negative("force", force)?,
        }
        match self.pa {
            PaStrength::Direct { g } => require_non_negative("g", g)?,
            PaStrength::Voltage { volts } => require_non_negative("volts", volts)?,
        }
        let deltas = self.detunings(modes);
        if deltas[0] <= 0.0 {
            return Err(invalid(
                "mu",
                format!("c.o.m. detuning must be positive (mu > omega_1), got {:e} rad/s", deltas[0]),
            ));
        }
        for (m, (d, g)) in deltas.iter().zip(self.pa_couplings(modes, trap)).enumerate() {
            if g >= *d {
                return Err(invalid(
                    "g",
                    format!("mode {}: g = {g:e} must be below delta = {d:e}", m + 1),
                ));
            }
        }
        Ok(())
    }

    /// Full per-mode parameter table.
    pub fn bogoliubov_set(&self, modes: &NormalModeSet, trap: &TrapConfig) -> Result<BogoliubovSet> {
        self.validate(modes, trap)?;
        let fs = self.couplings(modes);
        let gs = self.pa_couplings(modes, trap);
        let entries = modes
            .omega
            .iter()
            .zip(fs.iter().zip(gs.iter()))
            .map(|(&omega, (&f, &g))| {
                let transform = bogoliubov(self.mu - omega, g, self.theta, self.mu)?;
                Ok(ModeDrive {
                    omega,
                    f,
                    f_prime: transform.f_prime(f),
                    transform,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BogoliubovSet { entries })
    }
}

/// Bogoliubov-transformed quantities of one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BogoliubovMode {
    /// `mu - w_m`, rad/s.
    pub delta: f64,
    /// PA coupling, rad/s.
    pub g: f64,
    pub theta: f64,
    /// Squeeze parameter `r`.
    pub r: f64,
    /// Quadrature squeezing `S(theta)`.
    pub squeeze: f64,
    /// `sqrt(delta^2 - g^2)`, rad/s.
    pub delta_prime: f64,
    /// Counter-rotating frequency shift `g^2 e^{2r} / (4 mu)`, rad/s.
    pub rwa_shift: f64,
}

impl BogoliubovMode {
    /// `cosh r + e^{i theta} sinh r`; multiplies `f` to give `f'`.
    pub fn f_scale(&self) -> Complex64 {
        Complex64::new(self.r.cosh(), 0.0) + Complex64::from_polar(self.r.sinh(), self.theta)
    }

    pub fn f_prime(&self, f: f64) -> Complex64 {
        self.f_scale() * f
    }

    /// Maximal quadrature squeezing `e^{-r}` (reached at theta = 0).
    pub fn squeeze_max(&self) -> f64 {
        (-self.r).exp()
    }
}

/// Per-mode drive entry of a [`BogoliubovSet`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeDrive {
    pub omega: f64,
    pub f: f64,
    pub f_prime: Complex64,
    pub transform: BogoliubovMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BogoliubovSet {
    pub entries: Vec<ModeDrive>,
}

/// Quadrature squeezing of a mode with squeeze parameter `r` at phase `theta`.
pub fn squeeze_at(r: f64, theta: f64) -> f64 {
    ((2.0 * r).cosh() + theta.cos() * (2.0 * r).sinh()).powf(-0.5)
}

/// Bogoliubov transformation for a mode detuned by `delta` under PA of
/// strength `g` and relative phase `theta`; `mu` only enters the
/// counter-rotating shift.
pub fn bogoliubov(delta: f64, g: f64, theta: f64, mu: f64) -> Result<BogoliubovMode> {
    if !(delta.is_finite() && g.is_finite() && theta.is_finite()) {
        return Err(invalid("delta/g/theta", "must be finite"));
    }
    if g.abs() >= delta {
        return Err(Error::UnstableSqueezing { g, delta });
    }
    require_positive("mu", mu)?;
    let r = 0.25 * ((delta + g) / (delta - g)).ln();
    let delta_prime = ((delta - g) * (delta + g)).sqrt();
    Ok(BogoliubovMode {
        delta,
        g,
        theta,
        r,
        squeeze: squeeze_at(r, theta),
        delta_prime,
        rwa_shift: g * g * (2.0 * r).exp() / (4.0 * mu),
    })
}

/// Geometric phase, duration and Ising coupling of a single closed loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopQuantities {
    /// Geometric phase of one loop for unit branch weight, rad.
    pub phi_loop: f64,
    /// Loop duration `2 pi / delta'`, s.
    pub tau: f64,
    /// Ising coupling `f^2 / (delta - g)`, rad/s.
    pub j: f64,
}

fn check_loop_args(f: f64, delta: f64, g: f64) -> Result<()> {
    require_non_negative("f", f)?;
    require_positive("delta", delta)?;
    require_non_negative("g", g)?;
    if g >= delta {
        return Err(Error::UnstableSqueezing { g, delta });
    }
    Ok(())
}

/// Single-loop quantities at theta = 0.
///
/// `phi_loop = 4 pi f^2 / [(delta - g)^{3/2} (delta + g)^{1/2}]`, which
/// reduces to `4 pi (f/delta)^2` without PA.
pub fn loop_quantities(f: f64, delta: f64, g: f64) -> Result<LoopQuantities> {
    check_loop_args(f, delta, g)?;
    let dm = delta - g;
    let dp = delta + g;
    Ok(LoopQuantities {
        phi_loop: 2.0 * TWO_PI * f * f / (dm.powf(1.5) * dp.sqrt()),
        tau: TWO_PI / (dm * dp).sqrt(),
        j: f * f / dm,
    })
}

/// The same single-loop phase written through the transformed drive:
/// `4 pi |f'|^2 / delta'^2` at theta = 0.
pub fn phi_loop_from_transform(f: f64, delta: f64, g: f64) -> Result<f64> {
    check_loop_args(f, delta, g)?;
    let b = bogoliubov(delta, g, 0.0, 1.0)?;
    let fp = b.f_prime(f).norm();
    Ok(2.0 * TWO_PI * (fp / b.delta_prime).powi(2))
}

/// Ising coupling at relative phase `theta` (exact in theta).
pub fn j_of_theta(f: f64, delta: f64, g: f64, theta: f64) -> Result<f64> {
    check_loop_args(f, delta, g)?;
    let c = theta.cos();
    Ok(f * f / (delta - g) * (1.0 + c) / 2.0 + f * f / (delta + g) * (1.0 - c) / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectatorBound {
    /// Maximum residual displacement `2 f_m / (delta_m - g)`.
    pub bound: f64,
    /// Looser mode-gap bound `2 f_m / (w_1 - w_m)`, when the gap is known.
    pub gap_bound: Option<f64>,
}

pub fn spectator_bound(f_m: f64, delta_m: f64, g: f64, mode_gap: Option<f64>) -> Result<SpectatorBound> {
    require_non_negative("f_m", f_m)?;
    if !(delta_m > g) {
        return Err(Error::UnstableSqueezing { g, delta: delta_m });
    }
    let gap_bound = match mode_gap {
        Some(gap) => {
            require_positive("mode_gap", gap)?;
            Some(2.0 * f_m / gap)
        }
        None => None,
    };
    Ok(SpectatorBound {
        bound: 2.0 * f_m / (delta_m - g),
        gap_bound,
    })
}

/// Rough PA coupling reachable with drive amplitude `v` on a trap biased
/// at `v_trap`: `g_1 ~ (V / V_T) w_1 / 4`.
pub fn pa_feasibility(v: f64, v_trap: f64, omega1: f64) -> Result<f64> {
    require_non_negative("v", v)?;
    require_positive("v_trap", v_trap)?;
    require_positive("omega1", omega1)?;
    Ok(v / v_trap * omega1 / 4.0)
}

/// Spin decoherence rates; derived combinations are always recomputed.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DecoherenceRates {
    /// Elastic dephasing, 1/s.
    pub gamma_el: f64,
    /// Spin flips up -> down, 1/s.
    pub gamma_ud: f64,
    /// Spin flips down -> up, 1/s.
    pub gamma_du: f64,
}

impl DecoherenceRates {
    pub fn new(gamma_el: f64, gamma_ud: f64, gamma_du: f64) -> Result<Self> {
        let rates = DecoherenceRates {
            gamma_el,
            gamma_ud,
            gamma_du,
        };
        rates.validate()?;
        Ok(rates)
    }

    /// Elastic and Raman rates with the Raman part split evenly (gamma = 0).
    pub fn symmetric(gamma_el: f64, gamma_r: f64) -> Result<Self> {
        Self::new(gamma_el, gamma_r / 2.0, gamma_r / 2.0)
    }

    pub fn none() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        require_non_negative("gamma_el", self.gamma_el)?;
        require_non_negative("gamma_ud", self.gamma_ud)?;
        require_non_negative("gamma_du", self.gamma_du)
    }

    /// Total spin-flip rate.
    pub fn gamma_r(&self) -> f64 {
        self.gamma_ud + self.gamma_du
    }

    /// Flip asymmetry `(G_ud - G_du) / 4`.
    pub fn gamma(&self) -> f64 {
        (self.gamma_ud - self.gamma_du) / 4.0
    }

    /// Transverse decay rate `(G_r + G_el) / 2`.
    pub fn big_gamma(&self) -> f64 {
        (self.gamma_r() + self.gamma_el) / 2.0
    }

    /// All rates multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        DecoherenceRates {
            gamma_el: self.gamma_el * factor,
            gamma_ud: self.gamma_ud * factor,
            gamma_du: self.gamma_du * factor,
        }
    }
}
