//! Experiment configuration as read from JSON. Frequencies are ordinary (Hz),
//! times in seconds and angles in degrees; everything is converted to
//! angular units and radians when resolved into core types.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use ionpa_core::drive_model::{Coupling, DecoherenceRates, DriveParams, PaStrength};
use ionpa_core::ion_crystal::TrapConfig;
use ionpa_core::ode::IntegratorConfig;
use ionpa_core::phase_space::{Dynamics, SEffProtocol};
use ionpa_core::{hz_to_angular, AMU, ELEMENTARY_CHARGE};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Modes,
    Trajectory,
    Phase,
    SeffSweep,
    SqueezingSweep,
    GateSweep,
    Sensitivity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trap: Option<TrapSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive: Option<DriveSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<RatesSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<TrajectorySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<PhaseSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seff: Option<SEffSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub squeezing: Option<SqueezingSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate: Option<GateSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensitivity: Option<SensitivitySection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepAxis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McSection>,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    pub output: OutputSection,
}

fn default_mass() -> f64 {
    171.0
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapSection {
    pub n_ions: usize,
    pub omega_t_hz: f64,
    pub omega_ax_hz: f64,
    #[serde(default = "default_mass")]
    pub mass_amu: f64,
    /// Ion charge in elementary charges.
    #[serde(default = "one")]
    pub charge_e: f64,
    pub d_t_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_k_per_m: Option<f64>,
}

impl TrapSection {
    pub fn resolve(&self) -> TrapConfig {
        TrapConfig {
            n_ions: self.n_ions,
            omega_t: hz_to_angular(self.omega_t_hz),
            omega_ax: hz_to_angular(self.omega_ax_hz),
            mass: self.mass_amu * AMU,
            charge: self.charge_e * ELEMENTARY_CHARGE,
            d_t: self.d_t_m,
            eta1: self.eta1,
            delta_k: self.delta_k_per_m,
        }
    }
}

/// SDF and PA drive. Exactly one of `f_hz` / `force_n`, one of `mu_hz` /
/// `detuning_hz` (measured from the c.o.m. mode) and at most one of `g_hz` /
/// `pa_volts`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub force_n: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detuning_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pa_volts: Option<f64>,
    #[serde(default)]
    pub theta_deg: f64,
    #[serde(default)]
    pub mode_dependent_g: bool,
}

impl DriveSection {
    pub fn resolve(&self, trap: &TrapConfig) -> Result<DriveParams, CliError> {
        let coupling = match (self.f_hz, self.force_n) {
            (Some(f), None) => Coupling::Direct { f: hz_to_angular(f) },
            (None, Some(force)) => Coupling::Force { force },
            _ => return Err(CliError::config("drive.f_hz", "give exactly one of f_hz and force_n")),
        };
        let mu = match (self.mu_hz, self.detuning_hz) {
            (Some(mu), None) => hz_to_angular(mu),
            (None, Some(d)) => trap.omega_t + hz_to_angular(d),
            _ => return Err(CliError::config("drive.mu_hz", "give exactly one of mu_hz and detuning_hz")),
        };
        let pa = match (self.g_hz, self.pa_volts) {
            (Some(g), None) => PaStrength::Direct { g: hz_to_angular(g) },
            (None, Some(volts)) => PaStrength::Voltage { volts },
            (None, None) => PaStrength::Direct { g: 0.0 },
            _ => return Err(CliError::config("drive.g_hz", "give at most one of g_hz and pa_volts")),
        };
        Ok(DriveParams {
            coupling,
            mu,
            pa,
            theta: self.theta_deg.to_radians(),
            mode_dependent_g: self.mode_dependent_g,
        })
    }
}

/// Spin decoherence rates in 1/s, or in units of the Ising coupling `J`
/// when `in_units_of_j` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesSection {
    #[serde(default)]
    pub gamma_el: f64,
    #[serde(default)]
    pub gamma_ud: f64,
    #[serde(default)]
    pub gamma_du: f64,
    #[serde(default)]
    pub in_units_of_j: bool,
}

impl RatesSection {
    pub fn resolve(&self, j: f64) -> Result<DecoherenceRates, CliError> {
        let k = if self.in_units_of_j { j } else { 1.0 };
        DecoherenceRates::new(k * self.gamma_el, k * self.gamma_ud, k * self.gamma_du)
            .map_err(|e| CliError::from_core("rates", e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySection {
    pub t_end_s: f64,
    pub samples: usize,
    #[serde(default = "rwa")]
    pub dynamics: Dynamics,
    /// Spin eigenvalue (+1 or -1) of each ion.
    pub branch: Vec<i8>,
}

fn rwa() -> Dynamics {
    Dynamics::Rwa
}

fn full() -> Dynamics {
    Dynamics::Full
}

/// Single-loop phase of every mode, integrated over `loops` of its own
/// period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSection {
    #[serde(default = "rwa")]
    pub dynamics: Dynamics,
    #[serde(default = "one_loop")]
    pub loops: u32,
}

fn one_loop() -> u32 {
    1
}

fn quarter_pi() -> f64 {
    std::f64::consts::FRAC_PI_4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SEffSection {
    pub tau_s: f64,
    pub g_hz: f64,
    pub omega1_hz: f64,
    #[serde(default = "quarter_pi")]
    pub phi_target: f64,
    #[serde(default)]
    pub protocol: SEffProtocol,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SqueezingSection {
    pub n_spins: usize,
    pub j_hz: f64,
    /// Effective squeezing; rates scale by it relative to `J`.
    #[serde(default = "one")]
    pub s_eff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSection {
    pub tau_s: f64,
    pub g_hz: f64,
    /// Defaults to `N pi / 4`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_target: Option<f64>,
    pub pair: (usize, usize),
    #[serde(default = "full")]
    pub dynamics: Dynamics,
    #[serde(default)]
    pub mode_dependent_g: bool,
    #[serde(default = "one_percent")]
    pub timing_fraction: f64,
}

fn one_percent() -> f64 {
    0.01
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SensitivityKind {
    /// Deterministic phase error `theta_deg` on the squeezing optimum.
    Theta,
    /// Gaussian phase noise `sigma_theta_deg` (Monte Carlo).
    ThetaNoise,
    /// Relative detuning error on the squeezing.
    SqueezingDelta,
    /// Gaussian detuning noise `sigma_delta_hz` on the gate (Monte Carlo).
    GateDelta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensitivitySection {
    pub kind: SensitivityKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_theta_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_delta_over_delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_delta_hz: Option<f64>,
    /// Squeezing of the mediating mode for the phase dependence of `J`.
    #[serde(default = "one")]
    pub mode_squeeze: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Lin,
    Log,
}

/// One sweep axis over a numeric config field given by a dotted path such
/// as `gate.g_hz`. Several axes form a row-major grid, first axis slowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub variable: String,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl SweepAxis {
    pub fn values(&self) -> Vec<f64> {
        match self.scale {
            Scale::Lin => ionpa_core::numerics::linspace(self.lo, self.hi, self.points),
            Scale::Log => ionpa_core::numerics::logspace(self.lo, self.hi, self.points),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    pub n_samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: PathBuf,
    #[serde(default)]
    pub format: Format,
}

/// Parses a config, reporting the offending field path on failure.
pub fn parse(text: &str) -> Result<ExperimentConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::config(&path, e.into_inner().to_string())
    })
}

pub fn to_value(cfg: &ExperimentConfig) -> Value {
    serde_json::to_value(cfg).expect("config serializes")
}

fn field_mut<'a>(root: &'a mut Value, path: &str) -> Option<&'a mut Value> {
    path.split('.').try_fold(root, |v, key| v.get_mut(key))
}

/// One point of the sweep grid: the axis values and the config they produce.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub coords: Vec<f64>,
    pub config: ExperimentConfig,
}

/// Expands the sweep grid. Integer fields take the rounded axis value, which
/// is also what the point reports.
pub fn expand(cfg: &ExperimentConfig) -> Result<Vec<SweepPoint>, CliError> {
    let base = to_value(cfg);
    let mut axes = Vec::with_capacity(cfg.sweep.len());
    for (k, axis) in cfg.sweep.iter().enumerate() {
        let at = format!("sweep[{k}]");
        if axis.points == 0 {
            return Err(CliError::config(&format!("{at}.points"), "must be >= 1"));
        }
        if !(axis.lo.is_finite() && axis.hi.is_finite()) {
            return Err(CliError::config(&at, "lo and hi must be finite"));
        }
        if axis.scale == Scale::Log && !(axis.lo > 0.0 && axis.hi > 0.0) {
            return Err(CliError::config(&at, "log axis needs lo, hi > 0"));
        }
        let mut probe = base.clone();
        let integer = match field_mut(&mut probe, &axis.variable) {
            Some(Value::Number(n)) => n.is_u64() || n.is_i64(),
            Some(_) => {
                return Err(CliError::config(
                    &format!("{at}.variable"),
                    format!("`{}` is not a numeric field", axis.variable),
                ))
            }
            None => {
                return Err(CliError::config(
                    &format!("{at}.variable"),
                    format!("no config field `{}`", axis.variable),
                ))
            }
        };
        let values: Vec<f64> = if integer {
            axis.values().into_iter().map(f64::round).collect()
        } else {
            axis.values()
        };
        axes.push((axis.variable.as_str(), integer, values));
    }

    let total: usize = axes.iter().map(|a| a.2.len()).product();
    let mut points = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rem = flat;
        let mut coords = vec![0.0; axes.len()];
        for (k, axis) in axes.iter().enumerate().rev() {
            coords[k] = axis.2[rem % axis.2.len()];
            rem /= axis.2.len();
        }
        let mut v = base.clone();
        for ((path, integer, _), &x) in axes.iter().zip(&coords) {
            let slot = field_mut(&mut v, path).expect("checked above");
            *slot = if *integer {
                if x < 0.0 {
                    return Err(CliError::config(path, "integer field swept below zero"));
                }
                Value::from(x as u64)
            } else {
                Value::from(x)
            };
        }
        let config: ExperimentConfig = serde_json::from_value(v).map_err(|e| CliError::config("sweep", e.to_string()))?;
        points.push(SweepPoint { coords, config });
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "task": "modes",
        "trap": {"n_ions": 3, "omega_t_hz": 3.0e6, "omega_ax_hz": 0.5e6, "d_t_m": 2.5e-4},
        "sweep": [
            {"variable": "trap.n_ions", "lo": 2, "hi": 4, "points": 3},
            {"variable": "trap.omega_ax_hz", "lo": 1e5, "hi": 1e6, "points": 2, "scale": "log"}
        ],
        "output": {"path": "modes.csv"}
    }"#;

    #[test]
    fn grid_is_row_major() {
        let cfg = parse(MINIMAL).unwrap();
        let pts = expand(&cfg).unwrap();
        let coords: Vec<Vec<f64>> = pts.iter().map(|p| p.coords.clone()).collect();
        assert_eq!(coords, vec![
            vec![2.0, 1e5],
            vec![2.0, 1e6],
            vec![3.0, 1e5],
            vec![3.0, 1e6],
            vec![4.0, 1e5],
            vec![4.0, 1e6],
        ]);
        assert_eq!(pts[4].config.trap.as_ref().unwrap().n_ions, 4);
    }

    #[test]
    fn unknown_field_is_named() {
        let err = parse(&MINIMAL.replace("d_t_m", "dt")).unwrap_err();
        assert_eq!(err.field(), Some("trap.dt"));
        let err = parse(&MINIMAL.replace("\"n_ions\": 3", "\"n_ions\": -3")).unwrap_err();
        assert_eq!(err.field(), Some("trap.n_ions"));
    }

    #[test]
    fn sweep_must_name_a_numeric_field() {
        let cfg = parse(&MINIMAL.replace("trap.omega_ax_hz", "trap.mass")).unwrap();
        assert_eq!(expand(&cfg).unwrap_err().field(), Some("sweep[1].variable"));
    }

    #[test]
    fn units_convert_at_the_boundary() {
        let cfg = parse(MINIMAL).unwrap();
        let trap = cfg.trap.unwrap().resolve();
        assert_eq!(trap.omega_t, hz_to_angular(3.0e6));
        let drive = DriveSection {
            f_hz: Some(1e3),
            force_n: None,
            mu_hz: None,
            detuning_hz: Some(2e4),
            g_hz: None,
            pa_volts: None,
            theta_deg: 18.0,
            mode_dependent_g: false,
        }
        .resolve(&trap)
        .unwrap();
        assert_eq!(drive.mu, trap.omega_t + hz_to_angular(2e4));
        assert!((drive.theta - 0.1 * std::f64::consts::PI).abs() < 1e-15);
    }
}
