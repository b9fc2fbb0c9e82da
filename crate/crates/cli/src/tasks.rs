//! Per-point validation and evaluation of each task.

use serde::Serialize;
use serde_json::{json, Value};

use ionpa_core::drive_model::{bogoliubov, j_of_theta, DecoherenceRates, DriveParams};
use ionpa_core::gate_designer::{delta_fluctuation, design_point, GateProtocol};
use ionpa_core::ion_crystal::{transverse_modes, NormalModeSet, TrapConfig};
use ionpa_core::phase_space::{integrate_full, mode_phase, rwa_region, s_eff, ModeParams, SpinBranch};
use ionpa_core::spin_squeezing::{delta_sensitivity, minimize_xi, theta_sensitivity, theta_shift};
use ionpa_core::{angular_to_hz, hz_to_angular, TWO_PI};

use crate::config::{ExperimentConfig, GateSection, SensitivityKind, SqueezingSection, Task};
use crate::error::CliError;

/// One output cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Num(x) => write!(f, "{x:e}"),
            Cell::Int(k) => write!(f, "{k}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(k: usize) -> Self {
        Cell::Int(k as i64)
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Text(b.to_string())
    }
}

/// Rows produced by one sweep point, plus an optional per-point JSON record.
#[derive(Debug, Clone, Default)]
pub struct PointOutput {
    pub rows: Vec<Vec<Cell>>,
    pub extra: Option<Value>,
}

/// Core objects resolved (and validated) from one point's config.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub trap: Option<TrapConfig>,
    pub modes: Option<NormalModeSet>,
    pub drive: Option<DriveParams>,
    pub rates: DecoherenceRates,
}

fn need<'a, T>(section: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
    section
        .as_ref()
        .ok_or_else(|| CliError::config(name, "section required by this task"))
}

fn positive(field: &str, x: f64) -> Result<(), CliError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(CliError::config(field, format!("must be finite and > 0, got {x}")))
    }
}

fn non_negative(field: &str, x: f64) -> Result<(), CliError> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(CliError::config(field, format!("must be finite and >= 0, got {x}")))
    }
}

fn check_squeezing(sq: &SqueezingSection) -> Result<(), CliError> {
    if sq.n_spins < 2 {
        return Err(CliError::config("squeezing.n_spins", "need at least 2 spins"));
    }
    positive("squeezing.j_hz", sq.j_hz)?;
    if !(sq.s_eff > 0.0 && sq.s_eff <= 1.0) {
        return Err(CliError::config("squeezing.s_eff", "must lie in (0, 1]"));
    }
    Ok(())
}

fn check_gate(gate: &GateSection, n_ions: usize) -> Result<(), CliError> {
    positive("gate.tau_s", gate.tau_s)?;
    non_negative("gate.g_hz", gate.g_hz)?;
    non_negative("gate.timing_fraction", gate.timing_fraction)?;
    if let Some(phi) = gate.phi_target {
        positive("gate.phi_target", phi)?;
    }
    let (i, j) = gate.pair;
    if i == j || i >= n_ions || j >= n_ions {
        return Err(CliError::config(
            "gate.pair",
            format!("need two distinct ions below {n_ions}, got ({i}, {j})"),
        ));
    }
    Ok(())
}

/// Checks everything the task needs without running it.
pub fn resolve(cfg: &ExperimentConfig) -> Result<Resolved, CliError> {
    cfg.integrator
        .validate()
        .map_err(|e| CliError::from_core("integrator", e))?;
    let needs_trap = matches!(cfg.task, Task::Modes | Task::Trajectory | Task::Phase | Task::GateSweep)
        || (cfg.task == Task::Sensitivity
            && cfg.sensitivity.as_ref().is_some_and(|s| s.kind == SensitivityKind::GateDelta));
    let needs_drive = matches!(cfg.task, Task::Trajectory | Task::Phase);

    let (trap, modes) = if needs_trap {
        let trap = need(&cfg.trap, "trap")?.resolve();
        trap.validate().map_err(|e| CliError::from_core("trap", e))?;
        let modes = transverse_modes(&trap).map_err(|e| CliError::from_core("trap", e))?;
        (Some(trap), Some(modes))
    } else {
        (None, None)
    };
    let drive = if needs_drive {
        let (trap, modes) = (trap.as_ref().unwrap(), modes.as_ref().unwrap());
        let drive = need(&cfg.drive, "drive")?.resolve(trap)?;
        drive
            .validate(modes, trap)
            .map_err(|e| CliError::from_core("drive", e))?;
        Some(drive)
    } else {
        None
    };

    let j = cfg.squeezing.as_ref().map_or(1.0, |s| hz_to_angular(s.j_hz));
    let rates = match &cfg.rates {
        Some(r) => r.resolve(j)?,
        None => DecoherenceRates::none(),
    };

    match cfg.task {
        Task::Modes | Task::Phase => {}
        Task::Trajectory => {
            let tr = need(&cfg.trajectory, "trajectory")?;
            positive("trajectory.t_end_s", tr.t_end_s)?;
            if tr.samples < 2 {
                return Err(CliError::config("trajectory.samples", "need at least 2 samples"));
            }
            SpinBranch::new(modes.as_ref().unwrap(), &tr.branch)
                .map_err(|e| CliError::config("trajectory.branch", e.to_string()))?;
        }
        Task::SeffSweep => {
            let s = need(&cfg.seff, "seff")?;
            positive("seff.tau_s", s.tau_s)?;
            non_negative("seff.g_hz", s.g_hz)?;
            positive("seff.omega1_hz", s.omega1_hz)?;
            positive("seff.phi_target", s.phi_target)?;
        }
        Task::SqueezingSweep => check_squeezing(need(&cfg.squeezing, "squeezing")?)?,
        Task::GateSweep => check_gate(need(&cfg.gate, "gate")?, trap.as_ref().unwrap().n_ions)?,
        Task::Sensitivity => {
            let s = need(&cfg.sensitivity, "sensitivity")?;
            let sigma = |name: &str, v: Option<f64>| -> Result<f64, CliError> {
                let field = format!("sensitivity.{name}");
                let v = v.ok_or_else(|| CliError::config(&field, "required for this kind"))?;
                non_negative(&field, v)?;
                Ok(v)
            };
            if !(s.mode_squeeze > 0.0 && s.mode_squeeze <= 1.0) {
                return Err(CliError::config("sensitivity.mode_squeeze", "must lie in (0, 1]"));
            }
            match s.kind {
                SensitivityKind::Theta => {
                    check_squeezing(need(&cfg.squeezing, "squeezing")?)?;
                    let t = s
                        .theta_deg
                        .ok_or_else(|| CliError::config("sensitivity.theta_deg", "required for this kind"))?;
                    if !t.is_finite() {
                        return Err(CliError::config("sensitivity.theta_deg", "must be finite"));
                    }
                }
                SensitivityKind::ThetaNoise => {
                    check_squeezing(need(&cfg.squeezing, "squeezing")?)?;
                    sigma("sigma_theta_deg", s.sigma_theta_deg)?;
                }
                SensitivityKind::SqueezingDelta => {
                    check_squeezing(need(&cfg.squeezing, "squeezing")?)?;
                    sigma("sigma_delta_over_delta", s.sigma_delta_over_delta)?;
                }
                SensitivityKind::GateDelta => {
                    check_gate(need(&cfg.gate, "gate")?, trap.as_ref().unwrap().n_ions)?;
                    sigma("sigma_delta_hz", s.sigma_delta_hz)?;
                }
            }
            if matches!(s.kind, SensitivityKind::ThetaNoise | SensitivityKind::GateDelta) {
                let mc = need(&cfg.mc, "mc")?;
                if mc.n_samples < 2 {
                    return Err(CliError::config("mc.n_samples", "need at least 2 samples"));
                }
            }
        }
    }
    Ok(Resolved { trap, modes, drive, rates })
}

/// Column names of the task's rows.
pub fn columns(cfg: &ExperimentConfig) -> Vec<&'static str> {
    match cfg.task {
        Task::Modes => vec!["mode", "omega_hz", "z0_m", "participation"],
        Task::Trajectory => vec!["t_s", "mode", "alpha_re", "alpha_im", "beta_re", "beta_im", "phi"],
        Task::Phase => vec![
            "mode",
            "omega_hz",
            "delta_hz",
            "g_hz",
            "f_hz",
            "squeeze",
            "delta_prime_hz",
            "period_s",
            "phi_closed_form",
            "phi_numeric",
            "rwa_shift_hz",
            "region",
        ],
        Task::SeffSweep => vec![
            "tau_s",
            "g_hz",
            "s_eff",
            "s_rwa",
            "inv_s2_eff",
            "inv_s2",
            "delta_hz",
            "t_min_s",
            "f_hz",
            "f_sdf_hz",
            "rwa_shift_hz",
            "delta_prime_hz",
            "region",
        ],
        Task::SqueezingSweep => vec![
            "n_spins", "j_hz", "s_eff", "gamma_el", "gamma_ud", "gamma_du", "xi2", "xi2_db", "t_opt_s", "psi_opt",
            "contrast",
        ],
        Task::GateSweep => vec![
            "g_hz",
            "fidelity",
            "fidelity_with_timing_err",
            "f_required_hz",
            "t_opt_s",
            "delta_hz",
            "t_loop_s",
            "eps0",
            "timing_worst",
        ],
        Task::Sensitivity => match cfg.sensitivity.as_ref().map(|s| s.kind) {
            Some(SensitivityKind::Theta) => vec!["n_spins", "s_eff", "theta_deg", "xi2", "t_opt_s", "xi2_shift", "quartic_estimate"],
            Some(SensitivityKind::ThetaNoise) => vec![
                "n_spins",
                "s_eff",
                "sigma_theta_deg",
                "xi2",
                "mean_shift",
                "std_shift",
                "analytic_mean",
            ],
            Some(SensitivityKind::SqueezingDelta) => vec!["n_spins", "sigma_delta_over_delta", "dj_over_j", "dxi2", "valid"],
            Some(SensitivityKind::GateDelta) | None => vec![
                "g_hz",
                "sigma_delta_hz",
                "t_opt_s",
                "fidelity",
                "analytic_mean",
                "analytic_std",
                "mc_mean",
                "mc_std",
                "total_fidelity",
            ],
        },
    }
}

fn gate_protocol(cfg: &ExperimentConfig, res: &Resolved) -> GateProtocol {
    let gate = cfg.gate.as_ref().unwrap();
    GateProtocol {
        trap: res.trap.clone().unwrap(),
        tau: gate.tau_s,
        phi_target: gate.phi_target,
        pair: gate.pair,
        dynamics: gate.dynamics,
        mode_dependent_g: gate.mode_dependent_g,
        timing_fraction: gate.timing_fraction,
        integrator: cfg.integrator,
    }
}

fn squeezing_inputs(cfg: &ExperimentConfig, res: &Resolved) -> (f64, DecoherenceRates, usize, f64) {
    let sq = cfg.squeezing.as_ref().unwrap();
    (hz_to_angular(sq.j_hz), res.rates.scaled(sq.s_eff), sq.n_spins, sq.s_eff)
}

/// Runs one point.
pub fn evaluate(cfg: &ExperimentConfig, res: &Resolved) -> ionpa_core::Result<PointOutput> {
    let mut out = PointOutput::default();
    match cfg.task {
        Task::Modes => {
            let m = res.modes.as_ref().unwrap();
            for k in 0..m.len() {
                let u: Vec<String> = m.u.column(k).iter().map(|x| format!("{x:e}")).collect();
                out.rows.push(vec![
                    (k + 1).into(),
                    angular_to_hz(m.omega[k]).into(),
                    m.z0[k].into(),
                    u.join(";").into(),
                ]);
            }
        }
        Task::Trajectory => {
            let tr = cfg.trajectory.as_ref().unwrap();
            let (trap, modes) = (res.trap.as_ref().unwrap(), res.modes.as_ref().unwrap());
            let branch = SpinBranch::new(modes, &tr.branch)?;
            let rec = integrate_full(
                res.drive.as_ref().unwrap(),
                modes,
                trap,
                &branch,
                tr.t_end_s,
                tr.samples,
                tr.dynamics,
                &cfg.integrator,
            )?;
            for (i, &t) in rec.t.iter().enumerate() {
                for (m, traj) in rec.modes.iter().enumerate() {
                    let (a, b) = (traj.alpha[i], traj.beta_ip[i]);
                    out.rows.push(vec![t.into(), (m + 1).into(), a.re.into(), a.im.into(), b.re.into(), b.im.into(), traj.phi[i].into()]);
                }
            }
        }
        Task::Phase => {
            let ph = cfg.phase.clone().unwrap_or(crate::config::PhaseSection {
                dynamics: ionpa_core::phase_space::Dynamics::Rwa,
                loops: 1,
            });
            let (trap, modes, drive) = (res.trap.as_ref().unwrap(), res.modes.as_ref().unwrap(), res.drive.as_ref().unwrap());
            let set = drive.bogoliubov_set(modes, trap)?;
            for (m, e) in set.entries.iter().enumerate() {
                let b = &e.transform;
                let period = TWO_PI / b.delta_prime;
                let t_end = ph.loops as f64 * period;
                let closed = 2.0 * j_of_theta(e.f, b.delta, b.g, drive.theta)? * t_end;
                let p = ModeParams {
                    f: e.f,
                    delta: b.delta,
                    g: b.g,
                    theta: drive.theta,
                    mu: drive.mu,
                    s: 1.0,
                };
                let numeric = mode_phase(&p, ph.dynamics, t_end, &cfg.integrator)?;
                out.rows.push(vec![
                    (m + 1).into(),
                    angular_to_hz(e.omega).into(),
                    angular_to_hz(b.delta).into(),
                    angular_to_hz(b.g).into(),
                    angular_to_hz(e.f).into(),
                    b.squeeze.into(),
                    angular_to_hz(b.delta_prime).into(),
                    period.into(),
                    closed.into(),
                    numeric.into(),
                    angular_to_hz(b.rwa_shift).into(),
                    rwa_region(b.g, b.delta, drive.mu)?.to_string().into(),
                ]);
            }
        }
        Task::SeffSweep => {
            let s = cfg.seff.as_ref().unwrap();
            let r = s_eff(
                hz_to_angular(s.g_hz),
                s.tau_s,
                hz_to_angular(s.omega1_hz),
                s.phi_target,
                s.protocol,
                &cfg.integrator,
            )?;
            out.rows.push(vec![
                s.tau_s.into(),
                s.g_hz.into(),
                r.s_eff.into(),
                r.s_rwa.into(),
                (1.0 / (r.s_eff * r.s_eff)).into(),
                (1.0 / (r.s_rwa * r.s_rwa)).into(),
                angular_to_hz(r.delta).into(),
                r.t_min.into(),
                angular_to_hz(r.f).into(),
                angular_to_hz(r.f_sdf).into(),
                angular_to_hz(r.rwa_shift).into(),
                angular_to_hz(r.delta_prime).into(),
                r.region.to_string().into(),
            ]);
        }
        Task::SqueezingSweep => {
            let (j, rates, n, s) = squeezing_inputs(cfg, res);
            let r = minimize_xi(j, &rates, n)?;
            out.rows.push(vec![
                n.into(),
                angular_to_hz(j).into(),
                s.into(),
                rates.gamma_el.into(),
                rates.gamma_ud.into(),
                rates.gamma_du.into(),
                r.xi2.into(),
                (10.0 * r.xi2.log10()).into(),
                r.t_opt.into(),
                r.psi_opt.into(),
                r.contrast.into(),
            ]);
        }
        Task::GateSweep => {
            let protocol = gate_protocol(cfg, res);
            let g = cfg.gate.as_ref().unwrap().g_hz;
            let r = design_point(&protocol, res.modes.as_ref().unwrap(), hz_to_angular(g))?;
            out.rows.push(vec![
                g.into(),
                r.fidelity.into(),
                r.fidelity_with_timing_error.into(),
                angular_to_hz(r.f_required).into(),
                r.t_opt.into(),
                angular_to_hz(r.delta).into(),
                r.t_loop.into(),
                r.eps0.into(),
                r.budget["timing_worst"].into(),
            ]);
            out.extra = Some(json!({
                "g_hz": g,
                "fidelity": r.fidelity,
                "t_opt_s": r.t_opt,
                "budget": r.budget,
                "branch": r.branch,
            }));
        }
        Task::Sensitivity => {
            let s = cfg.sensitivity.as_ref().unwrap();
            match s.kind {
                SensitivityKind::Theta => {
                    let (j, rates, n, se) = squeezing_inputs(cfg, res);
                    let theta = s.theta_deg.unwrap().to_radians();
                    let base = minimize_xi(j, &rates, n)?;
                    let shift = theta_shift(j, &rates, n, s.mode_squeeze, theta, &base)?;
                    out.rows.push(vec![
                        n.into(),
                        se.into(),
                        s.theta_deg.unwrap().into(),
                        base.xi2.into(),
                        base.t_opt.into(),
                        shift.into(),
                        (theta.powi(4) / 16.0).into(),
                    ]);
                }
                SensitivityKind::ThetaNoise => {
                    let (j, rates, n, se) = squeezing_inputs(cfg, res);
                    let mc = cfg.mc.as_ref().unwrap();
                    let sigma = s.sigma_theta_deg.unwrap();
                    let r = theta_sensitivity(j, &rates, n, s.mode_squeeze, sigma.to_radians(), mc.n_samples, mc.seed)?;
                    out.rows.push(vec![
                        n.into(),
                        se.into(),
                        sigma.into(),
                        r.baseline.xi2.into(),
                        r.mean_shift.into(),
                        r.std_shift.into(),
                        r.analytic_mean.into(),
                    ]);
                }
                SensitivityKind::SqueezingDelta => {
                    let (j, rates, n, _) = squeezing_inputs(cfg, res);
                    let x = s.sigma_delta_over_delta.unwrap();
                    let r = delta_sensitivity(j, &rates, n, x, s.mode_squeeze)?;
                    out.rows.push(vec![n.into(), x.into(), r.dj_over_j.into(), r.dxi2.into(), r.valid.into()]);
                }
                SensitivityKind::GateDelta => {
                    let protocol = gate_protocol(cfg, res);
                    let modes = res.modes.as_ref().unwrap();
                    let g_hz = cfg.gate.as_ref().unwrap().g_hz;
                    let g = hz_to_angular(g_hz);
                    let point = design_point(&protocol, modes, g)?;
                    let (spec, _) = protocol.spec(modes, g)?;
                    let mc = cfg.mc.as_ref().unwrap();
                    let sigma_hz = s.sigma_delta_hz.unwrap();
                    let d = delta_fluctuation(&spec, point.t_opt, hz_to_angular(sigma_hz), mc.n_samples, mc.seed)?;
                    out.rows.push(vec![
                        g_hz.into(),
                        sigma_hz.into(),
                        point.t_opt.into(),
                        point.fidelity.into(),
                        d.analytic_mean.into(),
                        d.analytic_std.into(),
                        d.mc_mean.into(),
                        d.mc_std.into(),
                        (point.fidelity + d.analytic_mean).into(),
                    ]);
                }
            }
        }
    }
    Ok(out)
}

/// Derived parameters of the unswept config recorded in the manifest.
pub fn derived(cfg: &ExperimentConfig, res: &Resolved) -> Value {
    let result: ionpa_core::Result<Value> = (|| {
        let mut v = json!({ "rates": res.rates });
        if let (Some(trap), Some(modes)) = (&res.trap, &res.modes) {
            v["mode_frequencies_hz"] = json!(modes.omega.iter().map(|w| angular_to_hz(*w)).collect::<Vec<_>>());
            if let Some(drive) = &res.drive {
                v["bogoliubov"] = json!(drive.bogoliubov_set(modes, trap)?);
            }
            if cfg.gate.is_some() && matches!(cfg.task, Task::GateSweep | Task::Sensitivity) {
                let protocol = gate_protocol(cfg, res);
                let (spec, power) = protocol.spec(modes, hz_to_angular(cfg.gate.as_ref().unwrap().g_hz))?;
                v["bogoliubov"] = json!(spec.drive.bogoliubov_set(modes, trap)?);
                v["power"] = json!(power);
                v["phi_target"] = json!(spec.phi_target);
            }
        }
        if let Some(s) = &cfg.seff {
            let dp = TWO_PI / s.tau_s;
            let g = hz_to_angular(s.g_hz);
            let delta = dp.hypot(g);
            v["bogoliubov"] = json!(bogoliubov(delta, g, 0.0, hz_to_angular(s.omega1_hz) + delta)?);
        }
        Ok(v)
    })();
    result.unwrap_or_else(|e| json!({ "error": e.to_string() }))
}
