//! Adaptive explicit Runge-Kutta integration (Dormand-Prince 5(4) with FSAL
//! and a PI step-size controller) for small fixed-size real systems.
//!
//! Complex equations are integrated by the caller packing real and imaginary
//! parts into the state array.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    DormandPrince54,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on the step size, s. `None` leaves it unbounded.
    #[serde(default)]
    pub max_step: Option<f64>,
    #[serde(default)]
    pub method: Method,
    /// Hard cap on accepted + rejected steps per call.
    #[serde(default = "default_max_steps")]
    pub max_steps: u64,
}

fn default_max_steps() -> u64 {
    500_000_000
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: None,
            method: Method::DormandPrince54,
            max_steps: default_max_steps(),
        }
    }
}

impl IntegratorConfig {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        IntegratorConfig {
            rel_tol,
            abs_tol,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(invalid("rel_tol", "must be > 0"));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(invalid("abs_tol", "must be > 0"));
        }
        if let Some(h) = self.max_step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(invalid("max_step", "must be > 0"));
            }
        }
        Ok(())
    }
}

// Dormand-Prince tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// difference between 5th and embedded 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Step statistics of one integration call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
    pub evaluations: u64,
}

/// Stateful integrator; remembers the last step size so that successive
/// calls over adjacent intervals continue smoothly.
#[derive(Debug, Clone)]
pub struct Integrator<const N: usize> {
    cfg: IntegratorConfig,
    h: Option<f64>,
    err_prev: f64,
}

impl<const N: usize> Integrator<N> {
    pub fn new(cfg: IntegratorConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Integrator {
            cfg,
            h: None,
            err_prev: 1e-4,
        })
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.cfg
    }

    fn error_norm(&self, y: &[f64; N], y_new: &[f64; N], err: &[f64; N]) -> f64 {
        let mut acc = 0.0;
        for i in 0..N {
            let sc = self.cfg.abs_tol + self.cfg.rel_tol * y[i].abs().max(y_new[i].abs());
            let e = err[i] / sc;
            acc += e * e;
        }
        (acc / N as f64).sqrt()
    }

    fn initial_step<F>(&self, rhs: &F, t: f64, y: &[f64; N], f0: &[f64; N], span: f64) -> f64
    where
        F: Fn(f64, &[f64; N], &mut [f64; N]),
    {
        let scale = |i: usize, v: f64| self.cfg.abs_tol + self.cfg.rel_tol * v.abs().max(y[i].abs());
        let rms = |v: &[f64; N], base: &[f64; N]| {
            (v.iter()
                .enumerate()
                .map(|(i, x)| (x / scale(i, base[i])).powi(2))
                .sum::<f64>()
                / N as f64)
                .sqrt()
        };
        let d0 = rms(y, y);
        let d1 = rms(f0, y);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span);
        let mut y1 = [0.0; N];
        for i in 0..N {
            y1[i] = y[i] + h0 * f0[i];
        }
        let mut f1 = [0.0; N];
        rhs(t + h0, &y1, &mut f1);
        let mut diff = [0.0; N];
        for i in 0..N {
            diff[i] = f1[i] - f0[i];
        }
        let d2 = rms(&diff, y) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6 * span)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(span)
    }

    /// Advances `y` from `t0` to `t1` (> t0).
    pub fn integrate<F>(&mut self, rhs: &F, t0: f64, y: &mut [f64; N], t1: f64) -> Result<StepStats>
    where
        F: Fn(f64, &[f64; N], &mut [f64; N]),
    {
        let mut stats = StepStats::default();
        if t1 == t0 {
            return Ok(stats);
        }
        if !(t1 > t0) {
            return Err(Error::IntegratorFailure {
                t: t0,
                reason: format!("end time {t1:e} precedes start {t0:e}"),
            });
        }
        let span = t1 - t0;
        let max_step = self.cfg.max_step.unwrap_or(f64::INFINITY);
        let mut t = t0;
        let mut k1 = [0.0; N];
        rhs(t, y, &mut k1);
        stats.evaluations += 1;
        let mut h = match self.h {
            Some(h) => h,
            None => {
                stats.evaluations += 1;
                self.initial_step(rhs, t, y, &k1, span)
            }
        }
        .min(max_step);

        let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) = ([0.0; N], [0.0; N], [0.0; N], [0.0; N], [0.0; N], [0.0; N]);
        let mut tmp = [0.0; N];
        let mut y_new = [0.0; N];
        let mut err = [0.0; N];

        loop {
            if stats.accepted + stats.rejected >= self.cfg.max_steps {
                return Err(Error::IntegratorFailure {
                    t,
                    reason: format!("step budget of {} exhausted", self.cfg.max_steps),
                });
            }
            let remaining = t1 - t;
            let last = h >= remaining;
            let hs = if last { remaining } else { h };
            if hs <= 1e-14 * t.abs().max(span) && !last {
                return Err(Error::IntegratorFailure {
                    t,
                    reason: format!("step size underflow (h = {hs:e})"),
                });
            }

            for i in 0..N {
                tmp[i] = y[i] + hs * A21 * k1[i];
            }
            rhs(t + C2 * hs, &tmp, &mut k2);
            for i in 0..N {
                tmp[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i]);
            }
            rhs(t + C3 * hs, &tmp, &mut k3);
            for i in 0..N {
                tmp[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            rhs(t + C4 * hs, &tmp, &mut k4);
            for i in 0..N {
                tmp[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            rhs(t + C5 * hs, &tmp, &mut k5);
            for i in 0..N {
                tmp[i] = y[i] + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            let t_new = if last { t1 } else { t + hs };
            rhs(t_new, &tmp, &mut k6);
            for i in 0..N {
                y_new[i] = y[i] + hs * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
            }
            rhs(t_new, &y_new, &mut k7);
            stats.evaluations += 6;
            for i in 0..N {
                err[i] = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            }
            let en = self.error_norm(y, &y_new, &err);
            if !en.is_finite() {
                return Err(Error::IntegratorFailure {
                    t,
                    reason: "non-finite error estimate".into(),
                });
            }

            if en <= 1.0 {
                // PI controller (Hairer & Wanner, beta = 0.04)
                let fac = 0.9 * en.max(1e-10).powf(-0.2 + 0.75 * 0.04) * self.err_prev.powf(0.04);
                let fac = fac.clamp(0.2, 10.0);
                self.err_prev = en.max(1e-4);
                *y = y_new;
                k1 = k7;
                stats.accepted += 1;
                t = t_new;
                let h_next = (hs * fac).min(max_step);
                if last {
                    // keep the controller's proposal, not the truncated step
                    self.h = Some(if hs < h { h } else { h_next });
                    return Ok(stats);
                }
                h = h_next;
            } else {
                stats.rejected += 1;
                let fac = (0.9 * en.powf(-0.2)).max(0.2);
                h = hs * fac;
            }
        }
    }
}
