//! Semi-analytic simulator for trapped-ion spin-phonon dynamics under a
//! spin-dependent force (SDF) combined with parametric amplification (PA) of
//! the motional modes.
//!
//! The crate is organised by physical subsystem:
//!
//! * [`ion_crystal`] - equilibrium positions and transverse normal modes of a
//!   linear chain, Lamb-Dicke diagnostic.
//! * [`drive_model`] - drive parameters, Bogoliubov transformation, single-loop
//!   quantities and closed-form sensitivities.
//! * [`phase_space`] - coherent-displacement trajectories with and without the
//!   counter-rotating terms, geometric phase extraction, effective squeezing.
//! * [`spin_squeezing`] - exact dissipative Ising correlators and the Ramsey
//!   squeezing parameter.
//! * [`gate_designer`] - multi-ion two-qubit gate infidelity, power and
//!   error-budget analysis.
//!
//! All frequencies are angular (rad/s) and all times in seconds unless a name
//! says otherwise.

pub mod drive_model;
pub mod error;
pub mod gate_designer;
pub mod ion_crystal;
pub mod numerics;
pub mod ode;
pub mod phase_space;
pub mod rng;
pub mod spin_squeezing;

pub use error::{Error, Result};

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Atomic mass unit, kg.
pub const AMU: f64 = 1.660_539_066_60e-27;

pub const TWO_PI: f64 = std::f64::consts::TAU;

/// Converts an ordinary frequency in Hz to angular frequency in rad/s.
pub fn hz_to_angular(hz: f64) -> f64 {
    TWO_PI * hz
}

/// Converts an angular frequency in rad/s to an ordinary frequency in Hz.
pub fn angular_to_hz(rad_per_s: f64) -> f64 {
    rad_per_s / TWO_PI
}
