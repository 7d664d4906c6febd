//! Casimir energy between two plasma-model mirrors, and its split into
//! plasmonic (surface-plasmon-derived) and photonic cavity-mode
//! contributions.
//!
//! All physics is carried out in dimensionless units where lengths are
//! measured in the mirror separation `L` and frequencies in `c / L`. The
//! only material parameter is then `Omega_P = omega_P L / c`. Energies are
//! reported as correction factors `eta`, ratios to the ideal-mirror energy
//! `-hbar c pi^2 A / (720 L^3)`.
//!
//! * [`numerics`]: quadrature, root finding and power-law fits.
//! * [`optics`]: plasma permittivity and imaginary-axis reflection.
//! * [`lifshitz`]: the total energy and its reduction factor `eta_E`.
//! * [`modes`]: cavity dispersion branches and photonic modes.
//! * [`decomposition`]: `eta_pl`, `eta_ph`, `eta_ev` and their asymptotics.
//! * [`verify`]: the built-in invariant suite.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod decomposition;
pub mod error;
pub mod lifshitz;
pub mod modes;
pub mod numerics;
pub mod optics;
pub mod parallel;
pub mod verify;

pub use error::{Error, Result};
pub use parallel::Execution;

/// CODATA 2018 exact/recommended values, SI units.
pub mod constants {
    /// Speed of light in vacuum, m/s.
    pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
    /// Reduced Planck constant, J s.
    pub const HBAR: f64 = 1.054_571_817e-34;
}
