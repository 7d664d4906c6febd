//! Plasma-model optics: permittivity, imaginary-axis reflection amplitudes
//! and light-cone sectors.
//!
//! Frequencies and wavevectors are dimensionless, measured in units of
//! `c / L`: `Omega = omega L / c`, `Xi = xi L / c`, `K = |k| L`, and
//! `Omega_P = omega_P L / c = 2 pi L / lambda_P`.

use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use crate::constants::SPEED_OF_LIGHT;
use crate::error::{require_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Polarization {
    TE,
    TM,
}

impl Polarization {
    pub const ALL: [Polarization; 2] = [Polarization::TE, Polarization::TM];

    pub fn as_str(self) -> &'static str {
        match self {
            Polarization::TE => "TE",
            Polarization::TM => "TM",
        }
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A lossless plasma-model metal, described by its plasma frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlasmaMirror {
    omega_p: f64,
}

impl PlasmaMirror {
    /// `omega_p` in rad/s.
    pub fn from_plasma_frequency(omega_p: f64) -> Result<Self> {
        require_positive("plasma frequency", omega_p)?;
        Ok(Self { omega_p })
    }

    /// `lambda_p` in metres.
    pub fn from_plasma_wavelength(lambda_p: f64) -> Result<Self> {
        require_positive("plasma wavelength", lambda_p)?;
        Ok(Self {
            omega_p: 2.0 * PI * SPEED_OF_LIGHT / lambda_p,
        })
    }

    pub fn omega_p(&self) -> f64 {
        self.omega_p
    }

    pub fn lambda_p(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.omega_p
    }
}

/// Two identical plasma mirrors at a given separation, in scaled units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledCavity {
    omega_p_l: f64,
    separation: Option<f64>,
}

impl ScaledCavity {
    pub fn dimensionless(omega_p_l: f64) -> Result<Self> {
        if !(omega_p_l > 0.0 && omega_p_l.is_finite()) {
            return Err(Error::domain("Omega_P must be positive"));
        }
        Ok(Self {
            omega_p_l,
            separation: None,
        })
    }

    pub fn from_l_over_lambda_p(ratio: f64) -> Result<Self> {
        if !(ratio > 0.0 && ratio.is_finite()) {
            return Err(Error::domain("L/lambda_P must be positive"));
        }
        Self::dimensionless(2.0 * PI * ratio)
    }

    /// Cavity of separation `separation` (metres) between two `mirror`s.
    pub fn physical(mirror: &PlasmaMirror, separation: f64) -> Result<Self> {
        require_positive("separation", separation)?;
        let mut cavity = Self::from_l_over_lambda_p(separation / mirror.lambda_p())?;
        cavity.separation = Some(separation);
        Ok(cavity)
    }

    pub fn omega_p_l(&self) -> f64 {
        self.omega_p_l
    }

    pub fn l_over_lambda_p(&self) -> f64 {
        self.omega_p_l / (2.0 * PI)
    }

    pub fn separation(&self) -> Option<f64> {
        self.separation
    }
}

/// Position of a `(K, Omega)` point relative to the light cone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sector {
    Propagative,
    Evanescent,
    Lightcone,
}

impl Sector {
    pub fn as_str(self) -> &'static str {
        match self {
            Sector::Propagative => "propagative",
            Sector::Evanescent => "evanescent",
            Sector::Lightcone => "lightcone",
        }
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

const LIGHTCONE_TOL: f64 = 1e-12;

pub fn classify(k: f64, omega: f64) -> Sector {
    if (omega - k).abs() <= LIGHTCONE_TOL {
        Sector::Lightcone
    } else if omega > k {
        Sector::Propagative
    } else {
        Sector::Evanescent
    }
}

/// `1 - Omega_P^2 / Omega^2` on the real frequency axis.
pub fn permittivity(omega: f64, omega_p: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::domain("permittivity needs Omega > 0"));
    }
    Ok(1.0 - (omega_p / omega).powi(2))
}

/// `1 + Omega_P^2 / Xi^2` at imaginary frequency `i Xi`; always above one.
pub fn permittivity_imag_axis(xi: f64, omega_p: f64) -> Result<f64> {
    if !(xi > 0.0) {
        return Err(Error::domain("imaginary-axis permittivity needs Xi > 0"));
    }
    Ok(1.0 + (omega_p / xi).powi(2))
}

/// Squared reflection amplitude of a semi-infinite plasma half-space at
/// imaginary frequency, for transverse wavevector `k`.
pub fn reflection_sq_imag_axis(pol: Polarization, k: f64, xi: f64, omega_p: f64) -> Result<f64> {
    if !(k >= 0.0) {
        return Err(Error::domain("reflection needs K >= 0"));
    }
    let eps = permittivity_imag_axis(xi, omega_p)?;
    Ok(reflection_sq_unchecked(pol, k, xi, omega_p, eps))
}

#[inline]
pub(crate) fn reflection_sq_unchecked(
    pol: Polarization,
    k: f64,
    xi: f64,
    omega_p: f64,
    eps: f64,
) -> f64 {
    let kappa = xi.hypot(k);
    let kappa_t = kappa.hypot(omega_p);
    let r = match pol {
        Polarization::TE => (kappa - kappa_t) / (kappa + kappa_t),
        Polarization::TM => (eps * kappa - kappa_t) / (eps * kappa + kappa_t),
    };
    r * r
}
