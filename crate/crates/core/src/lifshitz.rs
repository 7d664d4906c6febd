//! Total Casimir energy of two plasma mirrors.
//!
//! The energy is evaluated with frequencies rotated onto the imaginary
//! axis, where the integrand `ln(1 - r^2 exp(-2 kappa))` is smooth and
//! non-positive. In scaled units
//!
//! ```text
//! eta_E = -180 / pi^4  *  int_0^inf dK K  int_0^inf dXi  sum_pol ln(1 - r_pol^2 exp(-2 kappa)),
//! kappa = sqrt(Xi^2 + K^2),
//! ```
//!
//! normalised so that perfect mirrors (`r^2 = 1`) give exactly one.

use std::cell::Cell;
use std::f64::consts::PI;

use serde::Serialize;

use crate::constants::{HBAR, SPEED_OF_LIGHT};
use crate::error::{require_positive, Result};
use crate::numerics::{
    try_integrate_finite, try_integrate_semi_infinite, Estimate, QuadratureSpec,
};
use crate::optics::{reflection_sq_unchecked, PlasmaMirror, Polarization, ScaledCavity};

/// Plasma mirrors of area `area` (m^2) a distance `separation` (m) apart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalSetup {
    pub mirror: PlasmaMirror,
    pub separation: f64,
    pub area: f64,
    pub hbar: f64,
    pub speed_of_light: f64,
}

impl PhysicalSetup {
    pub fn new(mirror: PlasmaMirror, separation: f64, area: f64) -> Result<Self> {
        require_positive("separation", separation)?;
        require_positive("area", area)?;
        Ok(Self {
            mirror,
            separation,
            area,
            hbar: HBAR,
            speed_of_light: SPEED_OF_LIGHT,
        })
    }

    pub fn cavity(&self) -> Result<ScaledCavity> {
        ScaledCavity::physical(&self.mirror, self.separation)
    }

    /// The parallel-plate treatment assumes `A >> L^2`.
    pub fn area_warning(&self) -> Option<String> {
        let min_area = 100.0 * self.separation * self.separation;
        (self.area < min_area).then(|| {
            format!(
                "area {:.3e} m^2 is below 100 L^2 = {:.3e} m^2; edge effects are not modelled",
                self.area, min_area
            )
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyResult {
    /// Joules; negative means binding.
    pub energy: f64,
    pub eta: f64,
    /// Absolute error estimate on `eta`.
    pub quadrature_error_estimate: f64,
}

/// `-hbar c pi^2 A / (720 L^3)`.
pub fn casimir_ideal_energy(setup: &PhysicalSetup) -> f64 {
    -setup.hbar * setup.speed_of_light * PI.powi(2) * setup.area
        / (720.0 * setup.separation.powi(3))
}

/// Energy corresponding to a given correction factor.
pub fn energy_from_eta(setup: &PhysicalSetup, eta: f64) -> f64 {
    eta * casimir_ideal_energy(setup)
}

const NORMALISATION: f64 = -180.0 / (PI * PI * PI * PI);

/// `sum_pol ln(1 - r^2 exp(-2 kappa))` at dimensionless `(K, Xi)`.
pub fn log_integrand(k: f64, xi: f64, omega_p: f64) -> f64 {
    let eps = 1.0 + (omega_p / xi).powi(2);
    let round_trip = (-2.0 * xi.hypot(k)).exp();
    let value: f64 = Polarization::ALL
        .iter()
        .map(|&pol| (-reflection_sq_unchecked(pol, k, xi, omega_p, eps) * round_trip).ln_1p())
        .sum();
    debug_assert!(
        value <= 0.0 || value.is_nan(),
        "positive log integrand {value} at K={k}, Xi={xi}"
    );
    value
}

/// Splits `[0, inf)` at `min(Omega_P, 1)`, where the plasma response changes scale.
fn half_line<F>(mut f: F, omega_p: f64, spec: &QuadratureSpec) -> Result<Estimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    let knee = omega_p.min(1.0);
    let head = try_integrate_finite(&mut f, 0.0, knee, spec)?;
    let tail = try_integrate_semi_infinite(&mut f, knee, spec)?;
    Ok(head + tail)
}

/// Reduction factor `eta_E = E / E_Cas` for scaled plasma frequency `omega_p`.
pub fn eta_total(omega_p: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    require_positive("Omega_P", omega_p)?;
    // Inner errors and magnitudes summed over the same outer nodes; their
    // ratio is the magnitude-weighted relative error of the inner integrals.
    let inner_error = Cell::new(0.0f64);
    let inner_size = Cell::new(0.0f64);
    let outer = half_line(
        |k| {
            let inner = half_line(|xi| Ok(log_integrand(k, xi, omega_p)), omega_p, spec)
                .map_err(|e| e.context("eta_E inner integral over Xi"))?;
            inner_error.set(inner_error.get() + k * inner.abs_error);
            inner_size.set(inner_size.get() + k * inner.value.abs());
            Ok(k * inner.value)
        },
        omega_p,
        spec,
    )
    .map_err(|e| e.context("eta_E outer integral over K"))?;
    let eta = outer.scale(NORMALISATION);
    Ok(Estimate {
        value: eta.value,
        abs_error: eta.abs_error
            + inner_error.get() / inner_size.get().max(f64::MIN_POSITIVE) * eta.value.abs(),
    })
}

/// Energy, correction factor and error estimate for a physical setup.
pub fn energy_breakdown(setup: &PhysicalSetup, spec: &QuadratureSpec) -> Result<EnergyResult> {
    let cavity = setup.cavity()?;
    let eta = eta_total(cavity.omega_p_l(), spec)?;
    Ok(EnergyResult {
        energy: energy_from_eta(setup, eta.value),
        eta: eta.value,
        quadrature_error_estimate: eta.abs_error,
    })
}
