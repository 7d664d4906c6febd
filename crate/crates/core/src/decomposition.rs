//! Split of the Casimir energy into plasmonic and photonic parts.
//!
//! The plasmonic factor follows the two TM plasmon branches `Omega_+` and
//! `Omega_-` (including the part of `Omega_+` above the light cone) against
//! twice the single-interface plasmon:
//!
//! ```text
//! eta_pl = -180/pi^3 int_0^inf K (Omega_+ + Omega_- - 2 Omega_0) dK
//! ```
//!
//! Changing variables to `z = K^2 - Omega^2` turns this into integrals of
//! the closed-form `g_i(z)` with no root finding:
//!
//! ```text
//! eta_pl = -180/(2 pi^3) [ int_0^inf sum_i c_i g_i dz + int_{-z_+0}^0 g_+ dz - 2/3 y_+^3 ]
//! eta_ev = -180/(2 pi^3) [ int_0^inf sum_i c_i g_i dz - int_{-z_0P}^0 g_0 dz
//!                          - 2/3 (k_P^3 - Omega_0[k_P]^3) ]
//! ```
//!
//! `eta_ev` keeps only the evanescent part of `Omega_+` (`K > k_P`). The
//! direct `K` integral survives as [`eta_plasmonic_direct`], an independent
//! check. The photonic factor is whatever remains of the total.

use std::f64::consts::{PI, SQRT_2};

use serde::Serialize;

use crate::error::{require_positive, Error, Result};
use crate::lifshitz::eta_total;
use crate::modes::{
    branch_constants, g_branch, omega0, BranchConstants, CavityBranches, PlasmonBranch,
};
use crate::numerics::{
    fit_scaling_coefficient, fit_scaling_with_correction, try_find_root_bracketed,
    try_integrate_finite, try_integrate_semi_infinite, Estimate, PowerLawFit, QuadratureSpec,
    RootSpec,
};
use crate::parallel::{self, Execution};

/// `-180 / (2 pi^3)`
const Z_PREFACTOR: f64 = -90.0 / (PI * PI * PI);
/// `-180 / pi^3`
const K_PREFACTOR: f64 = -180.0 / (PI * PI * PI);

/// Correction factors at one `Omega_P`, with absolute error estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EtaBreakdown {
    pub omega_p: f64,
    pub l_over_lambda_p: f64,
    pub eta_total: f64,
    pub eta_pl: f64,
    /// Always stored as `eta_total - eta_pl`.
    pub eta_ph: f64,
    pub eta_ev: f64,
    pub eta_total_error: f64,
    pub eta_pl_error: f64,
    pub eta_ph_error: f64,
    pub eta_ev_error: f64,
}

/// `sum_i c_i g_i(z)`; its `Omega_P / sqrt(2)` plateaus cancel at large `z`.
pub fn plasmon_integrand(z: f64, omega_p: f64) -> Result<f64> {
    let mut total = 0.0;
    for kind in PlasmonBranch::ALL {
        total += kind.weight() * g_branch(kind, z, omega_p)?;
    }
    Ok(total)
}

/// `int_0^inf sum_i c_i g_i(z) dz`, integrated in `s = sqrt(z)`.
fn evanescent_integral(omega_p: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    try_integrate_semi_infinite::<_, Error>(
        |s| Ok(2.0 * s * plasmon_integrand(s * s, omega_p)?),
        0.0,
        spec,
    )
    .map_err(|e| e.context("integral of sum_i c_i g_i over z > 0"))
}

/// `int_{-z_+0}^0 g_+(z) dz` over the propagative continuation.
fn propagative_integral(constants: &BranchConstants, spec: &QuadratureSpec) -> Result<Estimate> {
    let wp = constants.omega_p;
    try_integrate_finite(
        |z| g_branch(PlasmonBranch::Plus, z, wp),
        -constants.z_plus0,
        0.0,
        spec,
    )
    .map_err(|e| e.context("integral of g_+ over the propagative sector"))
}

/// `int_{-z_0P}^0 g_0(z) dz`; the lower bound is positive, so the result is
/// negative. Integrated in `s = sqrt(z)`.
fn interface_cut_integral(constants: &BranchConstants, spec: &QuadratureSpec) -> Result<Estimate> {
    let wp = constants.omega_p;
    let upper = (-constants.z0_p).sqrt();
    try_integrate_finite::<_, Error>(
        |s| Ok(2.0 * s * g_branch(PlasmonBranch::Zero, s * s, wp)?),
        upper,
        0.0,
        spec,
    )
    .map_err(|e| e.context("integral of g_0 below the light-cone cut"))
}

fn plasmonic_from_parts(
    constants: &BranchConstants,
    evanescent: Estimate,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    let propagative = propagative_integral(constants, spec)?;
    let bracket = evanescent
        + propagative
        + Estimate {
            value: -2.0 / 3.0 * constants.y_plus.powi(3),
            abs_error: 0.0,
        };
    Ok(bracket.scale(Z_PREFACTOR))
}

fn evanescent_from_parts(
    constants: &BranchConstants,
    evanescent: Estimate,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    let cut = interface_cut_integral(constants, spec)?;
    let k_p = constants.k_p;
    let bracket = evanescent
        + (-cut)
        + Estimate {
            value: -2.0 / 3.0 * (k_p.powi(3) - omega0(k_p, constants.omega_p).powi(3)),
            abs_error: 0.0,
        };
    Ok(bracket.scale(Z_PREFACTOR))
}

/// Plasmonic correction factor `eta_pl` (adiabatic plasmon definition).
pub fn eta_plasmonic(omega_p: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    let constants = branch_constants(omega_p)?;
    let evanescent = evanescent_integral(omega_p, spec)?;
    plasmonic_from_parts(&constants, evanescent, spec)
}

/// Evanescent-only plasmon factor `eta_ev`, which cuts `Omega_+` at the
/// light cone.
pub fn eta_evanescent(omega_p: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    let constants = branch_constants(omega_p)?;
    let evanescent = evanescent_integral(omega_p, spec)?;
    evanescent_from_parts(&constants, evanescent, spec)
}

/// `eta_E - eta_pl`.
pub fn eta_photonic(omega_p: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    let total = eta_total(omega_p, spec)?;
    let plasmonic = eta_plasmonic(omega_p, spec)?;
    Ok(total + (-plasmonic))
}

/// All four correction factors at one `Omega_P`.
pub fn eta_breakdown(omega_p: f64, spec: &QuadratureSpec) -> Result<EtaBreakdown> {
    let constants = branch_constants(omega_p)?;
    let evanescent = evanescent_integral(omega_p, spec)?;
    let pl = plasmonic_from_parts(&constants, evanescent, spec)?;
    let ev = evanescent_from_parts(&constants, evanescent, spec)?;
    let total = eta_total(omega_p, spec)?;
    Ok(EtaBreakdown {
        omega_p,
        l_over_lambda_p: omega_p / (2.0 * PI),
        eta_total: total.value,
        eta_pl: pl.value,
        eta_ph: total.value - pl.value,
        eta_ev: ev.value,
        eta_total_error: total.abs_error,
        eta_pl_error: pl.abs_error,
        eta_ph_error: total.abs_error + pl.abs_error,
        eta_ev_error: ev.abs_error,
    })
}

/// Damping factor applied to the direct mode integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regulator {
    /// `exp(-eps K)`; corrections in powers of `eps`.
    Exponential,
    /// `exp(-(eps K)^2)`; corrections in powers of `eps^2`.
    Gaussian,
}

impl Regulator {
    fn weight(self, x: f64) -> f64 {
        match self {
            Regulator::Exponential => (-x).exp(),
            Regulator::Gaussian => (-x * x).exp(),
        }
    }

    fn leading_order(self) -> i32 {
        match self {
            Regulator::Exponential => 1,
            Regulator::Gaussian => 2,
        }
    }
}

/// A regulator width small enough for the ladder to settle at `omega_p`.
pub fn default_regulator_epsilon(omega_p: f64) -> f64 {
    0.01 / omega_p.max(1.0).sqrt()
}

/// Tolerance on the last Richardson step, relative to the result.
const EXTRAPOLATION_TOL: f64 = 1e-4;

fn regulated_mode_integral(
    branches: &CavityBranches,
    regulator: Regulator,
    eps: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    let k_p = branches.constants().k_p;
    let integrand = |k: f64| -> Result<f64> {
        let plus = branches.invert(PlasmonBranch::Plus, k)?;
        let minus = branches.invert(PlasmonBranch::Minus, k)?;
        let zero = omega0(k, branches.omega_p());
        Ok(k * (plus + minus - 2.0 * zero) * regulator.weight(eps * k))
    };
    let below = try_integrate_finite(integrand, 0.0, k_p, spec)?;
    let above = try_integrate_semi_infinite(integrand, k_p, spec)?;
    Ok((below + above).scale(K_PREFACTOR))
}

/// `eta_pl` by direct integration of the inverted branches over `K`, with a
/// regulator removed by two Richardson steps over `(eps, eps/2, eps/4)`.
pub fn eta_plasmonic_direct(
    omega_p: f64,
    reg_epsilon: f64,
    regulator: Regulator,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    require_positive("regulator epsilon", reg_epsilon)?;
    let branches = CavityBranches::new(omega_p)?;
    let ladder = [reg_epsilon, reg_epsilon / 2.0, reg_epsilon / 4.0]
        .iter()
        .map(|&eps| regulated_mode_integral(&branches, regulator, eps, spec))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.context("direct plasmonic mode integral"))?;

    let p = regulator.leading_order();
    let step = |coarse: f64, fine: f64, order: i32| {
        let w = 2f64.powi(order);
        (w * fine - coarse) / (w - 1.0)
    };
    let first = step(ladder[0].value, ladder[1].value, p);
    let second = step(ladder[1].value, ladder[2].value, p);
    let value = step(first, second, 2 * p);
    let change = (value - second).abs();
    if change > EXTRAPOLATION_TOL * value.abs().max(1e-12) {
        return Err(Error::ExtrapolationUnstable {
            coarse: second,
            fine: value,
        });
    }
    let quadrature_error = ladder.iter().map(|e| e.abs_error).fold(0.0, f64::max);
    Ok(Estimate {
        value,
        abs_error: change + quadrature_error,
    })
}

/// `(eta_pl - eta_ev, -180/pi^3 int_0^{k_P} K (Omega_+ - Omega_0) dK)`.
///
/// Both sides measure the part of `Omega_+` above the light cone; the left
/// uses the `z` closed forms, the right inverts the branch directly.
pub fn propagative_part_identity(omega_p: f64, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    let constants = branch_constants(omega_p)?;
    let evanescent = evanescent_integral(omega_p, spec)?;
    let lhs = plasmonic_from_parts(&constants, evanescent, spec)?.value
        - evanescent_from_parts(&constants, evanescent, spec)?.value;
    let branches = CavityBranches::new(omega_p)?;
    let rhs = try_integrate_finite(
        |k| Ok::<f64, Error>(k * (branches.invert(PlasmonBranch::Plus, k)? - omega0(k, omega_p))),
        0.0,
        constants.k_p,
        spec,
    )
    .map_err(|e| e.context("propagative part of Omega_+ over K"))?
    .value
        * K_PREFACTOR;
    Ok((lhs, rhs))
}

/// Short-distance constant `alpha`, defined by `eta_pl ~ (3/2) alpha L/lambda_P`
/// for `L << lambda_P`.
pub fn short_distance_alpha(spec: &QuadratureSpec) -> Result<Estimate> {
    // z = s^2; sqrt(1 - e^-s) via expm1 keeps precision near s = 0.
    let integral = try_integrate_semi_infinite::<_, Error>(
        |s| {
            let e = (-s).exp();
            Ok(2.0 * s * ((1.0 + e).sqrt() + (-(-s).exp_m1()).sqrt() - 2.0))
        },
        0.0,
        spec,
    )
    .map_err(|e| e.context("short-distance plasmon integral"))?;
    // eta_pl ~ Z_PREFACTOR (Omega_P / sqrt 2) I and Omega_P = 2 pi L/lambda_P.
    Ok(integral.scale(Z_PREFACTOR / SQRT_2 * 2.0 * PI * 2.0 / 3.0))
}

/// Plasma frequencies at which the long-distance constants are fitted.
pub const ASYMPTOTIC_WINDOW: [f64; 3] = [1e3, 1e4, 1e5];

/// Outcome of a long-distance `sqrt(Omega_P)` fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticFit {
    /// The fitted constant (`Gamma` or `beta_ev`), sign convention applied.
    pub constant: f64,
    pub fit: PowerLawFit,
    /// `c` from the bare `c sqrt(Omega_P)` model, for comparison.
    pub leading_only: PowerLawFit,
    /// `(Omega_P, eta)` pairs that were fitted.
    pub samples: Vec<(f64, f64)>,
}

fn sample_window<F>(exec: Execution, eta: F) -> Result<Vec<(f64, f64)>>
where
    F: Fn(f64) -> Result<Estimate> + Sync + Send,
{
    parallel::try_map(exec, &ASYMPTOTIC_WINDOW, |&wp| Ok((wp, eta(wp)?.value)))
}

/// `Gamma` in `eta_pl ~ -Gamma sqrt(Omega_P)`.
///
/// `eta_pl` carries a constant sub-leading term of order `60` that would bias
/// a bare `sqrt(Omega_P)` fit by almost one percent on this window, so the
/// model is `c sqrt(Omega_P) + d`.
pub fn fit_gamma(spec: &QuadratureSpec, exec: Execution) -> Result<AsymptoticFit> {
    let samples = sample_window(exec, |wp| eta_plasmonic(wp, spec))?;
    let fit = fit_scaling_with_correction(&samples, 0.5, 0.0)?;
    let leading_only = fit_scaling_coefficient(&samples, 0.5)?;
    Ok(AsymptoticFit {
        constant: fit.coefficient.abs(),
        fit,
        leading_only,
        samples,
    })
}

/// `beta_ev` in `eta_ev ~ beta_ev sqrt(Omega_P)`.
pub fn fit_beta_ev(spec: &QuadratureSpec, exec: Execution) -> Result<AsymptoticFit> {
    let samples = sample_window(exec, |wp| eta_evanescent(wp, spec))?;
    let fit = fit_scaling_coefficient(&samples, 0.5)?;
    Ok(AsymptoticFit {
        constant: fit.coefficient,
        fit,
        leading_only: fit,
        samples,
    })
}

/// Bracket, in `L/lambda_P`, searched for the sign change of `eta_pl`.
pub const SIGN_CHANGE_BRACKET: (f64, f64) = (0.01, 0.5);
const SIGN_CHANGE_SCAN: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignChange {
    pub l_over_lambda_p: f64,
    /// Sign changes of `eta_pl` seen on a log-spaced scan of the bracket.
    pub crossings_on_scan: usize,
    pub scan_points: usize,
}

fn eta_pl_at_ratio(ratio: f64, spec: &QuadratureSpec) -> Result<f64> {
    Ok(eta_plasmonic(2.0 * PI * ratio, spec)?.value)
}

/// `L/lambda_P` at which `eta_pl` changes sign.
pub fn locate_sign_change(spec: &QuadratureSpec, exec: Execution) -> Result<SignChange> {
    let (lo, hi) = SIGN_CHANGE_BRACKET;
    let grid = crate::modes::log_grid(lo, hi, SIGN_CHANGE_SCAN);
    let values = parallel::try_map(exec, &grid, |&x| eta_pl_at_ratio(x, spec))?;
    let crossings_on_scan = values
        .windows(2)
        .filter(|w| (w[0] > 0.0) != (w[1] > 0.0))
        .count();
    let root = try_find_root_bracketed(
        |x| eta_pl_at_ratio(x, spec),
        lo,
        hi,
        &RootSpec::with_x_tol(1e-10),
    )
    .map_err(|e| e.context("sign change of eta_pl"))?;
    Ok(SignChange {
        l_over_lambda_p: root,
        crossings_on_scan,
        scan_points: SIGN_CHANGE_SCAN,
    })
}

/// Short- and long-distance constants of the decomposition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticReport {
    pub alpha: f64,
    pub gamma: f64,
    pub beta_ev: f64,
    pub sign_change_l_over_lambda_p: f64,
    pub gamma_fit: AsymptoticFit,
    pub beta_ev_fit: AsymptoticFit,
    pub sign_change: SignChange,
}

pub fn asymptotic_report(spec: &QuadratureSpec, exec: Execution) -> Result<AsymptoticReport> {
    let alpha = short_distance_alpha(spec)?.value;
    let gamma_fit = fit_gamma(spec, exec)?;
    let beta_ev_fit = fit_beta_ev(spec, exec)?;
    let sign_change = locate_sign_change(spec, exec)?;
    Ok(AsymptoticReport {
        alpha,
        gamma: gamma_fit.constant,
        beta_ev: beta_ev_fit.constant,
        sign_change_l_over_lambda_p: sign_change.l_over_lambda_p,
        gamma_fit,
        beta_ev_fit,
        sign_change,
    })
}

/// Factors at each `L/lambda_P` of `ratios`, in input order.
pub fn sweep(ratios: &[f64], spec: &QuadratureSpec, exec: Execution) -> Result<Vec<EtaBreakdown>> {
    parallel::try_map(exec, ratios, |&x| eta_breakdown(2.0 * PI * x, spec))
}
