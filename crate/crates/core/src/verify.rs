//! Self-checks over the whole pipeline, run by `casimir verify`.
//!
//! Every check is cheap enough to run in a few seconds in release builds.
//! A [`Fault`] can be injected to confirm that the suite notices a broken
//! kernel.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::decomposition::{
    default_regulator_epsilon, eta_evanescent, eta_plasmonic, eta_plasmonic_direct,
    locate_sign_change, plasmon_integrand, propagative_part_identity, Regulator,
};
use crate::error::{Error, Result};
use crate::lifshitz::eta_total;
use crate::modes::{
    f_branch, g_branch, log_grid, omega0, plus_continuation_sq, CavityBranches, PlasmonBranch,
};
use crate::numerics::{find_root_bracketed, integrate_semi_infinite, QuadratureSpec, RootSpec};
use crate::optics::{reflection_sq_imag_axis, Polarization};
use crate::parallel::{self, Execution};

/// Deliberate defects for testing the suite itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Fault {
    /// Evaluate the `g_+` continuation with the sign of `tan` flipped.
    FlipContinuationSign,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOptions {
    pub fault: Option<Fault>,
    pub spec: QuadratureSpec,
    pub exec: Execution,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

const CAVITIES: [f64; 4] = [0.3, 2.0, 2.0 * PI, 40.0];
const ORACLE_CAVITIES: [f64; 3] = [0.5, 5.0, 50.0];
const CONTINUATION_SEED: u64 = 0x5eed_ca51;

fn check(name: &'static str, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        name,
        passed,
        detail: detail.into(),
    }
}

fn numerics_invariants(spec: &QuadratureSpec) -> Result<Check> {
    let integral = integrate_semi_infinite(|x| (-x).exp(), 0.0, spec)
        .map_err(|e| Error::from(e).context("reference integral of exp(-x)"))?
        .value;
    let root = find_root_bracketed(f64::cos, 0.0, 2.0, &RootSpec::default())
        .map_err(|e| Error::from(e).context("reference root of cos"))?;
    let err = (integral - 1.0).abs().max((root - FRAC_PI_2).abs());
    Ok(check(
        "numerics",
        err < 1e-9,
        format!("max error {err:.3e}"),
    ))
}

fn optics_invariants() -> Check {
    let mut worst = 0.0f64;
    let mut bounded = true;
    for &wp in &CAVITIES {
        for k in log_grid(1e-3, 1e2, 20) {
            for xi in log_grid(1e-3, 1e2, 20) {
                for pol in Polarization::ALL {
                    let r = reflection_sq_imag_axis(pol, k, xi, wp).unwrap_or(f64::NAN);
                    bounded &= (0.0..=1.0).contains(&r);
                }
            }
            let te = reflection_sq_imag_axis(Polarization::TE, 0.0, k, wp).unwrap_or(f64::NAN);
            let tm = reflection_sq_imag_axis(Polarization::TM, 0.0, k, wp).unwrap_or(f64::NAN);
            worst = worst.max((te - tm).abs());
        }
    }
    check(
        "optics",
        bounded && worst < 1e-12,
        format!("r^2 in [0, 1]: {bounded}; normal incidence |TE - TM| = {worst:.1e}"),
    )
}

fn total_factor_bounds(opts: &VerifyOptions) -> Result<Check> {
    let grid = log_grid(1e-2, 1e3, 8);
    let etas = parallel::try_map(opts.exec, &grid, |&wp| {
        Ok::<_, Error>(eta_total(wp, &opts.spec)?.value)
    })?;
    let bounded = etas.iter().all(|&e| e > 0.0 && e < 1.0);
    let monotone = etas.windows(2).all(|w| w[1] > w[0]);
    Ok(check(
        "eta_E bounds and monotonicity",
        bounded && monotone,
        format!("eta_E from {:.6} to {:.6}", etas[0], etas[etas.len() - 1]),
    ))
}

struct BranchStats {
    ordered: bool,
    evanescent: bool,
    monotone: bool,
    f_monotone: bool,
    round_trip: f64,
    degeneracy: f64,
}

fn branch_stats(wp: f64) -> Result<BranchStats> {
    let cavity = CavityBranches::new(wp)?;
    let k_p = cavity.constants().k_p;
    let grid = log_grid(1e-3, 20.0 * wp.max(1.0), 60);
    let mut stats = BranchStats {
        ordered: true,
        evanescent: true,
        monotone: true,
        f_monotone: true,
        round_trip: 0.0,
        degeneracy: 0.0,
    };
    let mut previous = [0.0f64; 2];
    for &k in &grid {
        let plus = cavity.invert(PlasmonBranch::Plus, k)?;
        let minus = cavity.invert(PlasmonBranch::Minus, k)?;
        let zero = omega0(k, wp);
        // The branches merge to machine precision at large K.
        let tol = 8.0 * f64::EPSILON * zero;
        stats.ordered &= if k < 10.0 {
            minus < zero && zero < plus
        } else {
            minus <= zero + tol && zero <= plus + tol
        };
        stats.evanescent &= minus < k && zero < k && (k <= k_p * (1.0 + 1e-9) || plus < k);
        stats.monotone &= minus > previous[0] && zero > previous[1];
        previous = [minus, zero];
        for (kind, omega) in [(PlasmonBranch::Plus, plus), (PlasmonBranch::Minus, minus)] {
            let back = g_branch(kind, (k - omega) * (k + omega), wp)?;
            stats.round_trip = stats.round_trip.max(((back - omega) / omega).abs());
        }
    }
    let far = 50.0 * wp.max(1.0);
    let zero = omega0(far, wp);
    for kind in [PlasmonBranch::Plus, PlasmonBranch::Minus] {
        let omega = cavity.invert(kind, far)?;
        stats.degeneracy = stats.degeneracy.max(((omega - zero) / zero).abs());
    }
    let z_grid = log_grid(1e-6, 200.0, 40);
    for kind in PlasmonBranch::ALL {
        let mut last = f64::NEG_INFINITY;
        if kind == PlasmonBranch::Plus {
            let z0 = cavity.constants().z_plus0;
            for i in 0..20 {
                let f = f_branch(kind, -z0 * (1.0 - f64::from(i) / 20.0), wp)?;
                stats.f_monotone &= f > last;
                last = f;
            }
        }
        for &z in std::iter::once(&0.0).chain(&z_grid) {
            let f = f_branch(kind, z, wp)?;
            stats.f_monotone &= f > last;
            last = f;
        }
    }
    Ok(stats)
}

fn branch_checks(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let stats = parallel::try_map(opts.exec, &CAVITIES, |&wp| branch_stats(wp))?;
    let round_trip = stats.iter().map(|s| s.round_trip).fold(0.0, f64::max);
    let degeneracy = stats.iter().map(|s| s.degeneracy).fold(0.0, f64::max);
    Ok(vec![
        check(
            "branch ordering",
            stats.iter().all(|s| s.ordered),
            "Omega_- < Omega_0 < Omega_+ for K > 0",
        ),
        check(
            "evanescence",
            stats.iter().all(|s| s.evanescent),
            "Omega_-, Omega_0 below K everywhere; Omega_+ below K past k_P",
        ),
        check(
            "branch monotonicity",
            stats.iter().all(|s| s.f_monotone && s.monotone),
            "f_i increasing in z; Omega_- and Omega_0 increasing in K",
        ),
        check(
            "inversion round trip",
            round_trip < 1e-9,
            format!("max relative error {round_trip:.1e}"),
        ),
        check(
            "large-K degeneracy",
            degeneracy < 1e-6,
            format!("max |Omega_pm / Omega_0 - 1| = {degeneracy:.1e}"),
        ),
    ])
}

fn g_plus_sq_complex(u: f64, wp: f64) -> f64 {
    let z = Complex64::new(-u * u, 0.0);
    let s = z.sqrt();
    let kappa_t = (z + wp * wp).sqrt();
    (wp * wp * s / (s + kappa_t * (s / 2.0).tanh())).re
}

fn continuation_check(fault: Option<Fault>) -> Check {
    let tan_sign = match fault {
        Some(Fault::FlipContinuationSign) => -1.0,
        None => 1.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(CONTINUATION_SEED);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let wp: f64 = 10f64.powf(rng.random_range(-2.0..3.0));
        let u = rng.random_range(0.0..0.999) * wp.min(PI);
        let expected = g_plus_sq_complex(u, wp);
        let err = match plus_continuation_sq(u, wp, tan_sign) {
            Ok(v) => ((v - expected) / expected).abs(),
            Err(_) => f64::INFINITY,
        };
        worst = worst.max(if err.is_nan() { f64::INFINITY } else { err });
    }
    check(
        "g_+ continuation",
        worst < 1e-9,
        format!("100 seeded points, max relative error {worst:.1e}"),
    )
}

fn cancellation_check() -> Result<Check> {
    let mut worst = 0.0f64;
    for wp in log_grid(1e-2, 1e5, 15) {
        let z = 200.0 * (1.0 + (1.0 + wp).ln());
        worst = worst.max(plasmon_integrand(z, wp)?.abs());
    }
    Ok(check(
        "large-z cancellation",
        worst < 1e-8,
        format!("max |sum c_i g_i| = {worst:.1e}"),
    ))
}

fn evanescent_positivity(opts: &VerifyOptions) -> Result<Check> {
    let grid = log_grid(1e-2, 1e5, 50);
    let values = parallel::try_map(opts.exec, &grid, |&wp| {
        Ok::<_, Error>(eta_evanescent(wp, &opts.spec)?.value)
    })?;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(check(
        "eta_ev positivity",
        min > 0.0,
        format!("min over 50 points {min:.4e}"),
    ))
}

fn identity_check(opts: &VerifyOptions) -> Result<Check> {
    let pairs = parallel::try_map(opts.exec, &ORACLE_CAVITIES, |&wp| {
        propagative_part_identity(wp, &opts.spec)
    })?;
    let worst = pairs
        .iter()
        .map(|(l, r)| (l - r).abs() / l.abs().max(1.0))
        .fold(0.0, f64::max);
    Ok(check(
        "propagative identity",
        worst < 1e-6,
        format!("max scaled difference {worst:.1e}"),
    ))
}

fn oracle_check(opts: &VerifyOptions) -> Result<Check> {
    let worst = parallel::try_map(opts.exec, &ORACLE_CAVITIES, |&wp| {
        let closed = eta_plasmonic(wp, &opts.spec)?.value;
        let mut worst = 0.0f64;
        for regulator in [Regulator::Exponential, Regulator::Gaussian] {
            let direct =
                eta_plasmonic_direct(wp, default_regulator_epsilon(wp), regulator, &opts.spec)?
                    .value;
            worst = worst.max(((direct - closed) / closed).abs());
        }
        Ok::<_, Error>(worst)
    })?
    .into_iter()
    .fold(0.0, f64::max);
    Ok(check(
        "closed form vs direct",
        worst < 1e-3,
        format!("max relative difference {worst:.1e}"),
    ))
}

fn sign_structure(opts: &VerifyOptions) -> Result<Check> {
    let change = locate_sign_change(&opts.spec, opts.exec)?;
    let small = eta_plasmonic(2.0 * PI * 0.01, &opts.spec)?.value;
    let large = eta_plasmonic(2.0 * PI * 0.5, &opts.spec)?.value;
    Ok(check(
        "eta_pl sign structure",
        small > 0.0 && large < 0.0 && change.crossings_on_scan == 1,
        format!(
            "one sign change at L/lambda_P = {:.5}; {} crossings on the scan",
            change.l_over_lambda_p, change.crossings_on_scan
        ),
    ))
}

/// Runs every check. Numerical failures inside a check are reported as
/// errors rather than failed checks.
pub fn run_invariants(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut checks = vec![numerics_invariants(&opts.spec)?, optics_invariants()];
    checks.push(total_factor_bounds(opts)?);
    checks.extend(branch_checks(opts)?);
    checks.push(continuation_check(opts.fault));
    checks.push(cancellation_check()?);
    checks.push(evanescent_positivity(opts)?);
    checks.push(identity_check(opts)?);
    checks.push(oracle_check(opts)?);
    checks.push(sign_structure(opts)?);
    Ok(VerifyReport { checks })
}
