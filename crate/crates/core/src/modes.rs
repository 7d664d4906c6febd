//! Cavity dispersion branches for two plasma mirrors.
//!
//! With `z = K^2 - Omega^2` (positive in the evanescent sector), the TM
//! plasmonic branches `Omega_+`, `Omega_-` and the single-interface plasmon
//! `Omega_0` solve `K^2 = f_i(z) = z + g_i(z)^2`, where
//!
//! ```text
//! g_+^2 = Omega_P^2 sqrt(z) / (sqrt(z) + sqrt(z + Omega_P^2) tanh(sqrt(z)/2))
//! g_-^2 = Omega_P^2 sqrt(z) / (sqrt(z) + sqrt(z + Omega_P^2) coth(sqrt(z)/2))
//! g_0^2 = Omega_P^2 sqrt(z) / (sqrt(z) + sqrt(z + Omega_P^2))
//! ```
//!
//! At the root, `Omega_i = g_i(z)`. Only `Omega_+` enters the propagative
//! sector (`z < 0`); there `sqrt(z) = i u` turns `tanh` into `tan` and `g_+`
//! stays real:
//!
//! ```text
//! g_+^2(-u^2) = Omega_P^2 u / (u + sqrt(Omega_P^2 - u^2) tan(u/2)),   0 <= u < min(Omega_P, pi).
//! ```

use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use crate::error::{require_positive, Error, Result};
use crate::numerics::{try_find_root_bracketed, NumericsError, RootSpec};
use crate::optics::{classify, Polarization, Sector};
use crate::parallel::{self, Execution};

/// The three functions `f_+`, `f_-`, `f_0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PlasmonBranch {
    Plus,
    Minus,
    Zero,
}

impl PlasmonBranch {
    pub const ALL: [PlasmonBranch; 3] = [
        PlasmonBranch::Plus,
        PlasmonBranch::Minus,
        PlasmonBranch::Zero,
    ];

    /// Weight of the branch in the plasmonic energy: `c_+ = c_- = 1`, `c_0 = -2`.
    pub fn weight(self) -> f64 {
        match self {
            PlasmonBranch::Plus | PlasmonBranch::Minus => 1.0,
            PlasmonBranch::Zero => -2.0,
        }
    }

    fn name(self) -> &'static str {
        match self {
            PlasmonBranch::Plus => "plus",
            PlasmonBranch::Minus => "minus",
            PlasmonBranch::Zero => "zero",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchKind {
    PlasmonicPlus,
    PlasmonicMinus,
    InterfaceReference,
    Photonic,
}

impl BranchKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BranchKind::PlasmonicPlus => "plasmonic_plus",
            BranchKind::PlasmonicMinus => "plasmonic_minus",
            BranchKind::InterfaceReference => "interface_reference",
            BranchKind::Photonic => "photonic",
        }
    }
}

/// Identity of one dispersion branch. Plasmonic branches are TM; only
/// photonic branches carry a mode index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct BranchId {
    kind: BranchKind,
    pol: Polarization,
    m: Option<u32>,
}

impl BranchId {
    pub const PLASMONIC_PLUS: BranchId = BranchId::tm(BranchKind::PlasmonicPlus);
    pub const PLASMONIC_MINUS: BranchId = BranchId::tm(BranchKind::PlasmonicMinus);
    pub const INTERFACE_REFERENCE: BranchId = BranchId::tm(BranchKind::InterfaceReference);

    const fn tm(kind: BranchKind) -> BranchId {
        BranchId {
            kind,
            pol: Polarization::TM,
            m: None,
        }
    }

    /// Photonic branch `m` of polarization `pol`. TE starts at `m = 1`; TM
    /// starts at `m = 2` because the TM `m = 1` solution is the
    /// propagative part of `Omega_+`.
    pub fn photonic(pol: Polarization, m: u32) -> Result<BranchId> {
        let first = first_photonic_index(pol);
        if m < first {
            return Err(Error::domain(format!(
                "{pol} photonic modes start at m = {first}"
            )));
        }
        Ok(BranchId {
            kind: BranchKind::Photonic,
            pol,
            m: Some(m),
        })
    }

    pub fn kind(&self) -> BranchKind {
        self.kind
    }

    pub fn pol(&self) -> Polarization {
        self.pol
    }

    pub fn m(&self) -> Option<u32> {
        self.m
    }
}

impl fmt::Display for BranchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.m {
            Some(m) => write!(f, "{}[{} m={}]", self.kind.as_str(), self.pol, m),
            None => f.write_str(self.kind.as_str()),
        }
    }
}

fn first_photonic_index(pol: Polarization) -> u32 {
    match pol {
        Polarization::TE => 1,
        Polarization::TM => 2,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispersionPoint {
    pub k: f64,
    pub omega: f64,
    pub sector: Sector,
}

impl DispersionPoint {
    pub fn new(k: f64, omega: f64) -> Self {
        Self {
            k,
            omega,
            sector: classify(k, omega),
        }
    }
}

/// Scalars derived from `Omega_P` that fix the integration ranges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchConstants {
    pub omega_p: f64,
    /// Light-cone crossing of `Omega_+`: `g_+(0) = Omega_P / sqrt(1 + Omega_P/2)`.
    pub k_p: f64,
    /// `Omega_+[K = 0]`.
    pub y_plus: f64,
    /// `y_plus^2`; `f_+(-z_plus0) = 0`.
    pub z_plus0: f64,
    /// `-(k_P^2 - Omega_0[k_P]^2)`, never positive.
    pub z0_p: f64,
}

/// Surface plasmon of a single interface,
/// `sqrt((Omega_P^2 + 2K^2 - sqrt(Omega_P^4 + 4K^4)) / 2)`.
pub fn omega0(k: f64, omega_p: f64) -> f64 {
    let wp2 = omega_p * omega_p;
    let k2 = k * k;
    let root = wp2.hypot(2.0 * k2);
    // Two cancellation-free rearrangements of the same expression.
    let omega_sq = if 2.0 * k2 < wp2 {
        k2 - 2.0 * k2 * k2 / (wp2 + root)
    } else {
        0.5 * wp2 - 0.5 * wp2 * wp2 / (2.0 * k2 + root)
    };
    omega_sq.max(0.0).sqrt()
}

/// `tanh(s/2) / s`, finite at `s = 0`.
fn half_tanh_ratio(s: f64) -> f64 {
    if s < 1e-4 {
        0.5 - s * s / 24.0
    } else {
        (0.5 * s).tanh() / s
    }
}

/// `tan(u/2) / u`, finite at `u = 0`.
fn half_tan_ratio(u: f64) -> f64 {
    if u < 1e-4 {
        0.5 + u * u / 24.0
    } else {
        (0.5 * u).tan() / u
    }
}

/// `g_+^2(-u^2)`. `tan_sign` is `1` for the physical continuation; the
/// invariant suite flips it to check that a wrong continuation is caught.
pub(crate) fn plus_continuation_sq(u: f64, omega_p: f64, tan_sign: f64) -> Result<f64> {
    let limit = omega_p.min(PI);
    if !(u < limit) {
        return Err(Error::Continuation { u, limit });
    }
    let kappa_t = (omega_p * omega_p - u * u).sqrt();
    Ok(omega_p * omega_p / (1.0 + kappa_t * tan_sign * half_tan_ratio(u)))
}

/// `g_kind(z)^2`.
pub fn g_branch_sq(kind: PlasmonBranch, z: f64, omega_p: f64) -> Result<f64> {
    if z.is_nan() {
        return Err(Error::domain("z is NaN"));
    }
    let wp2 = omega_p * omega_p;
    if z < 0.0 {
        return match kind {
            PlasmonBranch::Plus => plus_continuation_sq((-z).sqrt(), omega_p, 1.0),
            _ => Err(Error::domain(format!(
                "g_{} is only defined for z >= 0, got {z}",
                kind.name()
            ))),
        };
    }
    let s = z.sqrt();
    let kappa_t = (z + wp2).sqrt();
    Ok(match kind {
        PlasmonBranch::Plus => wp2 / (1.0 + kappa_t * half_tanh_ratio(s)),
        PlasmonBranch::Minus => {
            let st = s * (0.5 * s).tanh();
            wp2 * st / (st + kappa_t)
        }
        PlasmonBranch::Zero => wp2 * s / (s + kappa_t),
    })
}

/// `g_kind(z) = sqrt(f_kind(z) - z)`.
pub fn g_branch(kind: PlasmonBranch, z: f64, omega_p: f64) -> Result<f64> {
    g_branch_sq(kind, z, omega_p).map(f64::sqrt)
}

/// `f_kind(z) = z + g_kind(z)^2`.
pub fn f_branch(kind: PlasmonBranch, z: f64, omega_p: f64) -> Result<f64> {
    Ok(z + g_branch_sq(kind, z, omega_p)?)
}

/// Light-cone crossing `k_P = Omega_P / sqrt(1 + Omega_P / 2)`.
pub fn light_cone_crossing(omega_p: f64) -> f64 {
    omega_p / (1.0 + 0.5 * omega_p).sqrt()
}

pub fn branch_constants(omega_p: f64) -> Result<BranchConstants> {
    require_positive("Omega_P", omega_p)?;
    let k_p = light_cone_crossing(omega_p);
    // f_+(-u^2) = 0 is equivalent to u + 2 atan(u / sqrt(Omega_P^2 - u^2)) = pi,
    // which is monotone in u and has no spurious root at u = Omega_P.
    let phase = |u: f64| u + 2.0 * u.atan2((omega_p * omega_p - u * u).max(0.0).sqrt()) - PI;
    let hi = omega_p.min(PI);
    let y_plus = try_find_root_bracketed::<_, Error>(
        |u| Ok(phase(u)),
        0.0,
        hi,
        &RootSpec::with_x_tol(1e-15),
    )
    .map_err(|e| e.context("root of f_+(-z) = 0"))?;
    let o0 = omega0(k_p, omega_p);
    Ok(BranchConstants {
        omega_p,
        k_p,
        y_plus,
        z_plus0: y_plus * y_plus,
        z0_p: -(k_p * k_p - o0 * o0),
    })
}

const SCAN_POINTS: usize = 8;

/// The three plasmonic dispersion functions of one cavity, with their
/// constants precomputed.
#[derive(Debug, Clone, Copy)]
pub struct CavityBranches {
    constants: BranchConstants,
}

impl CavityBranches {
    pub fn new(omega_p: f64) -> Result<Self> {
        Ok(Self {
            constants: branch_constants(omega_p)?,
        })
    }

    pub fn constants(&self) -> &BranchConstants {
        &self.constants
    }

    pub fn omega_p(&self) -> f64 {
        self.constants.omega_p
    }

    /// `z` range on which `f_kind(z) = K^2` must have its root.
    fn search_range(&self, kind: PlasmonBranch, k: f64) -> (f64, f64) {
        let k2 = k * k;
        if kind == PlasmonBranch::Plus && k < self.constants.k_p {
            (-self.constants.z_plus0, 0.0)
        } else {
            (0.0, k2)
        }
    }

    /// Root `z*` of `f_kind(z) = K^2`.
    pub fn solve_z(&self, kind: PlasmonBranch, k: f64) -> Result<f64> {
        if !(k >= 0.0 && k.is_finite()) {
            return Err(Error::domain("K must be finite and non-negative"));
        }
        let wp = self.omega_p();
        let k2 = k * k;
        if k == 0.0 {
            return Ok(match kind {
                PlasmonBranch::Plus => -self.constants.z_plus0,
                _ => 0.0,
            });
        }
        let (lo, hi) = self.search_range(kind, k);
        let residual = |z: f64| Ok::<f64, Error>(f_branch(kind, z, wp)? - k2);

        // Coarse scan: confirms monotonicity and narrows the bracket.
        let mut nodes = [(0.0, 0.0); SCAN_POINTS + 1];
        for (i, node) in nodes.iter_mut().enumerate() {
            let z = if i == SCAN_POINTS {
                hi
            } else {
                lo + (hi - lo) * i as f64 / SCAN_POINTS as f64
            };
            *node = (z, residual(z)?);
        }
        let slack = 64.0 * f64::EPSILON * k2.max(self.constants.z_plus0);
        if let Some(w) = nodes.windows(2).find(|w| w[1].1 < w[0].1 - slack) {
            return Err(Error::BracketNotFound {
                branch: kind.name(),
                k,
                reason: format!(
                    "f_{} decreases between z = {} and z = {}",
                    kind.name(),
                    w[0].0,
                    w[1].0
                ),
            });
        }
        // Roots on the range ends (K = k_P, say) can round to the wrong side.
        if nodes[0].1 > 0.0 && nodes[0].1 <= slack {
            return Ok(lo);
        }
        if nodes[SCAN_POINTS].1 < 0.0 && nodes[SCAN_POINTS].1 >= -slack {
            return Ok(hi);
        }
        let (a, b) = nodes
            .windows(2)
            .find(|w| w[0].1 <= 0.0 && w[1].1 >= 0.0)
            .map(|w| (w[0].0, w[1].0))
            .ok_or_else(|| Error::BracketNotFound {
                branch: kind.name(),
                k,
                reason: format!("f_{} - K^2 has no sign change on [{lo}, {hi}]", kind.name()),
            })?;
        let spec = RootSpec::with_x_tol(((hi - lo).abs() * 1e-15).max(f64::MIN_POSITIVE));
        try_find_root_bracketed(residual, a, b, &spec).map_err(|e| match e {
            Error::Numerics {
                source: NumericsError::InvalidBracket { .. },
                ..
            } => Error::BracketNotFound {
                branch: kind.name(),
                k,
                reason: "bracket lost during refinement".into(),
            },
            other => other.context("dispersion branch inversion"),
        })
    }

    /// `Omega_kind[K]`, computed as `g_kind(z*)` to avoid cancellation in
    /// `sqrt(K^2 - z*)`.
    pub fn invert(&self, kind: PlasmonBranch, k: f64) -> Result<f64> {
        let z = self.solve_z(kind, k)?;
        let omega = g_branch(kind, z, self.omega_p())?;
        // Once the branches merge, rounding can put them a few ulp on the
        // wrong side of Omega_0; the exact ordering is strict.
        let zero = omega0(k, self.omega_p());
        let slack = 4.0 * f64::EPSILON * zero;
        Ok(match kind {
            PlasmonBranch::Plus if omega < zero && zero - omega <= slack => zero,
            PlasmonBranch::Minus if omega > zero && omega - zero <= slack => zero,
            _ => omega,
        })
    }
}

/// `Omega_kind[K]` for a single `(K, Omega_P)`.
pub fn invert_branch(kind: PlasmonBranch, k: f64, omega_p: f64) -> Result<f64> {
    CavityBranches::new(omega_p)?.invert(kind, k)
}

/// Round-trip phase of the propagative photonic condition, offset so that
/// the `m`-th mode is its root. `kz` is the longitudinal wavevector.
fn photonic_phase(pol: Polarization, m: u32, kz: f64, k: f64, omega_p: f64) -> f64 {
    let kappa_t = (omega_p * omega_p - kz * kz).max(0.0).sqrt();
    match pol {
        Polarization::TE => kz + 2.0 * kz.atan2(kappa_t) - f64::from(m) * PI,
        Polarization::TM => {
            let omega_sq = k * k + kz * kz;
            // -eps * kz with eps = 1 - Omega_P^2 / Omega^2
            let lag = kz * (omega_p * omega_p - omega_sq) / omega_sq;
            kz - 2.0 * lag.atan2(kappa_t) - f64::from(m - 1) * PI
        }
    }
}

/// Frequency of the `m`-th propagative cavity mode, from
/// `r^2 exp(2 i kz) = 1` with the plasma reflection phase. Modes exist only
/// below the transparency edge `kz < Omega_P`.
pub fn photonic_mode(pol: Polarization, m: u32, k: f64, omega_p: f64) -> Result<f64> {
    require_positive("Omega_P", omega_p)?;
    if !(k >= 0.0 && k.is_finite()) {
        return Err(Error::domain("K must be finite and non-negative"));
    }
    let no_solution = || Error::NoSolution { pol, m, k, omega_p };
    if m < first_photonic_index(pol) {
        return Err(no_solution());
    }
    // The phase correction lies in (-pi, pi) for TM and (0, pi) for TE.
    let (lo, hi) = match pol {
        Polarization::TE => (f64::from(m - 1) * PI, f64::from(m) * PI),
        Polarization::TM => ((f64::from(m - 2) * PI).max(1e-12), f64::from(m) * PI),
    };
    if lo >= omega_p {
        return Err(no_solution());
    }
    let hi = hi.min(omega_p);
    let kz = try_find_root_bracketed::<_, Error>(
        |kz| Ok(photonic_phase(pol, m, kz, k, omega_p)),
        lo,
        hi,
        &RootSpec::with_x_tol(1e-14),
    )
    .map_err(|e| match e {
        Error::Numerics {
            source: NumericsError::InvalidBracket { .. },
            ..
        } => no_solution(),
        other => other.context("photonic mode condition"),
    })?;
    Ok(k.hypot(kz))
}

/// The samples of one branch over a `K` grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchSamples {
    pub id: BranchId,
    pub points: Vec<DispersionPoint>,
}

/// Plasmonic pair, interface reference, then photonic TE `1..=max_m` and TM `2..=max_m`.
pub fn default_branches(max_m: u32) -> Vec<BranchId> {
    let mut ids = vec![
        BranchId::PLASMONIC_PLUS,
        BranchId::PLASMONIC_MINUS,
        BranchId::INTERFACE_REFERENCE,
    ];
    for pol in Polarization::ALL {
        for m in first_photonic_index(pol)..=max_m {
            ids.push(BranchId::photonic(pol, m).expect("index in range"));
        }
    }
    ids
}

/// 400 log-spaced points over `[1e-3, 10 max(1, Omega_P)]`.
pub fn default_k_grid(omega_p: f64) -> Vec<f64> {
    log_grid(1e-3, 10.0 * omega_p.max(1.0), 400)
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            let mut grid: Vec<f64> = (0..n)
                .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
                .collect();
            grid[0] = lo;
            grid[n - 1] = hi;
            grid
        }
    }
}

/// Largest `|dOmega / dK|` accepted between neighbouring samples.
const MAX_SLOPE: f64 = 2.0;

fn branch_point(
    branches: &CavityBranches,
    id: BranchId,
    k: f64,
) -> Result<Option<DispersionPoint>> {
    let wp = branches.omega_p();
    let omega = match id.kind {
        BranchKind::PlasmonicPlus => branches.invert(PlasmonBranch::Plus, k)?,
        BranchKind::PlasmonicMinus => branches.invert(PlasmonBranch::Minus, k)?,
        BranchKind::InterfaceReference => omega0(k, wp),
        BranchKind::Photonic => {
            let m = id.m.expect("photonic branches carry m");
            match photonic_mode(id.pol, m, k, wp) {
                Ok(omega) => omega,
                Err(Error::NoSolution { .. }) => return Ok(None),
                Err(e) => return Err(e),
            }
        }
    };
    Ok(Some(DispersionPoint::new(k, omega)))
}

/// Samples each branch on `k_grid`. Photonic branches only have points
/// where the mode exists. Neighbouring samples are checked for jumps.
pub fn sample_dispersion(
    omega_p: f64,
    k_grid: &[f64],
    branches: &[BranchId],
    exec: Execution,
) -> Result<Vec<BranchSamples>> {
    if k_grid.iter().any(|k| !(*k >= 0.0 && k.is_finite())) {
        return Err(Error::domain("K grid must be finite and non-negative"));
    }
    if k_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("K grid must be strictly increasing"));
    }
    let cavity = CavityBranches::new(omega_p)?;
    let mut out = Vec::with_capacity(branches.len());
    for &id in branches {
        let samples = parallel::try_map(exec, k_grid, |&k| branch_point(&cavity, id, k))?;
        for (w, pts) in samples.windows(2).zip(k_grid.windows(2)) {
            if let (Some(p), Some(q)) = (w[0], w[1]) {
                if (q.omega - p.omega).abs() > MAX_SLOPE * (pts[1] - pts[0]) + 1e-9 {
                    return Err(Error::Discontinuity {
                        branch: id.to_string(),
                        k0: p.k,
                        k1: q.k,
                        from: p.omega,
                        to: q.omega,
                    });
                }
            }
        }
        out.push(BranchSamples {
            id,
            points: samples.into_iter().flatten().collect(),
        });
    }
    Ok(out)
}
