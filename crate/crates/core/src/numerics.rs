//! Numeric kernel shared by the physics modules.
//!
//! * adaptive Gauss–Kronrod (10/21) quadrature on finite intervals, with
//!   signed bounds;
//! * semi-infinite quadrature that extends the integration range panel by
//!   panel until an `exp(-sqrt(x))` envelope certifies the remaining tail;
//! * Brent's bracketed root finder;
//! * least-squares fits of `y = c * x^p` (optionally with one correction
//!   term).
//!
//! Every routine exists in an infallible form taking `FnMut(f64) -> f64`
//! and a `try_` form whose integrand may itself fail; the latter is what
//! nested integrals use.

use thiserror::Error;

/// Failures of the numeric kernel.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (error estimate {error_estimate:.3e}, tolerance {tolerance:.3e})"
    )]
    ConvergenceFailure {
        subdivisions: usize,
        error_estimate: f64,
        tolerance: f64,
    },
    #[error("integrand returned a non-finite value at x = {x}")]
    NonFiniteIntegrand { x: f64 },
    #[error(
        "integrand does not decay beyond x = {x}: |f| went from {previous:.3e} to {current:.3e}"
    )]
    TailBoundViolated { x: f64, previous: f64, current: f64 },
    #[error("tail bound not reached after extending the range to x = {x}")]
    TailNotReached { x: f64 },
    #[error("root is not bracketed: f({lo}) = {f_lo:.3e}, f({hi}) = {f_hi:.3e}")]
    InvalidBracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },
    #[error("root finder did not converge in {iterations} iterations (bracket width {width:.3e})")]
    RootNotConverged { iterations: usize, width: f64 },
    #[error("function returned a non-finite value at x = {x}")]
    NonFiniteFunction { x: f64 },
    #[error("degenerate fit: {0}")]
    DegenerateFit(&'static str),
    #[error("invalid numeric specification: {0}")]
    InvalidSpec(&'static str),
}

/// Tolerance contract for the quadrature routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Abscissa (relative to the lower bound) beyond which semi-infinite
    /// integrands are assumed to follow their `exp(-sqrt(x))` envelope.
    pub tail_threshold: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            max_subdivisions: 1000,
            tail_threshold: 8.0,
        }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Result<Self, NumericsError> {
        let spec = Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Spec with `rel_tol = tol` and `abs_tol = tol / 10`.
    pub fn with_tolerance(tol: f64) -> Result<Self, NumericsError> {
        Self::new(tol / 10.0, tol)
    }

    pub fn validate(&self) -> Result<(), NumericsError> {
        let finite_non_negative = |v: f64| v.is_finite() && v >= 0.0;
        if !finite_non_negative(self.abs_tol) || !finite_non_negative(self.rel_tol) {
            return Err(NumericsError::InvalidSpec(
                "tolerances must be finite and non-negative",
            ));
        }
        if self.abs_tol == 0.0 && self.rel_tol == 0.0 {
            return Err(NumericsError::InvalidSpec(
                "abs_tol and rel_tol cannot both be zero",
            ));
        }
        if self.max_subdivisions == 0 {
            return Err(NumericsError::InvalidSpec(
                "max_subdivisions must be at least 1",
            ));
        }
        if !(self.tail_threshold.is_finite() && self.tail_threshold > 0.0) {
            return Err(NumericsError::InvalidSpec(
                "tail_threshold must be positive",
            ));
        }
        Ok(())
    }

    fn tolerance_for(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Tolerance contract for [`find_root_bracketed`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootSpec {
    pub x_tol: f64,
    pub f_tol: f64,
    pub max_iterations: usize,
}

impl Default for RootSpec {
    fn default() -> Self {
        Self {
            x_tol: 1e-12,
            f_tol: 0.0,
            max_iterations: 200,
        }
    }
}

impl RootSpec {
    pub fn with_x_tol(x_tol: f64) -> Self {
        Self {
            x_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), NumericsError> {
        if !(self.x_tol > 0.0 && self.x_tol.is_finite()) {
            return Err(NumericsError::InvalidSpec("x_tol must be positive"));
        }
        if !(self.f_tol >= 0.0) {
            return Err(NumericsError::InvalidSpec("f_tol must be non-negative"));
        }
        if self.max_iterations == 0 {
            return Err(NumericsError::InvalidSpec(
                "max_iterations must be at least 1",
            ));
        }
        Ok(())
    }
}

/// Integral value with its absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimate {
    pub value: f64,
    pub abs_error: f64,
}

impl std::ops::Add for Estimate {
    type Output = Estimate;

    fn add(self, rhs: Estimate) -> Estimate {
        Estimate {
            value: self.value + rhs.value,
            abs_error: self.abs_error + rhs.abs_error,
        }
    }
}

impl std::ops::Neg for Estimate {
    type Output = Estimate;

    fn neg(self) -> Estimate {
        Estimate {
            value: -self.value,
            abs_error: self.abs_error,
        }
    }
}

impl Estimate {
    pub fn scale(self, factor: f64) -> Estimate {
        Estimate {
            value: factor * self.value,
            abs_error: factor.abs() * self.abs_error,
        }
    }
}

// Kronrod abscissae on [0, 1]; odd indices are the 10-point Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_745_892_366,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs_value: f64,
}

fn checked<E: From<NumericsError>>(x: f64, y: f64) -> Result<f64, E> {
    if y.is_finite() {
        Ok(y)
    } else {
        Err(NumericsError::NonFiniteIntegrand { x }.into())
    }
}

fn kronrod21<F, E>(f: &mut F, a: f64, b: f64) -> Result<Panel, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<NumericsError>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = checked(center, f(center)?)?;
    let mut kronrod = WGK[10] * f_center;
    let mut gauss = 0.0;
    let mut abs_sum = kronrod.abs();
    let mut values = [(0.0, 0.0); 10];
    for (j, (&x, &w)) in XGK[..10].iter().zip(&WGK[..10]).enumerate() {
        let dx = half * x;
        let (xl, xr) = (center - dx, center + dx);
        let fl = checked(xl, f(xl)?)?;
        let fr = checked(xr, f(xr)?)?;
        values[j] = (fl, fr);
        kronrod += w * (fl + fr);
        abs_sum += w * (fl.abs() + fr.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (fl + fr);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (f_center - mean).abs();
    for (j, &(fl, fr)) in values.iter().enumerate() {
        asc += WGK[j] * ((fl - mean).abs() + (fr - mean).abs());
    }

    let value = kronrod * half;
    let abs_value = abs_sum * half.abs();
    let asc = asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    if abs_value > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * abs_value);
    }
    Ok(Panel {
        a,
        b,
        value,
        error,
        abs_value,
    })
}

/// Adaptive quadrature over `[a, b]` with an integrand that may fail.
///
/// Reversed bounds return the negated integral.
pub fn try_integrate_finite<F, E>(
    mut f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<NumericsError>,
{
    spec.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(NumericsError::InvalidSpec("finite bounds required").into());
    }
    if a == b {
        return Ok(Estimate::default());
    }
    if a > b {
        return try_integrate_finite(f, b, a, spec).map(|e| -e);
    }

    let mut panels = vec![kronrod21(&mut f, a, b)?];
    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let tolerance = spec.tolerance_for(value);
        if error <= tolerance {
            return Ok(Estimate {
                value,
                abs_error: error,
            });
        }
        // Once every remaining panel is at roundoff level no bisection can help.
        let roundoff_floor: f64 = panels
            .iter()
            .map(|p| 50.0 * f64::EPSILON * p.abs_value)
            .sum();
        if panels.len() >= spec.max_subdivisions || error <= roundoff_floor {
            return Err(NumericsError::ConvergenceFailure {
                subdivisions: panels.len(),
                error_estimate: error,
                tolerance,
            }
            .into());
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|(_, p), (_, q)| p.error.total_cmp(&q.error))
            .map(|(i, _)| i)
            .expect("at least one panel");
        let panel = panels.swap_remove(worst);
        let mid = 0.5 * (panel.a + panel.b);
        if mid <= panel.a || mid >= panel.b {
            return Err(NumericsError::ConvergenceFailure {
                subdivisions: panels.len() + 1,
                error_estimate: error,
                tolerance,
            }
            .into());
        }
        panels.push(kronrod21(&mut f, panel.a, mid)?);
        panels.push(kronrod21(&mut f, mid, panel.b)?);
    }
}

/// Adaptive quadrature over `[a, b]`.
pub fn integrate_finite<F>(
    mut f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate, NumericsError>
where
    F: FnMut(f64) -> f64,
{
    try_integrate_finite(|x| Ok(f(x)), a, b, spec)
}

const TAIL_SAMPLES: usize = 5;
const MAX_TAIL_PANELS: usize = 64;

/// Largest `|f(x)| * exp(sqrt(x - origin))` over a few points of `[lo, hi]`.
fn envelope_constant<F, E>(f: &mut F, origin: f64, lo: f64, hi: f64) -> Result<(f64, f64), E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<NumericsError>,
{
    let mut constant: f64 = 0.0;
    let mut largest: f64 = 0.0;
    for i in 0..TAIL_SAMPLES {
        let x = lo + (hi - lo) * (i + 1) as f64 / TAIL_SAMPLES as f64;
        let y = checked::<E>(x, f(x)?)?.abs();
        largest = largest.max(y);
        constant = constant.max(y * (x - origin).sqrt().exp());
    }
    Ok((constant, largest))
}

/// Quadrature over `[a, inf)` with an integrand that may fail.
///
/// The range `[a, a + tail_threshold]` is integrated first; panels of
/// doubling length are then appended until the bound
/// `C * 2 (sqrt(T) + 1) exp(-sqrt(T))` on the remaining tail, with `C`
/// fitted to samples near the current end `T`, drops below a tenth of the
/// tolerance.
pub fn try_integrate_semi_infinite<F, E>(
    mut f: F,
    a: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<NumericsError>,
{
    spec.validate()?;
    if !a.is_finite() {
        return Err(NumericsError::InvalidSpec("finite lower bound required").into());
    }
    let mut end = a + spec.tail_threshold;
    let mut total = try_integrate_finite(&mut f, a, end, spec)?;
    let mut previous_largest = f64::INFINITY;
    for _ in 0..MAX_TAIL_PANELS {
        let width = end - a;
        let (constant, largest) = envelope_constant(&mut f, a, end - 0.5 * width.min(1.0), end)?;
        let t = width;
        let tail_bound = constant * 2.0 * (t.sqrt() + 1.0) * (-t.sqrt()).exp();
        let tolerance = 0.1 * spec.tolerance_for(total.value);
        if tail_bound <= tolerance {
            total.abs_error += tail_bound;
            return Ok(total);
        }
        if largest > previous_largest && largest > tolerance {
            return Err(NumericsError::TailBoundViolated {
                x: end,
                previous: previous_largest,
                current: largest,
            }
            .into());
        }
        previous_largest = largest;
        let next = a + 2.0 * width;
        total = total + try_integrate_finite(&mut f, end, next, spec)?;
        end = next;
    }
    Err(NumericsError::TailNotReached { x: end }.into())
}

/// Quadrature over `[a, inf)` for integrands decaying at least like
/// `exp(-sqrt(x))`.
pub fn integrate_semi_infinite<F>(
    mut f: F,
    a: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate, NumericsError>
where
    F: FnMut(f64) -> f64,
{
    try_integrate_semi_infinite(|x| Ok(f(x)), a, spec)
}

fn finite_value<E: From<NumericsError>>(x: f64, y: f64) -> Result<f64, E> {
    if y.is_finite() {
        Ok(y)
    } else {
        Err(NumericsError::NonFiniteFunction { x }.into())
    }
}

/// Brent's method on a bracket `[lo, hi]` for a function that may fail.
pub fn try_find_root_bracketed<G, E>(mut g: G, lo: f64, hi: f64, spec: &RootSpec) -> Result<f64, E>
where
    G: FnMut(f64) -> Result<f64, E>,
    E: From<NumericsError>,
{
    spec.validate()?;
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = finite_value::<E>(a, g(a)?)?;
    let mut fb = finite_value::<E>(b, g(b)?)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(NumericsError::InvalidBracket {
            lo: a,
            hi: b,
            f_lo: fa,
            f_hi: fb,
        }
        .into());
    }

    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..spec.max_iterations {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * spec.x_tol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 || fb.abs() <= spec.f_tol {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                // secant
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                // inverse quadratic interpolation
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = finite_value::<E>(b, g(b)?)?;
    }
    Err(NumericsError::RootNotConverged {
        iterations: spec.max_iterations,
        width: (c - b).abs(),
    }
    .into())
}

/// Brent's method on a bracket `[lo, hi]`; the result always lies inside it.
pub fn find_root_bracketed<G>(
    mut g: G,
    lo: f64,
    hi: f64,
    spec: &RootSpec,
) -> Result<f64, NumericsError>
where
    G: FnMut(f64) -> f64,
{
    try_find_root_bracketed(|x| Ok(g(x)), lo, hi, spec)
}

/// Result of a power-law least-squares fit.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PowerLawFit {
    /// Leading coefficient `c` of `c * x^p`.
    pub coefficient: f64,
    /// Coefficient `d` of the correction term `d * x^q`, when one was fitted.
    pub correction: Option<f64>,
    /// Euclidean norm of the residual vector.
    pub residual_norm: f64,
    /// `residual_norm / |y|`.
    pub relative_residual: f64,
}

fn check_samples(samples: &[(f64, f64)], minimum: usize) -> Result<(), NumericsError> {
    if samples.len() < minimum {
        return Err(NumericsError::DegenerateFit("not enough samples"));
    }
    if samples
        .iter()
        .any(|&(x, y)| !(x > 0.0 && x.is_finite() && y.is_finite()))
    {
        return Err(NumericsError::DegenerateFit(
            "samples need finite y and x > 0",
        ));
    }
    let x0 = samples[0].0;
    if samples.iter().all(|&(x, _)| x == x0) {
        return Err(NumericsError::DegenerateFit("all abscissae are identical"));
    }
    Ok(())
}

fn residuals(samples: &[(f64, f64)], model: impl Fn(f64) -> f64) -> (f64, f64) {
    let (res2, y2) = samples.iter().fold((0.0, 0.0), |(r, n), &(x, y)| {
        let d = y - model(x);
        (r + d * d, n + y * y)
    });
    let norm = res2.sqrt();
    let relative = if y2 > 0.0 { norm / y2.sqrt() } else { norm };
    (norm, relative)
}

/// Least-squares `c` for the model `y = c * x^exponent`.
pub fn fit_scaling_coefficient(
    samples: &[(f64, f64)],
    exponent: f64,
) -> Result<PowerLawFit, NumericsError> {
    check_samples(samples, 2)?;
    let (num, den) = samples.iter().fold((0.0, 0.0), |(n, d), &(x, y)| {
        let basis = x.powf(exponent);
        (n + y * basis, d + basis * basis)
    });
    let coefficient = num / den;
    let (residual_norm, relative_residual) = residuals(samples, |x| coefficient * x.powf(exponent));
    Ok(PowerLawFit {
        coefficient,
        correction: None,
        residual_norm,
        relative_residual,
    })
}

/// Least-squares `(c, d)` for `y = c * x^exponent + d * x^correction_exponent`.
pub fn fit_scaling_with_correction(
    samples: &[(f64, f64)],
    exponent: f64,
    correction_exponent: f64,
) -> Result<PowerLawFit, NumericsError> {
    check_samples(samples, 3)?;
    if exponent == correction_exponent {
        return Err(NumericsError::DegenerateFit("exponents must differ"));
    }
    // Normal equations, each column scaled to unit norm for conditioning.
    let cols: Vec<(f64, f64, f64)> = samples
        .iter()
        .map(|&(x, y)| (x.powf(exponent), x.powf(correction_exponent), y))
        .collect();
    let n1 = cols.iter().map(|c| c.0 * c.0).sum::<f64>().sqrt();
    let n2 = cols.iter().map(|c| c.1 * c.1).sum::<f64>().sqrt();
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(u, v, y) in &cols {
        let (u, v) = (u / n1, v / n2);
        a11 += u * u;
        a12 += u * v;
        a22 += v * v;
        b1 += u * y;
        b2 += v * y;
    }
    let det = a11 * a22 - a12 * a12;
    if det.abs() < 1e-14 {
        return Err(NumericsError::DegenerateFit(
            "basis functions are collinear on the samples",
        ));
    }
    let coefficient = (a22 * b1 - a12 * b2) / det / n1;
    let correction = (a11 * b2 - a12 * b1) / det / n2;
    let (residual_norm, relative_residual) = residuals(samples, |x| {
        coefficient * x.powf(exponent) + correction * x.powf(correction_exponent)
    });
    Ok(PowerLawFit {
        coefficient,
        correction: Some(correction),
        residual_norm,
        relative_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    /// Romberg table on the trapezoid rule, halving the step until two
    /// successive diagonal entries agree to `tol`.
    fn romberg(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        let mut rows: Vec<Vec<f64>> = vec![vec![0.5 * (b - a) * (f(a) + f(b))]];
        let mut n = 1usize;
        for level in 1..25 {
            let h = (b - a) / (2 * n) as f64;
            let mid: f64 = (0..n).map(|i| f(a + (2 * i + 1) as f64 * h)).sum();
            let mut row = vec![0.5 * rows[level - 1][0] + h * mid];
            for k in 1..=level {
                let p = 4f64.powi(k as i32);
                row.push((p * row[k - 1] - rows[level - 1][k - 1]) / (p - 1.0));
            }
            n *= 2;
            let done = (row[level] - rows[level - 1][level - 1]).abs() < tol;
            rows.push(row);
            if done && level > 4 {
                break;
            }
        }
        *rows.last().unwrap().last().unwrap()
    }

    #[test]
    fn linear_integrand_is_exact() {
        let r = integrate_finite(|x| x, 0.0, 1.0, &spec()).unwrap();
        assert_relative_eq!(r.value, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn inverse_sqrt_endpoint_singularity() {
        let r = integrate_finite(|x| 0.5 / x.sqrt(), 0.0, 1.0, &spec()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn quarter_power_endpoint_matches_romberg_oracle() {
        let f = |x: f64| (-(-x.sqrt()).exp_m1()).sqrt() - 1.0;
        // x = t^4 removes the x^(1/4) endpoint behaviour for the oracle.
        let oracle = romberg(
            |t| 4.0 * t.powi(3) * f(t.powi(4)),
            0.0,
            200f64.powf(0.25),
            1e-12,
        );
        assert_relative_eq!(oracle, -1.086_755_554_653_425_1, epsilon = 1e-10);
        let tight = QuadratureSpec::new(1e-10, 1e-12).unwrap();
        let r = integrate_finite(f, 0.0, 200.0, &tight).unwrap();
        assert!((r.value - oracle).abs() < 1e-9, "{} vs {}", r.value, oracle);
    }

    #[test]
    fn reversed_bounds_negate() {
        let forward = integrate_finite(|x| x.sin(), 0.3, 2.0, &spec()).unwrap();
        let backward = integrate_finite(|x| x.sin(), 2.0, 0.3, &spec()).unwrap();
        assert_eq!(forward.value, -backward.value);
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let err = integrate_finite(|x| if x > 0.5 { f64::NAN } else { x }, 0.0, 1.0, &spec())
            .unwrap_err();
        assert!(matches!(err, NumericsError::NonFiniteIntegrand { .. }));
    }

    #[test]
    fn unreachable_tolerance_is_a_convergence_failure() {
        let spec = QuadratureSpec::new(1e-16, 1e-15).unwrap();
        let err = integrate_finite(|x| (1.0 + x).ln() * x.cos(), 0.0, 50.0, &spec).unwrap_err();
        assert!(
            matches!(err, NumericsError::ConvergenceFailure { .. }),
            "{err:?}"
        );
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(QuadratureSpec::new(0.0, 0.0).is_err());
        let bad = QuadratureSpec {
            max_subdivisions: 0,
            ..QuadratureSpec::default()
        };
        assert!(bad.validate().is_err());
        assert!(RootSpec::with_x_tol(0.0).validate().is_err());
    }

    #[test]
    fn semi_infinite_stretched_exponential() {
        let r = integrate_semi_infinite(|x| (-x.sqrt()).exp(), 0.0, &spec()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn semi_infinite_exponential() {
        let r = integrate_semi_infinite(|x| (-x).exp(), 0.0, &spec()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn semi_infinite_short_distance_integrand_matches_truncated_oracle() {
        let f = |z: f64| {
            let e = (-z.sqrt()).exp();
            (1.0 + e).sqrt() + (1.0 - e).sqrt() - 2.0
        };
        // Truncation at z = 500 leaves a tail of order exp(-2 sqrt(500)) ~ 4e-20.
        let oracle = romberg(
            |t| 4.0 * t.powi(3) * f(t.powi(4)),
            0.0,
            500f64.powf(0.25),
            1e-13,
        );
        let r =
            integrate_semi_infinite(f, 0.0, &QuadratureSpec::new(1e-12, 1e-11).unwrap()).unwrap();
        assert!(r.value < 0.0);
        assert!(
            (r.value - oracle).abs() < 1e-10,
            "{} vs {}",
            r.value,
            oracle
        );
    }

    #[test]
    fn growing_tail_is_rejected() {
        let err = integrate_semi_infinite(|x| 1e-3 * x, 0.0, &spec()).unwrap_err();
        assert!(
            matches!(err, NumericsError::TailBoundViolated { .. }),
            "{err:?}"
        );
    }

    #[test]
    fn roots_of_simple_functions() {
        let r = find_root_bracketed(|x| x * x - 2.0, 1.0, 2.0, &RootSpec::default()).unwrap();
        assert_relative_eq!(r, std::f64::consts::SQRT_2, epsilon = 1e-12);
        let r = find_root_bracketed(f64::cos, 1.0, 2.0, &RootSpec::default()).unwrap();
        assert_relative_eq!(r, std::f64::consts::FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn same_sign_bracket_is_invalid() {
        let err =
            find_root_bracketed(|x| x * x + 1.0, -1.0, 1.0, &RootSpec::default()).unwrap_err();
        assert!(matches!(err, NumericsError::InvalidBracket { .. }));
    }

    #[test]
    fn exact_power_law_fits() {
        let fit = fit_scaling_coefficient(&[(1.0, 2.0), (4.0, 4.0), (9.0, 6.0)], 0.5).unwrap();
        assert_relative_eq!(fit.coefficient, 2.0, epsilon = 1e-14);
        assert!(fit.relative_residual < 1e-14);
        let fit = fit_scaling_coefficient(&[(1.0, 3.0), (2.0, 6.0)], 1.0).unwrap();
        assert_relative_eq!(fit.coefficient, 3.0, epsilon = 1e-14);
    }

    #[test]
    fn correction_fit_recovers_both_terms() {
        let samples: Vec<(f64, f64)> = [1e3, 1e4, 1e5]
            .iter()
            .map(|&x: &f64| (x, -29.75 * x.sqrt() + 60.0))
            .collect();
        let fit = fit_scaling_with_correction(&samples, 0.5, 0.0).unwrap();
        assert_relative_eq!(fit.coefficient, -29.75, max_relative = 1e-12);
        assert_relative_eq!(fit.correction.unwrap(), 60.0, max_relative = 1e-9);
    }

    #[test]
    fn identical_abscissae_are_degenerate() {
        let err = fit_scaling_coefficient(&[(2.0, 1.0), (2.0, 1.1), (2.0, 0.9)], 0.5).unwrap_err();
        assert!(matches!(err, NumericsError::DegenerateFit(_)));
    }

    proptest! {
        #[test]
        fn quadrature_is_additive(a in -3.0f64..0.0, b in 0.0f64..2.0, c in 2.0f64..5.0, w in 0.1f64..4.0) {
            let f = |x: f64| (w * x).sin() * (-0.1 * x * x).exp();
            let s = spec();
            let ab = integrate_finite(f, a, b, &s).unwrap();
            let bc = integrate_finite(f, b, c, &s).unwrap();
            let ac = integrate_finite(f, a, c, &s).unwrap();
            let tol = 2.0 * (s.tolerance_for(ab.value) + s.tolerance_for(bc.value) + s.tolerance_for(ac.value));
            prop_assert!((ab.value + bc.value - ac.value).abs() <= tol);
        }

        #[test]
        fn quadrature_is_linear(scale in -50.0f64..50.0) {
            let s = spec();
            let base = integrate_finite(|x| x.exp() * x.cos(), 0.0, 3.0, &s).unwrap();
            let scaled = integrate_finite(|x| scale * x.exp() * x.cos(), 0.0, 3.0, &s).unwrap();
            prop_assert!((scaled.value - scale * base.value).abs() <= 2.0 * s.tolerance_for(scaled.value) + 1e-12);
        }

        #[test]
        fn root_stays_in_bracket_and_is_deterministic(shift in -0.9f64..0.9, lo in -5.0f64..-1.0, hi in 1.0f64..5.0) {
            let g = |x: f64| (x - shift).powi(3) + 0.1 * (x - shift);
            let r1 = find_root_bracketed(g, lo, hi, &RootSpec::default()).unwrap();
            let r2 = find_root_bracketed(g, lo, hi, &RootSpec::default()).unwrap();
            prop_assert!(r1 >= lo && r1 <= hi);
            prop_assert_eq!(r1.to_bits(), r2.to_bits());
            prop_assert!((r1 - shift).abs() < 1e-10);
        }
    }
}
