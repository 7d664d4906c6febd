use std::f64::consts::PI;

use plasmon_casimir::decomposition::{eta_breakdown, sweep};
use plasmon_casimir::lifshitz::{energy_breakdown, eta_total, PhysicalSetup};
use plasmon_casimir::numerics::QuadratureSpec;
use plasmon_casimir::optics::PlasmaMirror;
use plasmon_casimir::Execution;

/// `eta_E` at `L = lambda_P`, pinned from the polar oracle below.
const GOLDEN_ETA_E: f64 = 0.604_079_541_589;

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

fn panel_rule(edges: &[f64], rule: &[(f64, f64)]) -> Vec<(f64, f64)> {
    edges
        .windows(2)
        .flat_map(|w| {
            let (mid, half) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
            rule.iter().map(move |&(x, wt)| (mid + half * x, half * wt))
        })
        .collect()
}

/// Bulk plasma reflection written with the transmitted wavevector
/// `sqrt(K^2 + eps Xi^2)`, independent of the library's form.
fn log_term(k: f64, xi: f64, wp: f64) -> f64 {
    let eps = 1.0 + wp * wp / (xi * xi);
    let kappa = (k * k + xi * xi).sqrt();
    let kt = (k * k + eps * xi * xi).sqrt();
    let te = (kappa - kt) / (kappa + kt);
    let tm = (eps * kappa - kt) / (eps * kappa + kt);
    let d = (-2.0 * kappa).exp();
    (1.0 - te * te * d).ln() + (1.0 - tm * tm * d).ln()
}

/// `eta_E` in polar coordinates `K = rho cos(t)`, `Xi = rho sin(t)`, with
/// the angle integrated innermost.
fn eta_polar(wp: f64) -> f64 {
    let rule = gauss_legendre(40);
    let mut rho_edges = vec![0.0];
    rho_edges.extend((-8..=0).map(|e| 10f64.powi(e)));
    rho_edges.extend([2.0, 4.0, 8.0, 16.0, 32.0, 64.0]);
    let rho_nodes = panel_rule(&rho_edges, &rule);
    let angle_nodes = panel_rule(&[0.0, PI / 8.0, PI / 4.0, PI / 2.0], &rule);
    let mut total = 0.0;
    for &(rho, wr) in &rho_nodes {
        let mut inner = 0.0;
        for &(t, wt) in &angle_nodes {
            inner += wt * t.cos() * log_term(rho * t.cos(), rho * t.sin(), wp);
        }
        total += wr * rho * rho * inner;
    }
    -180.0 / PI.powi(4) * total
}

#[test]
fn polar_oracle_reproduces_perfect_mirror_normalisation() {
    // r = 1 gives -2 zeta(4) ... normalised to one.
    let eta = eta_polar(1e9);
    assert!((eta - 1.0).abs() < 1e-6, "{eta}");
}

#[test]
fn golden_eta_at_plasma_wavelength() {
    let oracle = eta_polar(2.0 * PI);
    assert!((oracle - GOLDEN_ETA_E).abs() < 1e-8, "oracle {oracle}");
    let eta = eta_total(2.0 * PI, &QuadratureSpec::default()).unwrap();
    assert!(
        (eta.value - oracle).abs() < 1e-8,
        "{} vs {oracle}",
        eta.value
    );
    assert!(eta.abs_error < 1e-7, "{}", eta.abs_error);
}

#[test]
fn independent_paths_agree_across_regimes() {
    let spec = QuadratureSpec::default();
    for wp in [0.05, 1.0, 20.0] {
        let a = eta_total(wp, &spec).unwrap().value;
        let b = eta_polar(wp);
        assert!(((a - b) / b).abs() < 1e-7, "{wp}: {a} vs {b}");
    }
}

#[test]
fn physical_energy_at_plasma_wavelength() {
    let lambda_p = 136e-9;
    let mirror = PlasmaMirror::from_plasma_wavelength(lambda_p).unwrap();
    let setup = PhysicalSetup::new(mirror, lambda_p, 1e-4).unwrap();
    let result = energy_breakdown(&setup, &QuadratureSpec::default()).unwrap();
    assert!((result.eta - GOLDEN_ETA_E).abs() < 1e-8);
    let ideal = result.energy / result.eta;
    assert!(ideal < 0.0);
    // E_Cas scales as L^-3 from its 1 um, 1 cm^2 value.
    let expected = -4.333_752_574_825_845e-14 * (1e-6 / lambda_p).powi(3);
    assert!(
        ((ideal - expected) / expected).abs() < 1e-12,
        "{ideal} vs {expected}"
    );
}

#[test]
fn breakdown_closes_and_sweeps_are_order_independent() {
    let spec = QuadratureSpec::default();
    let b = eta_breakdown(2.0 * PI, &spec).unwrap();
    assert!((b.eta_total - GOLDEN_ETA_E).abs() < 1e-8);
    assert_eq!(b.eta_pl + b.eta_ph, b.eta_pl + (b.eta_total - b.eta_pl));
    let ratios = [0.01, 0.1, 1.0, 10.0];
    let par = sweep(&ratios, &spec, Execution::Parallel).unwrap();
    let seq = sweep(&ratios, &spec, Execution::Sequential).unwrap();
    assert_eq!(par, seq);
    assert_eq!(par[2], b);
}
