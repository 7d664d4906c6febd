use std::f64::consts::PI;
use std::process::{Command, Output};

use serde_json::Value;

fn casimir(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_casimir"))
        .args(args)
        .env_remove("CASIMIR_TOL")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Header and parsed rows of a CSV document.
fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    assert!(text.ends_with('\n') && !text.contains('\r'));
    let mut lines = text.lines();
    let header = lines
        .next()
        .unwrap()
        .split(',')
        .map(str::to_owned)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect();
    (header, rows)
}

fn numeric_rows(text: &str) -> Vec<Vec<f64>> {
    parse_csv(text)
        .1
        .iter()
        .map(|r| r.iter().map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn eta_parameterisations_agree() {
    let wp = format!("{}", 2.0 * PI);
    let a = stdout(&casimir(&["eta", "--omega-p-l", &wp]));
    let b = stdout(&casimir(&[
        "eta",
        "--lambda-p",
        "136e-9",
        "--separation",
        "136e-9",
    ]));
    let c = stdout(&casimir(&["eta", "--l-over-lambda-p", "1"]));
    let (ra, rb, rc) = (numeric_rows(&a), numeric_rows(&b), numeric_rows(&c));
    assert_eq!(ra.len(), 1);
    for i in 0..5 {
        assert!((ra[0][i] - rb[0][i]).abs() <= 1e-12 * ra[0][i].abs().max(1.0));
        assert!((ra[0][i] - rc[0][i]).abs() <= 1e-12 * ra[0][i].abs().max(1.0));
    }
    assert!((ra[0][1] - 0.604_079_541_589).abs() < 1e-8);
    assert!(ra[0][2] < 0.0 && ra[0][3] > 0.0 && ra[0][4] > 0.0);
}

#[test]
fn eta_rejects_bad_parameters() {
    let out = casimir(&["eta", "--omega-p-l", "-1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("Omega_P must be positive"));

    let out = casimir(&["eta", "--omega-p-l", "1", "--l-over-lambda-p", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = casimir(&["eta", "--lambda-p", "136e-9"]);
    assert_eq!(out.status.code(), Some(2));
    let out = casimir(&["eta"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn eta_json_carries_schema_version() {
    let text = stdout(&casimir(&[
        "eta",
        "--l-over-lambda-p",
        "0.5",
        "--format",
        "json",
    ]));
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["schema_version"], "1");
    assert_eq!(v["command"], "eta");
    let total = v["eta_total"].as_f64().unwrap();
    let pl = v["eta_pl"].as_f64().unwrap();
    let ph = v["eta_ph"].as_f64().unwrap();
    assert_eq!(ph, total - pl);
    assert!(v["eta_ev_error"].as_f64().unwrap() >= 0.0);
}

#[test]
fn short_distance_sweep_changes_sign_near_008() {
    let text = stdout(&casimir(&[
        "sweep",
        "--range",
        "1e-3:1e-1",
        "--points",
        "50",
    ]));
    let (header, _) = parse_csv(&text);
    assert_eq!(
        header.join(","),
        "L_over_lambdaP,eta_total,eta_pl,eta_ph,eta_ev"
    );
    let rows = numeric_rows(&text);
    assert_eq!(rows.len(), 50);
    assert!(rows.windows(2).all(|w| w[1][0] > w[0][0]));
    assert!((rows[0][0] - 1e-3).abs() < 1e-15 && (rows[49][0] - 0.1).abs() < 1e-12);
    let flips: Vec<_> = rows
        .windows(2)
        .filter(|w| (w[0][2] > 0.0) != (w[1][2] > 0.0))
        .map(|w| w[0][0])
        .collect();
    assert_eq!(flips.len(), 1);
    assert!(rows[0][2] > 0.0);
    assert!((flips[0] - 0.08).abs() < 0.015, "{flips:?}");
    for r in &rows {
        assert!(r[1] > 0.0 && r[1] < 1.0);
        assert!(r[4] > 0.0);
    }
}

#[test]
fn long_distance_sweep_grows_like_square_root() {
    let text = stdout(&casimir(&[
        "sweep",
        "--range",
        "1:100",
        "--points",
        "30",
        "--spacing",
        "linear",
    ]));
    let rows = numeric_rows(&text);
    assert_eq!(rows.len(), 30);
    assert!(rows.iter().all(|r| r[2] < 0.0));
    assert!(rows.windows(2).all(|w| w[1][2] < w[0][2]));
    // eta_pl / sqrt(Omega_P) settles towards -Gamma.
    let scaled: Vec<f64> = rows
        .iter()
        .map(|r| r[2] / (2.0 * PI * r[0]).sqrt())
        .collect();
    assert!(scaled.windows(2).all(|w| w[1] < w[0]));
    assert!(scaled[29] > -29.752 && scaled[29] < -25.0, "{}", scaled[29]);
}

#[test]
fn sweep_rejects_empty_and_reversed_ranges() {
    for range in ["1:1", "2:1", "0:1", "-1:1"] {
        let out = casimir(&["sweep", "--range", range]);
        assert_eq!(out.status.code(), Some(2), "{range}");
    }
    let out = casimir(&["sweep", "--range", "1-2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_in_metres_matches_ratios() {
    let a = stdout(&casimir(&["sweep", "--range", "0.1:1", "--points", "4"]));
    let b = stdout(&casimir(&[
        "sweep",
        "--range",
        "13.6e-9:136e-9",
        "--points",
        "4",
        "--lambda-p",
        "136e-9",
    ]));
    let (ra, rb) = (numeric_rows(&a), numeric_rows(&b));
    for (x, y) in ra.iter().zip(&rb) {
        for (u, v) in x.iter().zip(y) {
            assert!((u - v).abs() <= 1e-12 * u.abs().max(1.0));
        }
    }
}

#[test]
fn outputs_are_deterministic_and_written_atomically() {
    let dir = tempfile::tempdir().unwrap();
    let par = dir.path().join("par.csv");
    let seq = dir.path().join("seq.csv");
    let args = ["sweep", "--range", "0.01:10", "--points", "12"];
    let mut p = args.to_vec();
    p.extend(["--output", par.to_str().unwrap()]);
    let mut s = args.to_vec();
    s.extend(["--output", seq.to_str().unwrap(), "--sequential"]);
    assert!(casimir(&p).status.success());
    assert!(casimir(&s).status.success());
    let first = std::fs::read(&par).unwrap();
    assert_eq!(first, std::fs::read(&seq).unwrap());
    assert!(casimir(&p).status.success());
    assert_eq!(first, std::fs::read(&par).unwrap());
    // Only the two outputs remain; no temporary files are left behind.
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 2);

    let failed = dir.path().join("failed.csv");
    let out = casimir(&[
        "sweep",
        "--range",
        "0.01:10",
        "--points",
        "3",
        "--tol",
        "1e-15",
        "--output",
        failed.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!failed.exists());
}

#[test]
fn dispersion_export_structure() {
    let text = stdout(&casimir(&["dispersion", "--l-over-lambda-p", "1.5"]));
    let (header, rows) = parse_csv(&text);
    assert_eq!(header.join(","), "branch,pol,m,K,Omega,sector");
    let of =
        |branch: &str| -> Vec<&Vec<String>> { rows.iter().filter(|r| r[0] == branch).collect() };
    let plus = of("plasmonic_plus");
    assert_eq!(plus.len(), 400);
    assert_eq!(plus.windows(2).filter(|w| w[0][5] != w[1][5]).count(), 1);
    assert!(of("plasmonic_minus").iter().all(|r| r[5] == "evanescent"));
    assert_eq!(of("interface_reference").len(), 400);
    let photonic = of("photonic");
    assert!(!photonic.is_empty());
    assert!(photonic.iter().all(|r| r[5] == "propagative"));
    assert!(photonic.iter().any(|r| r[1] == "TE" && r[2] == "1"));
    assert!(photonic.iter().all(|r| !(r[1] == "TM" && r[2] == "1")));
    for r in &rows {
        assert_eq!(r[2].is_empty(), r[0] != "photonic");
        assert!(r[3].parse::<f64>().is_ok() && r[4].parse::<f64>().is_ok());
    }
}

#[test]
fn dispersion_json_and_mode_limit() {
    let text = stdout(&casimir(&[
        "dispersion",
        "--omega-p-l",
        "30",
        "--points",
        "20",
        "--max-photonic-m",
        "2",
        "--format",
        "json",
    ]));
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["schema_version"], "1");
    let branches = v["branches"].as_array().unwrap();
    // plus, minus, reference, TE 1..2, TM 2
    assert_eq!(branches.len(), 6);
    assert_eq!(branches[0]["branch"], "plasmonic_plus");
    assert!(branches[0]["m"].is_null());
}

#[test]
fn constants_report() {
    let text = stdout(&casimir(&["constants"]));
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["schema_version"], "1");
    let field = |k: &str| v[k].as_f64().unwrap();
    assert!((field("alpha") - 1.193).abs() < 1e-3);
    assert!((field("gamma") / 29.752 - 1.0).abs() < 5e-3);
    assert!((field("beta_ev") / 1.62399 - 1.0).abs() < 1e-3);
    assert!((field("sign_change_L_over_lambdaP") - 0.08).abs() < 0.015);
    assert!(field("gamma_fit_relative_residual") < 0.01);
    for item in ["alpha", "gamma", "beta_ev", "sign_change"] {
        assert!(v["wall_clock_s"][item].as_f64().unwrap() >= 0.0);
    }
    let out = casimir(&["constants", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_passes_and_catches_injected_fault() {
    let text = stdout(&casimir(&["verify"]));
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["passed"], true);
    assert!(v["checks"].as_array().unwrap().len() >= 10);

    let out = casimir(&["verify", "--inject-fault", "continuation-sign"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let failed: Vec<_> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap().to_owned())
        .collect();
    assert_eq!(failed, ["g_+ continuation"]);
}

#[test]
fn verify_csv_round_trips() {
    let text = stdout(&casimir(&["verify", "--format", "csv"]));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("check,passed,detail"));
    assert!(lines.all(|l| l.contains(",true,")));
}

#[test]
fn impossible_tolerance_is_a_numeric_failure() {
    let out = casimir(&["verify", "--tol", "1e-15"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("integral"), "{}", stderr(&out));

    let out = Command::new(env!("CARGO_BIN_EXE_casimir"))
        .args(["eta", "--omega-p-l", "1"])
        .env("CASIMIR_TOL", "1e-15")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("integral"), "{}", stderr(&out));

    let out = Command::new(env!("CARGO_BIN_EXE_casimir"))
        .args(["eta", "--omega-p-l", "1", "--tol", "1e-8"])
        .env("CASIMIR_TOL", "1e-15")
        .output()
        .unwrap();
    assert!(out.status.success());
}

#[test]
fn invalid_tolerance_is_an_argument_error() {
    let out = casimir(&["eta", "--omega-p-l", "1", "--tol", "-1"]);
    assert_eq!(out.status.code(), Some(2));
}
