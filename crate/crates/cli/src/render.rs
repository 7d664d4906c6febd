use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use plasmon_casimir::decomposition::{AsymptoticReport, EtaBreakdown};
use plasmon_casimir::modes::BranchSamples;
use plasmon_casimir::verify::VerifyReport;
use serde::Serialize;
use serde_json::{json, Value};

use crate::CliError;

pub const SCHEMA_VERSION: &str = "1";

pub const SWEEP_HEADER: &str = "L_over_lambdaP,eta_total,eta_pl,eta_ph,eta_ev";
pub const ETA_HEADER: &str =
    "L_over_lambdaP,eta_total,eta_pl,eta_ph,eta_ev,eta_total_err,eta_pl_err,eta_ph_err,eta_ev_err";
pub const DISPERSION_HEADER: &str = "branch,pol,m,K,Omega,sector";
pub const VERIFY_HEADER: &str = "check,passed,detail";

/// Twelve significant digits in scientific notation.
fn sci(v: f64) -> String {
    format!("{v:.11e}")
}

fn csv_row(fields: impl IntoIterator<Item = String>) -> String {
    let mut line = fields.into_iter().collect::<Vec<_>>().join(",");
    line.push('\n');
    line
}

fn json_document(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    text.push('\n');
    text
}

fn with_schema<T: Serialize>(command: &str, body: T) -> Value {
    let mut value = json!({ "schema_version": SCHEMA_VERSION, "command": command });
    let extra = serde_json::to_value(body).expect("report types serialize");
    if let (Value::Object(target), Value::Object(source)) = (&mut value, extra) {
        target.extend(source);
    }
    value
}

pub fn eta_csv(b: &EtaBreakdown) -> String {
    let mut out = String::from(ETA_HEADER);
    out.push('\n');
    out += &csv_row(
        [
            b.l_over_lambda_p,
            b.eta_total,
            b.eta_pl,
            b.eta_ph,
            b.eta_ev,
            b.eta_total_error,
            b.eta_pl_error,
            b.eta_ph_error,
            b.eta_ev_error,
        ]
        .map(sci),
    );
    out
}

pub fn eta_json(b: &EtaBreakdown) -> String {
    json_document(&with_schema("eta", b))
}

pub fn sweep_csv(rows: &[EtaBreakdown]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for b in rows {
        out += &csv_row([b.l_over_lambda_p, b.eta_total, b.eta_pl, b.eta_ph, b.eta_ev].map(sci));
    }
    out
}

pub fn sweep_json(rows: &[EtaBreakdown]) -> String {
    json_document(&with_schema("sweep", json!({ "rows": rows })))
}

pub fn dispersion_csv(branches: &[BranchSamples]) -> String {
    let mut out = String::from(DISPERSION_HEADER);
    out.push('\n');
    for b in branches {
        let m = b.id.m().map(|m| m.to_string()).unwrap_or_default();
        for p in &b.points {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                b.id.kind().as_str(),
                b.id.pol(),
                m,
                sci(p.k),
                sci(p.omega),
                p.sector
            );
        }
    }
    out
}

pub fn dispersion_json(omega_p: f64, branches: &[BranchSamples]) -> String {
    let branches: Vec<Value> = branches
        .iter()
        .map(|b| {
            json!({
                "branch": b.id.kind().as_str(),
                "pol": b.id.pol().as_str(),
                "m": b.id.m(),
                "points": b.points,
            })
        })
        .collect();
    json_document(&with_schema(
        "dispersion",
        json!({ "omega_p_l": omega_p, "branches": branches }),
    ))
}

/// Wall-clock seconds spent on each constant.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConstantTimings {
    pub alpha: f64,
    pub gamma: f64,
    pub beta_ev: f64,
    pub sign_change: f64,
}

pub fn constants_json(report: &AsymptoticReport, timings: &ConstantTimings) -> String {
    json_document(&with_schema(
        "constants",
        json!({
            "alpha": report.alpha,
            "gamma": report.gamma,
            "beta_ev": report.beta_ev,
            "sign_change_L_over_lambdaP": report.sign_change_l_over_lambda_p,
            "gamma_fit_relative_residual": report.gamma_fit.fit.relative_residual,
            "gamma_constant_term": report.gamma_fit.fit.correction,
            "beta_ev_fit_relative_residual": report.beta_ev_fit.fit.relative_residual,
            "sign_change_crossings": report.sign_change.crossings_on_scan,
            "fit_samples": {
                "eta_pl": report.gamma_fit.samples,
                "eta_ev": report.beta_ev_fit.samples,
            },
            "wall_clock_s": timings,
        }),
    ))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

pub fn verify_csv(report: &VerifyReport) -> String {
    let mut out = String::from(VERIFY_HEADER);
    out.push('\n');
    for c in &report.checks {
        out += &csv_row([
            csv_field(c.name),
            c.passed.to_string(),
            csv_field(&c.detail),
        ]);
    }
    out
}

pub fn verify_json(report: &VerifyReport) -> String {
    json_document(&with_schema(
        "verify",
        json!({ "passed": report.passed(), "checks": report.checks }),
    ))
}

/// Writes `text` to `path` through a temporary file in the same directory,
/// so readers never see a partial file.
pub fn emit(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    let Some(path) = path else {
        let mut stdout = std::io::stdout().lock();
        return stdout
            .write_all(text.as_bytes())
            .and_then(|()| stdout.flush())
            .map_err(|e| CliError::Io(format!("writing to stdout: {e}")));
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io_err = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(text.as_bytes()).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scientific_notation_has_twelve_digits() {
        assert_eq!(sci(0.604079541588648), "6.04079541589e-1");
        assert_eq!(sci(-2915.0225), "-2.91502250000e3");
        assert_eq!(sci(0.0), "0.00000000000e0");
    }

    #[test]
    fn csv_fields_are_quoted_when_needed() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a, b"), "\"a, b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }

    #[test]
    fn schema_version_leads_every_document() {
        let v = with_schema("x", json!({ "a": 1 }));
        assert_eq!(v["schema_version"], "1");
        assert_eq!(v["command"], "x");
        assert_eq!(v["a"], 1);
    }
}
