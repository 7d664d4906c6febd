mod args;
mod render;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use plasmon_casimir::decomposition::{
    eta_breakdown, fit_beta_ev, fit_gamma, locate_sign_change, short_distance_alpha, sweep,
    AsymptoticReport,
};
use plasmon_casimir::modes::{default_branches, log_grid, sample_dispersion};
use plasmon_casimir::verify::{run_invariants, Fault, VerifyOptions};
use thiserror::Error;

use args::{Cli, Command, CommonArgs, FaultArg, Format};
use render::ConstantTimings;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] plasmon_casimir::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Core(e) if e.is_domain() => 2,
            CliError::Core(_) => 3,
        }
    }
}

enum Outcome {
    Done,
    VerifyFailed,
}

fn format_or(common: &CommonArgs, default: Format) -> Format {
    common.format.unwrap_or(default)
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Eta { point, common } => {
            let omega_p = point.omega_p()?;
            let b = eta_breakdown(omega_p, &common.spec()?)?;
            let text = match format_or(&common, Format::Csv) {
                Format::Csv => render::eta_csv(&b),
                Format::Json => render::eta_json(&b),
            };
            render::emit(&text, common.output.as_deref())?;
        }
        Command::Sweep { range, common } => {
            let ratios = range.ratios()?;
            let rows = sweep(&ratios, &common.spec()?, common.exec())?;
            let text = match format_or(&common, Format::Csv) {
                Format::Csv => render::sweep_csv(&rows),
                Format::Json => render::sweep_json(&rows),
            };
            render::emit(&text, common.output.as_deref())?;
        }
        Command::Dispersion {
            point,
            max_photonic_m,
            points,
            common,
        } => {
            let omega_p = point.omega_p()?;
            if points < 2 {
                return Err(CliError::Usage("--points must be at least 2".into()));
            }
            let grid = log_grid(1e-3, 10.0 * omega_p.max(1.0), points);
            let branches = sample_dispersion(
                omega_p,
                &grid,
                &default_branches(max_photonic_m),
                common.exec(),
            )?;
            let text = match format_or(&common, Format::Csv) {
                Format::Csv => render::dispersion_csv(&branches),
                Format::Json => render::dispersion_json(omega_p, &branches),
            };
            render::emit(&text, common.output.as_deref())?;
        }
        Command::Constants { common } => {
            if common.format == Some(Format::Csv) {
                return Err(CliError::Usage(
                    "constants are only available as json".into(),
                ));
            }
            let (report, timings) = constants(&common)?;
            render::emit(
                &render::constants_json(&report, &timings),
                common.output.as_deref(),
            )?;
        }
        Command::Verify {
            inject_fault,
            common,
        } => {
            let opts = VerifyOptions {
                fault: inject_fault.map(|f| match f {
                    FaultArg::ContinuationSign => Fault::FlipContinuationSign,
                }),
                spec: common.spec()?,
                exec: common.exec(),
            };
            let report = run_invariants(&opts)?;
            let text = match format_or(&common, Format::Json) {
                Format::Csv => render::verify_csv(&report),
                Format::Json => render::verify_json(&report),
            };
            render::emit(&text, common.output.as_deref())?;
            if !report.passed() {
                for c in report.failures() {
                    eprintln!("invariant failed: {}: {}", c.name, c.detail);
                }
                return Ok(Outcome::VerifyFailed);
            }
        }
    }
    Ok(Outcome::Done)
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let value = f();
    (value, start.elapsed().as_secs_f64())
}

fn constants(common: &CommonArgs) -> Result<(AsymptoticReport, ConstantTimings), CliError> {
    let spec = common.spec()?;
    let exec = common.exec();
    let (alpha, t_alpha) = timed(|| short_distance_alpha(&spec));
    let (gamma_fit, t_gamma) = timed(|| fit_gamma(&spec, exec));
    let (beta_ev_fit, t_beta) = timed(|| fit_beta_ev(&spec, exec));
    let (sign_change, t_sign) = timed(|| locate_sign_change(&spec, exec));
    let (gamma_fit, beta_ev_fit, sign_change) = (gamma_fit?, beta_ev_fit?, sign_change?);
    let report = AsymptoticReport {
        alpha: alpha?.value,
        gamma: gamma_fit.constant,
        beta_ev: beta_ev_fit.constant,
        sign_change_l_over_lambda_p: sign_change.l_over_lambda_p,
        gamma_fit,
        beta_ev_fit,
        sign_change,
    };
    let timings = ConstantTimings {
        alpha: t_alpha,
        gamma: t_gamma,
        beta_ev: t_beta,
        sign_change: t_sign,
    };
    Ok((report, timings))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::VerifyFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
