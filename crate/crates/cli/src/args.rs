use std::f64::consts::PI;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use plasmon_casimir::numerics::QuadratureSpec;
use plasmon_casimir::Execution;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "casimir",
    version,
    about = "Casimir energy between plasma mirrors, split into plasmonic and photonic parts"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Correction factors at one separation.
    Eta {
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Correction factors over a range of separations.
    Sweep {
        #[command(flatten)]
        range: RangeArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Dispersion branches of the cavity.
    Dispersion {
        #[command(flatten)]
        point: PointArgs,
        /// Highest photonic mode index exported.
        #[arg(long, default_value_t = 5)]
        max_photonic_m: u32,
        /// Number of K samples (log-spaced).
        #[arg(long, default_value_t = 400)]
        points: usize,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Short- and long-distance constants and the plasmonic sign change.
    Constants {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the built-in invariant suite.
    Verify {
        /// Deliberately break a kernel to check that the suite notices.
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<FaultArg>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FaultArg {
    ContinuationSign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Spacing {
    #[default]
    Log,
    Linear,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Output format. Defaults to csv for tables and json for reports.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Relative quadrature tolerance (absolute tolerance is a tenth of it).
    #[arg(long, env = "CASIMIR_TOL", default_value_t = 1e-9)]
    pub tol: f64,
    /// Evaluate grids on one thread.
    #[arg(long)]
    pub sequential: bool,
}

impl CommonArgs {
    pub fn spec(&self) -> Result<QuadratureSpec, CliError> {
        QuadratureSpec::with_tolerance(self.tol)
            .map_err(|e| CliError::Usage(format!("invalid --tol: {e}")))
    }

    pub fn exec(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

/// One separation, given physically or dimensionlessly.
#[derive(Debug, Args)]
pub struct PointArgs {
    /// Plasma wavelength in metres (with --separation).
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_p: Option<f64>,
    /// Mirror separation in metres (with --lambda-p).
    #[arg(long, allow_hyphen_values = true)]
    pub separation: Option<f64>,
    /// Dimensionless plasma frequency omega_P L / c.
    #[arg(long, allow_hyphen_values = true)]
    pub omega_p_l: Option<f64>,
    /// Separation in units of the plasma wavelength.
    #[arg(long, allow_hyphen_values = true)]
    pub l_over_lambda_p: Option<f64>,
}

impl PointArgs {
    /// The scaled plasma frequency `Omega_P`. Domain checks are left to the
    /// library so every entry point reports them the same way.
    pub fn omega_p(&self) -> Result<f64, CliError> {
        match (
            self.lambda_p,
            self.separation,
            self.omega_p_l,
            self.l_over_lambda_p,
        ) {
            (Some(lambda_p), Some(l), None, None) => {
                positive("--lambda-p", lambda_p)?;
                positive("--separation", l)?;
                Ok(2.0 * PI * (l / lambda_p))
            }
            (None, None, Some(wp), None) => Ok(wp),
            (None, None, None, Some(ratio)) => Ok(2.0 * PI * ratio),
            _ => Err(CliError::Usage(
                "give exactly one of --lambda-p with --separation, --omega-p-l, or --l-over-lambda-p"
                    .into(),
            )),
        }
    }
}

fn positive(flag: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{flag} must be positive")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lo: f64,
    pub hi: f64,
}

impl FromStr for Bounds {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (lo, hi) = s
            .split_once(':')
            .ok_or_else(|| format!("expected lo:hi, got {s:?}"))?;
        let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
        Ok(Bounds {
            lo: parse(lo)?,
            hi: parse(hi)?,
        })
    }
}

/// A grid of separations.
#[derive(Debug, Args)]
pub struct RangeArgs {
    /// Range `lo:hi` of L/lambda_P, or of separations in metres with --lambda-p.
    #[arg(long, allow_hyphen_values = true)]
    pub range: Bounds,
    /// Number of grid points.
    #[arg(long, default_value_t = 50)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = Spacing::Log)]
    pub spacing: Spacing,
    /// Plasma wavelength in metres; makes --range a range of separations.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_p: Option<f64>,
}

impl RangeArgs {
    /// Ascending `L/lambda_P` values.
    pub fn ratios(&self) -> Result<Vec<f64>, CliError> {
        let Bounds { lo, hi } = self.range;
        if !(lo > 0.0 && lo.is_finite() && hi.is_finite()) {
            return Err(CliError::Usage("--range bounds must be positive".into()));
        }
        if hi <= lo {
            return Err(CliError::Usage(format!("--range {lo}:{hi} is empty")));
        }
        if self.points < 2 {
            return Err(CliError::Usage("--points must be at least 2".into()));
        }
        let scale = match self.lambda_p {
            Some(lambda_p) => {
                positive("--lambda-p", lambda_p)?;
                lambda_p
            }
            None => 1.0,
        };
        let grid = match self.spacing {
            Spacing::Log => plasmon_casimir::modes::log_grid(lo, hi, self.points),
            Spacing::Linear => {
                let step = (hi - lo) / (self.points - 1) as f64;
                (0..self.points)
                    .map(|i| {
                        if i == self.points - 1 {
                            hi
                        } else {
                            lo + step * i as f64
                        }
                    })
                    .collect()
            }
        };
        Ok(grid.into_iter().map(|v| v / scale).collect())
    }
}
