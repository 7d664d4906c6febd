use thiserror::Error;

use crate::numerics::NumericsError;
use crate::optics::Polarization;

const KERNEL_CONTEXT: &str = "numeric kernel";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0}")]
    Domain(String),
    #[error(
        "g_+ continuation left its window: u = {u} must stay below min(Omega_P, pi) = {limit}"
    )]
    Continuation { u: f64, limit: f64 },
    #[error("could not bracket the {branch} branch at K = {k}: {reason}")]
    BracketNotFound {
        branch: &'static str,
        k: f64,
        reason: String,
    },
    #[error("no {pol} photonic mode m = {m} at K = {k} for Omega_P = {omega_p}")]
    NoSolution {
        pol: Polarization,
        m: u32,
        k: f64,
        omega_p: f64,
    },
    #[error("regulator extrapolation did not settle: successive estimates {coarse} and {fine}")]
    ExtrapolationUnstable { coarse: f64, fine: f64 },
    #[error("branch {branch} jumps from Omega = {from} to {to} between K = {k0} and {k1}")]
    Discontinuity {
        branch: String,
        k0: f64,
        k1: f64,
        from: f64,
        to: f64,
    },
    #[error("{context} failed: {source}")]
    Numerics {
        context: &'static str,
        #[source]
        source: NumericsError,
    },
}

impl From<NumericsError> for Error {
    fn from(source: NumericsError) -> Self {
        Error::Numerics {
            context: KERNEL_CONTEXT,
            source,
        }
    }
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Names the computation that failed, unless an inner computation
    /// already did.
    pub fn context(self, context: &'static str) -> Self {
        match self {
            Error::Numerics {
                context: KERNEL_CONTEXT,
                source,
            } => Error::Numerics { context, source },
            other => other,
        }
    }

    /// True for invalid inputs, false for failures of the numerics.
    pub fn is_domain(&self) -> bool {
        matches!(self, Error::Domain(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn require_positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive")))
    }
}
