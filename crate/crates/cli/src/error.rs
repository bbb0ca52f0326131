use std::fmt;
use std::path::PathBuf;

use peakon_core::Error;

/// Failures mapped onto the exit-code contract.
#[derive(Debug)]
pub enum CliError {
    /// Bad or missing input. Exit 2.
    Config(String),
    /// A criterion did not meet its bound. Exit 1.
    Verification(String),
    /// The computation itself broke down. Exit 3.
    Numerical { context: String, source: Error, dir: Option<PathBuf> },
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical { .. } => 3,
        }
    }

    /// Sorts a core error: bad inputs are configuration errors, the rest
    /// are numerical.
    pub fn from_core(context: &str, e: Error, dir: Option<PathBuf>) -> Self {
        match e {
            Error::DimensionMismatch { .. }
            | Error::InvalidState(_)
            | Error::SectorViolation { .. }
            | Error::NonPositiveMomentum { .. }
            | Error::InvalidPermutation(_)
            | Error::OrientationMismatch(_)
            | Error::OrderOutOfRange { .. }
            | Error::InvalidIndexSet(_)
            | Error::Config(_)
            | Error::SectorMismatch(_)
            | Error::TimeOutOfRange { .. } => CliError::Config(format!("{context}: {e}")),
            _ => CliError::Numerical { context: context.into(), source: e, dir },
        }
    }

    pub fn diagnostic(&self) -> serde_json::Value {
        match self {
            CliError::Numerical { context, source, .. } => serde_json::json!({
                "status": "numerical_failure",
                "context": context,
                "error": source.to_string(),
                "detail": format!("{source:?}"),
            }),
            CliError::Config(m) => serde_json::json!({ "status": "config_error", "error": m }),
            CliError::Verification(m) => serde_json::json!({ "status": "verification_failure", "error": m }),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
            CliError::Numerical { context, source, .. } => write!(f, "numerical failure in {context}: {source}"),
        }
    }
}

/// Shorthand for `map_err` on core results.
pub fn core<T>(context: &str, dir: Option<&std::path::Path>, r: peakon_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::from_core(context, e, dir.map(PathBuf::from)))
}
