use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{function}: argument {value} outside the function domain")]
    Domain { function: &'static str, value: f64 },

    #[error("point (z={z}, x={x}, y={y}) lies outside the stratification domain")]
    OutOfDomain { z: f64, x: f64, y: f64 },

    #[error("no propagating mode: omega={omega} is not below max N={n_max} at (x={x}, y={y})")]
    NoPropagatingMode { omega: f64, n_max: f64, x: f64, y: f64 },

    #[error("mode solver failed for n={mode} at omega={omega}, (x={x}, y={y}): {reason}")]
    ModeSolver {
        mode: usize,
        omega: f64,
        x: f64,
        y: f64,
        reason: String,
    },

    #[error("K'_omega finite difference failed at omega={omega}: {reason}")]
    DerivativeFailure { omega: f64, reason: String },

    #[error("query (omega={omega}, x={x}, y={y}) outside the valid dispersion region")]
    Extrapolation { omega: f64, x: f64, y: f64 },

    #[error("evanescent launch direction: K={k} <= omega/V={cutoff} at omega={omega}, t0={t0}")]
    Evanescent { omega: f64, t0: f64, k: f64, cutoff: f64 },

    #[error("integration failed at t={t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("unavailable: {0}")]
    Unavailable(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown {kind} '{name}' (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error("parse error in {path}: {reason}")]
    Parse { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config(_) | Error::UnknownStrategy { .. } | Error::Parse { .. } | Error::Io(_) | Error::Json(_) => {
                ErrorClass::Validation
            }
            _ => ErrorClass::Numerical,
        }
    }
}

/// Coarse failure class, used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad input: configuration, unreadable files, unknown names.
    Validation,
    /// A numerical stage could not produce a result.
    Numerical,
}
