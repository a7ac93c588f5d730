use plurisolve_core::{GeometryError, GridError, PluriError, SingularError, SolverError};
use serde_json::json;
use thiserror::Error;

/// Exit status of a run.
pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFICATION: u8 = 1;
pub const EXIT_NONCONVERGENCE: u8 = 2;
pub const EXIT_CONFIG: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String, location: Option<(usize, usize)> },
    #[error("solver did not converge: {0}")]
    NonConvergence(String),
    #[error("{0}")]
    Runtime(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn config(field: &str, message: impl Into<String>) -> Self {
        CliError::Config { field: field.to_string(), message: message.into(), location: None }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } | CliError::Io(_) => EXIT_CONFIG,
            CliError::NonConvergence(_) => EXIT_NONCONVERGENCE,
            // Errors raised while checking a result count as a failed verification.
            CliError::Runtime(_) => EXIT_VERIFICATION,
        }
    }

    /// One-line machine-readable diagnostic.
    pub fn diagnostic(&self) -> serde_json::Value {
        let kind = match self {
            CliError::Config { .. } => "config",
            CliError::NonConvergence(_) => "nonconvergence",
            CliError::Runtime(_) => "runtime",
            CliError::Io(_) => "io",
        };
        let mut v = json!({ "error": kind, "message": self.to_string(), "exit_code": self.exit_code() });
        if let CliError::Config { field, location, .. } = self {
            v["field"] = json!(field);
            if let Some((line, col)) = location {
                v["line"] = json!(line);
                v["column"] = json!(col);
            }
        }
        v
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::NotConverged { .. }
            | SolverError::SafeguardUnreachable { .. }
            | SolverError::ContinuationStalled { .. }
            | SolverError::NoSubsolution { .. } => CliError::NonConvergence(e.to_string()),
            SolverError::InvalidInput(m) => CliError::config("input", m),
            other => CliError::config("input", other.to_string()),
        }
    }
}

impl From<SingularError> for CliError {
    fn from(e: SingularError) -> Self {
        match e {
            SingularError::Solver(s) => s.into(),
            other => CliError::config("poles", other.to_string()),
        }
    }
}

impl From<PluriError> for CliError {
    fn from(e: PluriError) -> Self {
        match e {
            PluriError::SweepNotConverged { .. } => CliError::NonConvergence(e.to_string()),
            other => CliError::config("query", other.to_string()),
        }
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        CliError::config("geometry", e.to_string())
    }
}

impl From<GridError> for CliError {
    fn from(e: GridError) -> Self {
        match e {
            GridError::Io(io) => CliError::Io(io),
            other => CliError::config("grid", other.to_string()),
        }
    }
}
