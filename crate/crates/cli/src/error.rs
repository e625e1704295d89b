use std::path::Path;

use kitaev_potts::Error;
use serde_json::json;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or config; exit 2.
    Validation(String),
    /// No root, crossing or jump, or a solver failure; exit 3.
    Numerical(String),
    /// Computed fine but a requested check did not hold; exit 4.
    Mismatch(String),
    Io(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Mismatch(_) => 4,
            CliError::Io(_) => 1,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let (kind, message) = match self {
            CliError::Validation(m) => ("validation", m),
            CliError::Numerical(m) => ("numerical", m),
            CliError::Mismatch(m) => ("acceptance-mismatch", m),
            CliError::Io(m) => ("io", m),
        };
        json!({ "error": kind, "message": message, "exit_code": self.exit_code() })
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NoRoot(_)
            | Error::NoCrossing(..)
            | Error::NoJump
            | Error::GridTooCoarse { .. }
            | Error::NotConverged(_)
            | Error::DefectivePade { .. }
            | Error::DegenerateFit => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

pub fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), CliError> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Validation(msg()))
    }
}
