use serde_json::json;
use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or inconsistent configuration.
    Config(String),
    Core(dirseq_core::Error),
    Io(std::io::Error),
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) if e.is_infeasible_geometry() => 3,
            _ => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Core(e) if e.is_infeasible_geometry() => "infeasible-geometry",
            CliError::Core(_) => "computation",
            CliError::Io(_) => "io",
            CliError::Failed(_) => "check-failed",
        }
    }

    /// One-line JSON error record for stderr.
    pub fn record(&self) -> String {
        json!({"error": {"kind": self.kind(), "message": self.to_string(), "exit_code": self.exit_code()}}).to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Failed(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<dirseq_core::Error> for CliError {
    fn from(e: dirseq_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}
