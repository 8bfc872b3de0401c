use fsl::FslError;
use serde_json::json;

/// Failure carried up to `main`: an exit code plus a machine-readable payload.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub kind: String,
    pub message: String,
}

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_COMPILE: i32 = 3;
pub const EXIT_CAPACITY: i32 = 4;

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError { code: EXIT_CONFIG, kind: "Config".into(), message: message.into() }
    }

    /// Errors while reading user inputs are configuration errors whatever their source.
    pub fn input(e: FslError) -> Self {
        CliError { code: EXIT_CONFIG, kind: e.kind().into(), message: e.to_string() }
    }

    pub fn to_json(&self) -> String {
        json!({ "error": self.kind, "message": self.message }).to_string()
    }
}

impl From<FslError> for CliError {
    fn from(e: FslError) -> Self {
        let code = match e {
            FslError::CapacityExceeded { .. } => EXIT_CAPACITY,
            FslError::DimensionMismatch { .. }
            | FslError::UnknownFunction(_)
            | FslError::NegativeUnderSqrt { .. }
            | FslError::InvalidPlan(_)
            | FslError::InvalidArgument(_)
            | FslError::Parse(_)
            | FslError::Json(_) => EXIT_CONFIG,
            _ => EXIT_COMPILE,
        };
        CliError { code, kind: e.kind().into(), message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError { code: EXIT_COMPILE, kind: "Io".into(), message: e.to_string() }
    }
}

pub type CliResult<T> = Result<T, CliError>;
