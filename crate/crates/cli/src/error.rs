use cnc_qudit::Error;
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("schema error at {pointer:?}: {message}")]
    Schema { pointer: String, message: String },
    #[error(transparent)]
    Core(Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("verification failed: total variation {tv} exceeds {threshold}")]
    VerifyFailed { tv: f64, threshold: f64 },
}

pub type CliResult<T> = Result<T, CliError>;

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Schema { pointer, message } => CliError::Schema { pointer, message },
            other => CliError::Core(other),
        }
    }
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Schema { .. } => 2,
            CliError::Core(Error::CapExceeded { .. }) => 3,
            CliError::Core(Error::ZeroProbabilityBranch | Error::Unbounded | Error::Internal(_)) => 1,
            CliError::Core(_) => 2,
            CliError::VerifyFailed { .. } => 4,
            CliError::Io { .. } => 1,
        }
    }

    /// Machine-readable form written to stderr.
    pub fn to_json(&self) -> Value {
        let kind = match self {
            CliError::Usage(_) => "usage",
            CliError::Schema { .. } => "schema",
            CliError::Core(Error::CapExceeded { .. }) => "cap",
            CliError::Core(_) => "input",
            CliError::Io { .. } => "io",
            CliError::VerifyFailed { .. } => "verify",
        };
        let mut body = json!({ "kind": kind, "message": self.to_string(), "exit_code": self.exit_code() });
        match self {
            CliError::Schema { pointer, .. } => body["pointer"] = json!(pointer),
            CliError::Core(Error::CapExceeded {
                what,
                needed,
                limit,
                next_index,
            }) => {
                body["cap"] = json!({
                    "what": what,
                    "needed": needed.to_string(),
                    "limit": limit.to_string(),
                    "next_index": next_index,
                });
            }
            _ => {}
        }
        json!({ "error": body })
    }
}
