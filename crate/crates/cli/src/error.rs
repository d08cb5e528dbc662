use std::fmt;

use fracspline::{Error, ErrorClass};

/// Exit status for configuration problems (bad flags, files, kernels).
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for zero-freeness or support-bound failures.
pub const EXIT_CERTIFICATE: i32 = 3;
/// Exit status for exhausted numerical budgets.
pub const EXIT_BUDGET: i32 = 4;
/// Exit status when a verification report has a failing non-certificate check.
pub const EXIT_CHECK: i32 = 1;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub tag: String,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            tag: "config".into(),
            message: message.into(),
        }
    }

    pub fn io(path: &std::path::Path, err: impl fmt::Display) -> Self {
        Self {
            code: EXIT_CONFIG,
            tag: "io".into(),
            message: format!("{}: {err}", path.display()),
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let code = match err.class() {
            ErrorClass::Config => EXIT_CONFIG,
            ErrorClass::Certificate => EXIT_CERTIFICATE,
            ErrorClass::Budget => EXIT_BUDGET,
        };
        Self {
            code,
            tag: err.tag().into(),
            message: err.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    /// Single line: `error[<tag>]: <message>`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error[{}]: {}", self.tag, self.message.replace('\n', " "))
    }
}
