use std::fmt;

/// Exit code 2: bad usage or configuration.
pub const EXIT_USAGE: u8 = 2;
/// Exit code 1: I/O or runtime failure.
pub const EXIT_RUNTIME: u8 = 1;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { code: EXIT_USAGE, message: message.into() }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        CliError { code: EXIT_RUNTIME, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<boltzkit::Error> for CliError {
    fn from(e: boltzkit::Error) -> Self {
        use boltzkit::Error::*;
        match e {
            Io { .. } | Format { .. } | UnsupportedVersion { .. } => CliError::runtime(e.to_string()),
            Shape { .. } | Domain(_) | Capacity { .. } | UnknownDataset { .. } => CliError::usage(e.to_string()),
        }
    }
}
