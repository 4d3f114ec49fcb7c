use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Operand dimensions do not conform.
    #[error("shape mismatch in {op}: {left_name} is {}x{}, {right_name} is {}x{}", left.0, left.1, right.0, right.1)]
    Shape {
        op: &'static str,
        left_name: &'static str,
        left: (usize, usize),
        right_name: &'static str,
        right: (usize, usize),
    },

    /// A value lies outside the domain an operation accepts.
    #[error("domain error: {0}")]
    Domain(String),

    /// Exact enumeration was requested for a model that is too large.
    #[error("capacity exceeded: {visible}+{hidden} units exceeds the enumeration limit of {limit}")]
    Capacity {
        visible: usize,
        hidden: usize,
        limit: usize,
    },

    /// Malformed input file or document.
    #[error("format error at offset {offset}: {message}")]
    Format { offset: usize, message: String },

    #[error("unsupported model format version {found} (supported: {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },

    #[error("unknown dataset '{name}'; valid names: {}", valid.join(", "))]
    UnknownDataset {
        name: String,
        valid: Vec<&'static str>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn shape(
        op: &'static str,
        left_name: &'static str,
        left: (usize, usize),
        right_name: &'static str,
        right: (usize, usize),
    ) -> Self {
        Error::Shape {
            op,
            left_name,
            left,
            right_name,
            right,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn format(offset: usize, msg: impl Into<String>) -> Self {
        Error::Format {
            offset,
            message: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
