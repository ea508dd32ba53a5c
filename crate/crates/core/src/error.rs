use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A constitutive law violates its structural hypotheses.
    #[error("invalid law: {0}")]
    InvalidLaw(String),

    /// A law was evaluated outside of the range where it is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("mesh mismatch: {0}")]
    MeshMismatch(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("inadmissible initial data: {0}")]
    InadmissibleData(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Parse error carrying the dotted key path and, when known, the line.
    #[error("{}", format_parse(.key, .line, .message))]
    Parse {
        key: String,
        line: Option<usize>,
        message: String,
    },

    #[error("numerical blow-up in {field} at t = {time:e}")]
    BlowUp { field: &'static str, time: f64 },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("diagnostic failure: {0}")]
    Diagnostic(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

fn format_parse(key: &str, line: &Option<usize>, message: &str) -> String {
    match line {
        Some(l) => format!("config line {l}: {key}: {message}"),
        None => format!("config: {key}: {message}"),
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::BlowUp { .. } | Error::Solver(_) | Error::Diagnostic(_)
        )
    }
}
