use thiserror::Error;

/// Errors raised by the library. Every variant carries a stable machine code
/// (see [`Error::code`]) that is used in CLI error objects and FFI status codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("infeasible polytope: {0}")]
    InfeasiblePolytope(String),
    #[error("Reeb vector is not in the cone: {0}")]
    NotInCone(String),
    #[error("no convergence after {iterations} iterations (gradient norm {grad_norm:e})")]
    NoConvergence { iterations: usize, grad_norm: f64 },
    #[error("segment exits the Reeb cone at sample {0}")]
    SegmentExitsCone(usize),
    #[error("height function is not positive on the polytope: {0}")]
    NonpositiveHeight(String),
    #[error("Reeb vector degenerates on the total polytope: {0}")]
    ReebDegeneratesOnTotal(String),
    #[error("parameter out of range: {0}")]
    RangeViolation(String),
    #[error("test-configuration dictionary is not calibrated")]
    Uncalibrated,
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::InfeasiblePolytope(_) => "infeasible-polytope",
            Error::NotInCone(_) => "not-in-cone",
            Error::NoConvergence { .. } => "no-convergence",
            Error::SegmentExitsCone(_) => "segment-exits-cone",
            Error::NonpositiveHeight(_) => "nonpositive-height",
            Error::ReebDegeneratesOnTotal(_) => "reeb-degenerates-on-Q",
            Error::RangeViolation(_) => "range-violation",
            Error::Uncalibrated => "uncalibrated",
            Error::Parse { .. } => "parse-error",
            Error::SchemaMismatch(_) => "schema-mismatch",
            Error::InvalidInput(_) => "invalid-input",
            Error::Io(_) => "io-error",
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
