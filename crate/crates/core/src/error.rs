use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{what} requires N <= {max}, got N = {n}")]
    SizeGuard { what: &'static str, n: usize, max: usize },

    #[error("symmetric eigensolver failed to converge on a {dim}x{dim} matrix")]
    EigenSolver { dim: usize },

    #[error("ambiguous vacuum: single-particle energy {energy:e} is numerically zero")]
    AmbiguousVacuum { energy: f64 },

    #[error("zero-mode subspace is not particle-hole balanced ({plus} vs {minus})")]
    UnbalancedZeroModes { plus: usize, minus: usize },

    #[error("echo {value} exceeds 1 beyond tolerance; covariance pipeline is inconsistent")]
    EchoOutOfRange { value: f64 },

    #[error("free-fermion and dense echoes differ by {worst:e}, above {tolerance:e}")]
    OracleMismatch { worst: f64, tolerance: f64 },

    #[error("degenerate many-body ground state (gap {gap:e})")]
    DegenerateGroundState { gap: f64 },

    #[error("value {value} outside the domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("insufficient time resolution: {0}")]
    InsufficientResolution(String),

    #[error("time grids differ: {0}")]
    GridMismatch(String),

    #[error("grid is not uniform (step {first} vs {other})")]
    NonUniformGrid { first: f64, other: f64 },

    #[error("peak located at the grid boundary (index {index} of {len})")]
    PeakAtBoundary { index: usize, len: usize },

    #[error("line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },

    #[error("invalid value for `{key}`: {message}")]
    ConfigValue { key: String, message: String },

    #[error("estimated memory {estimate} bytes exceeds the limit of {limit} bytes")]
    ResourceGuard { estimate: u64, limit: u64 },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Coarse classification used to pick a process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Runtime,
    Io,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidProtocol(_)
            | Error::InvalidInput(_)
            | Error::SizeGuard { .. }
            | Error::Domain { .. }
            | Error::ConfigParse { .. }
            | Error::UnknownKey { .. }
            | Error::ConfigValue { .. }
            | Error::GridMismatch(_)
            | Error::NonUniformGrid { .. }
            | Error::ResourceGuard { .. } => ErrorClass::Validation,
            Error::Io { .. } => ErrorClass::Io,
            _ => ErrorClass::Runtime,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
