use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid load model: {0}")]
    LoadModel(String),

    #[error("{what} index {index} out of range 1..={max}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        max: usize,
    },

    #[error("scatterer distance must be positive, got {0}")]
    NonPositiveDistance(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("covariance is not a valid transmit covariance: {0}")]
    InvalidCovariance(String),

    #[error("compression ratio {0} outside (0, 1]")]
    RhoOutOfRange(f64),

    #[error("compression ratio {rho} outside the load model domain [{lo}, 1]")]
    OutsideLoadDomain { rho: f64, lo: f64 },

    #[error("compression power {p_c} maps to ratio {rho} outside segment {segment} range [{lo}, {hi}]")]
    InfeasiblePairing {
        p_c: f64,
        segment: usize,
        rho: f64,
        lo: f64,
        hi: f64,
    },

    #[error("segment {0} has no admissible transmit power under the budget")]
    InfeasibleSegment(usize),

    #[error("transmit power {p} outside admissible interval [{lo}, {hi}]")]
    PowerOutOfInterval { p: f64, lo: f64, hi: f64 },

    #[error("ratio denominator is nonpositive ({0}); compression ratio must stay positive")]
    NonPositiveDenominator(f64),

    #[error("invalid port selection: {0}")]
    InvalidPorts(String),

    #[error("candidate port {0} collides with a retained port")]
    PortCollision(usize),

    #[error("exhaustive search over {0} selections exceeds the 1e6 guard")]
    CombinatorialGuard(u128),

    #[error("{solver} did not converge within {cap} iterations")]
    NonConvergence { solver: &'static str, cap: usize },

    #[error("{0} run(s) stopped at an iteration cap")]
    CapReached(usize),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::LoadModel(_) | Error::Parse { .. } => 2,
            Error::NonConvergence { .. } | Error::CapReached(_) => 3,
            _ => 1,
        }
    }
}
