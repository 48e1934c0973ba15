use thiserror::Error;

/// Errors raised by the matrix kernels and solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("matrix entries must be finite (found {value} at ({row}, {col}))")]
    NonFinite { row: usize, col: usize, value: f64 },

    #[error("rank {rank} out of range: require {min} <= rank <= {max}")]
    RankOutOfRange { rank: usize, min: usize, max: usize },

    #[error("{what} is numerically rank deficient (sigma_min = {sigma_min:e}, sigma_max = {sigma_max:e})")]
    RankDeficient {
        what: &'static str,
        sigma_min: f64,
        sigma_max: f64,
    },

    #[error("SVD did not converge within {sweeps} sweeps")]
    SvdNoConvergence { sweeps: usize },

    #[error("linear system is numerically singular: {0}")]
    Singular(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for failures of an iterative numerical kernel rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::SvdNoConvergence { .. } | Error::Singular(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
