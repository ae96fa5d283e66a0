use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used for process exit codes and FFI status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input data or configuration.
    Input,
    /// A numerical routine failed or produced an out-of-range value.
    Numerical,
    /// An internal invariant did not hold.
    Invariant,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("series is constant, detrended variance is zero")]
    ConstantSeries,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("box size {box_size} out of range for series of length {len}")]
    BoxSize { box_size: usize, len: usize },

    #[error("DCCC value {value} exceeds unit range beyond tolerance")]
    CoefficientOutOfRange { value: f64 },

    #[error("pair ({left}, {right}): {source}")]
    Pair {
        left: String,
        right: String,
        #[source]
        source: Box<Error>,
    },

    #[error("eigensolver did not converge (n = {n}, max |entry| = {max_abs:.6e}, frobenius = {frobenius:.6e})")]
    EigenNonConvergence {
        n: usize,
        max_abs: f64,
        frobenius: f64,
    },

    #[error("eigenvalue {value} is at or below -1, deconvolution map is singular")]
    SingularEigenvalue { value: f64 },

    #[error("spectral radius {radius} is not below 1, convolution map is singular")]
    SpectralRadius { radius: f64 },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:.3e})")]
    Asymmetric { asymmetry: f64 },

    #[error("threshold sigma_min = {sigma_min} is not positive (weakest node {node})")]
    NonPositiveThreshold { sigma_min: f64, node: String },

    #[error("correlation {value} between {left} and {right} is outside [-1, 1]")]
    InvalidCorrelation {
        left: String,
        right: String,
        value: f64,
    },

    #[error("spanning tree edge {left}-{right} has non-positive correlation {value}")]
    NonPositiveTreeEdge {
        left: String,
        right: String,
        value: f64,
    },

    #[error(
        "HITS iteration did not converge after {iterations} iterations (residual {residual:.3e})"
    )]
    HitsNonConvergence { iterations: usize, residual: f64 },

    #[error("window {start}..{end}: {source}")]
    Window {
        start: String,
        end: String,
        #[source]
        source: Box<Error>,
    },

    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::InvalidInput(_)
            | Error::LengthMismatch { .. }
            | Error::BoxSize { .. }
            | Error::Asymmetric { .. }
            | Error::InvalidCorrelation { .. } => ErrorKind::Input,
            Error::ConstantSeries
            | Error::CoefficientOutOfRange { .. }
            | Error::EigenNonConvergence { .. }
            | Error::SingularEigenvalue { .. }
            | Error::SpectralRadius { .. }
            | Error::NonPositiveThreshold { .. }
            | Error::NonPositiveTreeEdge { .. }
            | Error::HitsNonConvergence { .. } => ErrorKind::Numerical,
            Error::Invariant(_) => ErrorKind::Invariant,
            Error::Pair { source, .. } | Error::Window { source, .. } => source.kind(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
