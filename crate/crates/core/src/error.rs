use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("selection is empty; operators need at least one support point")]
    EmptyMeasure,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("non-finite input at index {index}")]
    NonFinite { index: usize },

    #[error("power iteration did not converge after {iterations} iterations (last estimate {estimate}, residual {residual:e})")]
    NotConverged {
        estimate: f64,
        iterations: usize,
        residual: f64,
    },

    #[error("degenerate triple: repeated point")]
    DegenerateTriple,

    #[error("cover needs a nonempty exclusion set; F_ps covers all targets, use the degenerate branch")]
    EmptyExclusion,

    #[error("cover overlap {overlap} exceeds cap {cap}")]
    OverlapCap { overlap: usize, cap: usize },

    #[error("ball around center {center} has zero mass")]
    ZeroMassBall { center: usize },

    #[error("point {index} lies in no ball of the cover")]
    UnassignedPoint { index: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
