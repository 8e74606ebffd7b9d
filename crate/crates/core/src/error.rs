use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch in {context}: expected {expected}, got {found}")]
    Length {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    /// A parameter violated one of its admissible bounds. `param` is the
    /// parameter name as spelled on the command line (without dashes).
    #[error("invalid {param}: {bound} (got {value})")]
    Config {
        param: &'static str,
        bound: String,
        value: f64,
    },

    #[error("{0}")]
    Argument(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("power iteration did not converge in {iterations} iterations (last estimate {last_estimate})")]
    NoConvergence { iterations: usize, last_estimate: f64 },

    #[error("non-finite iterate at iteration {iter}")]
    Divergence { iter: usize },

    #[error("linesearch stalled at iteration {iter} after {shrinks} shrinks")]
    LinesearchStall { iter: usize, shrinks: usize },

    #[error("metric not available: {0}")]
    UnsupportedMetric(String),

    #[error("infeasible point: {0}")]
    Infeasible(String),

    #[error("insufficient history: {0}")]
    InsufficientHistory(&'static str),
}

pub(crate) fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Length {
            context,
            expected,
            found,
        })
    }
}
