use std::path::PathBuf;

use num_complex::Complex64;

/// Errors produced anywhere in the analysis pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error("invalid scheme: {0}")]
    Scheme(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("singular system: pivot {pivot:e} at row {row} (row scale {scale:e})")]
    Singular { row: usize, pivot: f64, scale: f64 },

    /// The QR iteration hit its cap. `partial` holds the eigenvalues that
    /// had already deflated.
    #[error("eigenvalue iteration did not converge after {iterations} sweeps ({} of {n} eigenvalues found)", partial.len())]
    NoConvergence {
        iterations: usize,
        n: usize,
        partial: Vec<Complex64>,
    },

    #[error("both spatial roots have unit modulus at A = {amplification}: marginal mode")]
    MarginalMode { amplification: Complex64 },

    #[error("spatial factor has a pole (beta = d); amplification factor is {amplification}")]
    KappaPole { amplification: Complex64 },

    #[error("dispersion relation is singular at A = {0}")]
    Singularity(Complex64),

    /// The trajectory decayed to exactly zero before the estimation window
    /// ended.
    #[error("trajectory decayed below the floating-point floor (last estimate {last_estimate:?})")]
    DecayBelowFloor { last_estimate: Option<f64> },

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
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
