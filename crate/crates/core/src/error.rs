use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("potential not admissible: {0}")]
    NotAdmissible(String),

    #[error("zero is (numerically) a Dirichlet eigenvalue: |phi0(l)| = {phi0_at_l:.3e}, |phil(0)| = {phil_at_0:.3e}")]
    ZeroEigenvalue { phi0_at_l: f64, phil_at_0: f64 },

    #[error("inadmissible gauge: {0}")]
    Gauge(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("contract error: {0}")]
    Contract(String),

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("basis degeneracy: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io(_) | Error::Csv(_) | Error::Json(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
