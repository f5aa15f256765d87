/// Errors shared across the models and the experiment harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inconsistent or invalid configuration (step sizes, counts, parameters).
    #[error("configuration error: {0}")]
    Config(String),

    /// A computation produced a non-finite or otherwise unusable value.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Too few data points for the requested statistic.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A fit cannot be computed (e.g. zero variance in the predictor).
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// Experiment name not present in the registry.
    #[error("unknown experiment: {0}")]
    UnknownExperiment(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
