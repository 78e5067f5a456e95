use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Two distributions (or a distribution and a channel) disagree on the
    /// alphabet they are defined over.
    #[error("incompatible supports: expected alphabet size {expected}, got {got}")]
    AlphabetMismatch { expected: usize, got: usize },

    /// A probability vector failed validation.
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// A channel transition matrix failed validation.
    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    /// A scalar parameter is outside its domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An operation requires `p0 != p1` but the inputs are identical.
    #[error("distributions are identical; no informative quantizer exists")]
    IdenticalDistributions,

    /// A data symbol has zero probability under both hypotheses.
    #[error("invalid data: {0}")]
    InvalidData(String),

    /// A suffix of the score statistic mixes +inf and -inf log-ratios.
    #[error("indeterminate score: a suffix mixes +inf and -inf log-likelihood ratios")]
    IndeterminateScore,

    /// An experiment configuration is unusable.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// I/O failure, annotated with the path involved.
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// (De)serialization failure.
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
