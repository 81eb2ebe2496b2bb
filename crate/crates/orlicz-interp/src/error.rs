use thiserror::Error;

/// Error type shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A constructor argument violates its domain (negative exponent,
    /// non-monotone samples, weights not summing to one, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An operation was asked of a Young-function kind that does not
    /// support it (e.g. a doubling envelope of the L_infinity indicator).
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// The exponent p lies outside the index window in which a series
    /// converges, or a required series failed its geometric tail test.
    #[error("divergent: {0}")]
    Divergent(String),

    /// A matrix failed a structural check (not Hermitian, not a projection,
    /// wrong dimensions, off-block entries).
    #[error("structural check failed: {0}")]
    Structure(String),

    /// A numerical verification that is a precondition for continuing
    /// (positivity, tower property, corner smallness) failed.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Run-configuration problems surfaced by the command-line layer.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}
