//! Error type shared by all modules.

/// Errors produced by constructors, market arithmetic and the dynamics.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// Shapes of matrices/vectors do not agree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// An economy violates a structural invariant (signs, empty rows, ...).
    #[error("invalid economy: {0}")]
    InvalidEconomy(String),

    /// A value is outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An input is degenerate for the requested dynamic (e.g. a firm whose
    /// valued goods all carry zero spending).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A parameter lies outside the range where a formula is valid.
    #[error("parameter out of range: {0}")]
    Range(String),

    /// A precondition of an operation was violated by the caller.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The requested computation is not supported (e.g. oracle on m > 3).
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
