use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("out of range: {0}")]
    OutOfRange(String),

    /// A traced component left the window before closing.
    #[error("component escapes the window (size {window})")]
    EscapesWindow { window: i64 },

    /// The adaptive window search hit its configured cap before the
    /// component closed. Never silently truncated; callers must count it.
    #[error("window budget exceeded (max window {max_window})")]
    BudgetExceeded { max_window: i64 },

    /// The excursion-pair bijection failed on real data. This is a test
    /// failure, not a recoverable condition.
    #[error("excursion-pair bijection violated: {0}")]
    ViolatedBijection(String),

    /// Internal assertion: a vertex without exactly two incident edges,
    /// or a trace that ran away.
    #[error("corrupt configuration: {0}")]
    CorruptConfiguration(String),

    /// The deterministic path rule got stuck. Must never fire.
    #[error("path algorithm violation: {0}")]
    AlgorithmViolation(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("render refused: {0}")]
    RenderRefused(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
