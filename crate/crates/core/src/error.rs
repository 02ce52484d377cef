use thiserror::Error;

/// Errors raised across the crate.
///
/// The variants line up with the CLI exit codes: input problems are the
/// caller's fault, invariant and verification failures point at a bug (or a
/// tampered artifact), and `ConstructionIncomplete` marks an honest dead end of
/// the separation construction.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("construction incomplete: {0}")]
    ConstructionIncomplete(String),

    #[error("search budget exceeded: {msg}")]
    Budget { msg: String, partial: Option<usize> },
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_) | Error::Parse { .. } | Error::Precondition(_) => 1,
            Error::Invariant(_) | Error::Verification(_) => 2,
            Error::ConstructionIncomplete(_) => 3,
            Error::Budget { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
