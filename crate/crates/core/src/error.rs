use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// Non-finite forces or an energy blow-up during integration.
    #[error("integration failed at step {step}: {reason}")]
    Integration { step: u64, reason: String },

    /// Failure inside the Langevin sampler.
    #[error("sampling failed at langevin step {step}: {reason}")]
    Sampling { step: u64, reason: String },

    #[error("statistics error: {0}")]
    Statistics(String),

    #[error("series alignment error: {0}")]
    Alignment(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line harness.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parse(_) | Error::Alignment(_) | Error::Statistics(_) => 1,
            Error::Domain(_) | Error::Integration { .. } | Error::Sampling { .. } => 2,
            Error::Io(_) => 3,
        }
    }
}
