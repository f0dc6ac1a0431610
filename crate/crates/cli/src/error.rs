use std::path::Path;

use latent_battleship::Error;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// Process exit status; the table is documented in the README.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 3,
            CliError::Io { .. } => 4,
            CliError::Core(e) => core_code(e),
        }
    }
}

fn core_code(e: &Error) -> i32 {
    match e {
        Error::InvalidConfig(_) => 3,
        Error::Io(_) => 4,
        Error::GuardExceeded { .. } => 5,
        Error::NotConverged(_) => 6,
        Error::IllegalAction { .. }
        | Error::InconsistentState(_)
        | Error::PolicyViolation { .. }
        | Error::ParticleDepletion { .. }
        | Error::ZeroPosterior
        | Error::UnmappedHistory(_) => 7,
        Error::EmptySupport
        | Error::WeightMismatch(_)
        | Error::DimensionMismatch { .. }
        | Error::GammaOutOfRange(_)
        | Error::BadDelta(_)
        | Error::PolicyMismatch { .. } => 8,
        Error::Generation { source, .. } => core_code(source),
    }
}
