use thiserror::Error;

use crate::game::GameSolution;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{what}: {count} exceeds the guard of {limit}")]
    GuardExceeded {
        what: &'static str,
        count: usize,
        limit: usize,
    },

    #[error("illegal action: cell {cell}")]
    IllegalAction { cell: usize },

    #[error("layout is inconsistent with the recorded shots: {0}")]
    InconsistentState(String),

    #[error("policy `{policy}` emitted illegal cell {cell} at step {step}")]
    PolicyViolation { policy: String, cell: usize, step: usize },

    #[error("distribution has empty support")]
    EmptySupport,

    #[error("weight mismatch: {0}")]
    WeightMismatch(String),

    #[error("particle filter depleted after {attempts} replenishment attempts")]
    ParticleDepletion { attempts: usize },

    #[error("no layout is consistent with the shot log")]
    ZeroPosterior,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("double oracle did not converge: gap {:.3e} after {} iterations", .0.duality_gap, .0.iterations)]
    NotConverged(Box<GameSolution>),

    #[error("discount factor {0} is outside (0, 1)")]
    GammaOutOfRange(f64),

    #[error("confidence level delta {0} is outside (0, 1)")]
    BadDelta(f64),

    #[error("reports belong to different policies: `{nominal}` vs `{stress}`")]
    PolicyMismatch { nominal: String, stress: String },

    #[error("policy table has no entry for history `{0}`")]
    UnmappedHistory(String),

    #[error("generation {generation}: {source}")]
    Generation {
        generation: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn at_generation(self, generation: usize) -> Self {
        Error::Generation {
            generation,
            source: Box::new(self),
        }
    }
}
