use std::fmt;
use std::sync::Arc;

use super::{
    AttackerPolicy, DeterministicPolicyTable, FixedOrder, ParticlePolicy, ParticleSettings, ProbMapPolicy,
    ProbMapSettings, RandomPolicy, TablePolicy,
};
use crate::board::Board;
use crate::Result;

/// Recipe for fresh per-episode attacker instances.
#[derive(Debug, Clone)]
pub enum AttackerSpec {
    Random,
    ProbMap(ProbMapSettings),
    Particle(ParticleSettings),
    Fixed(Vec<usize>),
    Table(Arc<DeterministicPolicyTable>),
}

impl AttackerSpec {
    pub fn build(&self, board: &Arc<Board>) -> Result<Box<dyn AttackerPolicy>> {
        Ok(match self {
            AttackerSpec::Random => Box::new(RandomPolicy),
            AttackerSpec::ProbMap(s) => Box::new(ProbMapPolicy::new(Arc::clone(board), *s)),
            AttackerSpec::Particle(s) => Box::new(ParticlePolicy::new(Arc::clone(board), *s)?),
            AttackerSpec::Fixed(order) => Box::new(FixedOrder::new(order.clone())),
            AttackerSpec::Table(t) => Box::new(TablePolicy::new(Arc::clone(t))),
        })
    }

    pub fn is_deterministic(&self) -> bool {
        !matches!(self, AttackerSpec::Random | AttackerSpec::Particle(_))
    }

    /// Identifier used in reports; tables are identified by name and content.
    pub fn id(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for AttackerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttackerSpec::Random => f.write_str("random"),
            AttackerSpec::ProbMap(s) if s.parity => f.write_str("probmap"),
            AttackerSpec::ProbMap(_) => f.write_str("probmap-noparity"),
            AttackerSpec::Particle(s) => write!(f, "particle{}", s.particles),
            AttackerSpec::Fixed(order) => {
                let cells: Vec<String> = order.iter().map(|c| c.to_string()).collect();
                write!(f, "fixed[{}]", cells.join("."))
            }
            AttackerSpec::Table(t) => write!(f, "{}#{:016x}", t.name(), t.fingerprint()),
        }
    }
}
