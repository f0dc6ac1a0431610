//! Attacker policies: scripted baselines, belief tracking, and explicit
//! deterministic policy tables.

mod belief;
mod constraints;
mod particle;
mod probmap;
mod simple;
mod spec;
mod table;

pub use belief::{exact_posterior, BeliefState};
pub use particle::{ParticlePolicy, ParticleSettings, REPLENISH_ATTEMPTS};
pub use probmap::{ProbMapPolicy, ProbMapSettings};
pub use simple::{FixedOrder, RandomPolicy};
pub use spec::AttackerSpec;
pub use table::{DeterministicPolicyTable, TablePolicy};

use crate::board::PublicState;
use crate::seed::EpisodeRng;
use crate::Result;

/// A shot-selection rule. Instances carry per-episode state and must not be
/// shared between concurrent episodes.
pub trait AttackerPolicy: Send {
    fn name(&self) -> String;

    /// Clears per-episode state.
    fn reset(&mut self) {}

    /// Chooses the next cell. Must return a cell in `state.legal_actions()`.
    fn act(&mut self, state: &PublicState, rng: &mut EpisodeRng) -> Result<usize>;

    /// True when the action depends only on the public history.
    fn is_deterministic(&self) -> bool;
}

/// Lowest-index cell maximizing `score` among `legal` cells.
pub(crate) fn argmax_cell(score: &[f64], legal: crate::board::CellSet) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for c in legal.iter() {
        if best.is_none_or(|(_, s)| score[c] > s) {
            best = Some((c, score[c]));
        }
    }
    best.map(|(c, _)| c)
}
