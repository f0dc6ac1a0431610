use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::belief::BeliefState;
use super::constraints::{find_consistent, rejuvenate, sample_consistent, ship_candidates};
use super::{argmax_cell, AttackerPolicy};
use crate::board::{Board, Layout, PublicState};
use crate::seed::EpisodeRng;
use crate::{Error, Result};

/// Attempt budget per replenishment round.
pub const REPLENISH_ATTEMPTS: usize = 10_000;
/// Node budget of the constraint search used when every particle died.
const SEARCH_NODES: usize = 1_000_000;
/// Metropolis moves applied to each duplicated particle.
const REJUVENATION_STEPS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParticleSettings {
    pub particles: usize,
    pub replenish_attempts: usize,
}

impl Default for ParticleSettings {
    fn default() -> Self {
        ParticleSettings {
            particles: 1000,
            replenish_attempts: REPLENISH_ATTEMPTS,
        }
    }
}

/// Particle-filter belief policy: keeps a multiset of layouts consistent with
/// the history and fires the unfired cell most particles occupy.
///
/// After each observation inconsistent particles are dropped and refilled by
/// rejection sampling from the uniform posterior. When the attempt budget
/// runs out, the remainder is filled by copying survivors and moving each
/// copy with a few consistency-preserving Metropolis steps; if nothing
/// survived, a randomized constraint search seeds the set first.
#[derive(Debug, Clone)]
pub struct ParticlePolicy {
    board: Arc<Board>,
    settings: ParticleSettings,
    particles: Vec<Layout>,
    seen: usize,
}

impl ParticlePolicy {
    pub fn new(board: Arc<Board>, settings: ParticleSettings) -> Result<Self> {
        if settings.particles == 0 {
            return Err(Error::InvalidConfig("particle count must be at least 1".into()));
        }
        Ok(ParticlePolicy {
            board,
            settings,
            particles: Vec::new(),
            seen: 0,
        })
    }

    pub fn belief(&self) -> BeliefState {
        BeliefState::from_particles(self.particles.clone())
    }

    /// Brings the particle set up to date with `state`.
    pub fn update(&mut self, state: &PublicState, rng: &mut EpisodeRng) -> Result<()> {
        if state.t() < self.seen || self.particles.is_empty() {
            self.particles.clear();
            self.seen = 0;
        }
        if self.seen == state.t() && !self.particles.is_empty() {
            return Ok(());
        }
        let key = state.info_key();
        self.particles.retain(|l| key.admits(l));
        self.seen = state.t();
        let target = self.settings.particles;
        if self.particles.len() == target {
            return Ok(());
        }
        let candidates = ship_candidates(&self.board, key);
        let mut budget = self.settings.replenish_attempts;
        while self.particles.len() < target && budget > 0 {
            let (layout, used) = sample_consistent(&self.board, key, &candidates, budget, rng);
            budget -= used.min(budget);
            match layout {
                Some(l) => self.particles.push(l),
                None => break,
            }
        }
        if self.particles.is_empty() {
            let seed =
                find_consistent(&self.board, key, &candidates, SEARCH_NODES, rng).ok_or(Error::ParticleDepletion {
                    attempts: self.settings.replenish_attempts,
                })?;
            self.particles.push(seed);
        }
        let survivors = self.particles.len();
        for i in 0..target - survivors {
            let moved = rejuvenate(
                &self.board,
                key,
                &candidates,
                &self.particles[i % survivors],
                REJUVENATION_STEPS,
                rng,
            );
            self.particles.push(moved);
        }
        Ok(())
    }
}

impl AttackerPolicy for ParticlePolicy {
    fn name(&self) -> String {
        format!("particle{}", self.settings.particles)
    }

    fn reset(&mut self) {
        self.particles.clear();
        self.seen = 0;
    }

    fn act(&mut self, state: &PublicState, rng: &mut EpisodeRng) -> Result<usize> {
        self.update(state, rng)?;
        let mut counts = vec![0.0; self.board.cells()];
        for l in &self.particles {
            for c in l.occupied().iter() {
                counts[c] += 1.0;
            }
        }
        argmax_cell(&counts, state.legal_mask()).ok_or(Error::IllegalAction { cell: state.cells() })
    }

    fn is_deterministic(&self) -> bool {
        false
    }
}
