use std::io::Write;

use super::config::Board;
use super::layout::Layout;
use super::state::{PublicState, Shot};
use crate::attackers::AttackerPolicy;
use crate::seed::rng_from;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpisodeResult {
    /// Shots fired; equals `T_max` when the episode was truncated.
    pub tau: usize,
    pub truncated: bool,
    pub shot_log: Vec<Shot>,
}

/// Plays one episode of `policy` against a fixed `layout`.
///
/// Runs until every ship is sunk or the horizon `T_max` is reached. The
/// policy is reset first and receives a generator seeded from `seed`.
pub fn rollout(policy: &mut dyn AttackerPolicy, layout: &Layout, board: &Board, seed: u64) -> Result<EpisodeResult> {
    policy.reset();
    let mut rng = rng_from(seed);
    let mut state = PublicState::new(board);
    let t_max = board.t_max();
    while !state.all_sunk() && state.t() < t_max {
        let cell = policy.act(&state, &mut rng)?;
        if !state.is_legal(cell) {
            return Err(Error::PolicyViolation {
                policy: policy.name(),
                cell,
                step: state.t(),
            });
        }
        state.apply_unchecked(layout, cell);
    }
    Ok(EpisodeResult {
        tau: state.t(),
        truncated: !state.all_sunk(),
        shot_log: state.shot_log().to_vec(),
    })
}

/// Writes `episode,step,cell,outcome` rows.
pub fn write_shot_log_csv<W: Write>(mut out: W, episodes: &[EpisodeResult]) -> Result<()> {
    writeln!(out, "episode,step,cell,outcome")?;
    for (e, ep) in episodes.iter().enumerate() {
        for (t, shot) in ep.shot_log.iter().enumerate() {
            writeln!(out, "{e},{t},{},{}", shot.cell, shot.outcome)?;
        }
    }
    Ok(())
}
