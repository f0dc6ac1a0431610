use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::constraints::{resolved_cells, ship_candidates};
use super::{argmax_cell, AttackerPolicy};
use crate::board::{Board, LayoutSet, PublicState};
use crate::seed::EpisodeRng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbMapSettings {
    /// Restrict hunt-mode shots to a checkerboard class whose spacing is the
    /// shortest remaining ship.
    pub parity: bool,
    /// Target-mode weight multiplier per unresolved hit a placement covers.
    pub target_boost: f64,
    /// Use exact joint posterior counts when the board has at most this many
    /// legal layouts.
    pub exact_limit: usize,
}

impl Default for ProbMapSettings {
    fn default() -> Self {
        ProbMapSettings {
            parity: true,
            target_boost: 10.0,
            exact_limit: 100_000,
        }
    }
}

/// Placement-counting hunt/target policy. Deterministic; ties go to the
/// lowest cell index.
#[derive(Debug, Clone)]
pub struct ProbMapPolicy {
    board: Arc<Board>,
    settings: ProbMapSettings,
    universe: Option<Arc<LayoutSet>>,
}

impl ProbMapPolicy {
    pub fn new(board: Arc<Board>, settings: ProbMapSettings) -> Self {
        let universe = LayoutSet::shared(&board, settings.exact_limit);
        ProbMapPolicy {
            board,
            settings,
            universe,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.universe.is_some()
    }

    /// Per-cell scores the policy maximizes over legal cells.
    pub fn scores(&self, state: &PublicState) -> Vec<f64> {
        match &self.universe {
            Some(universe) => exact_counts(universe, state),
            None => self.heuristic_scores(state),
        }
    }

    fn heuristic_scores(&self, state: &PublicState) -> Vec<f64> {
        let board = &*self.board;
        let key = state.info_key();
        let candidates = ship_candidates(board, key);
        let resolved = resolved_cells(board, key, &candidates);
        let unresolved = key.hit.difference(resolved);
        let blocked = key.miss.union(resolved);
        let legal = state.legal_mask();
        let mut score = vec![0.0; board.cells()];

        let open_ships: Vec<usize> = (0..board.num_ships()).filter(|&i| key.sinks[i].is_none()).collect();
        let placements = |ship: usize| {
            board
                .placements(ship)
                .iter()
                .filter(move |p| p.cells.is_disjoint(blocked) && !p.cells.is_subset(key.hit))
        };

        if !unresolved.is_empty() {
            for &ship in &open_ships {
                for p in placements(ship) {
                    let covered = p.cells.intersection(unresolved).len();
                    if covered > 0 {
                        let w = self.settings.target_boost.powi(covered as i32);
                        for c in p.cells.intersection(legal).iter() {
                            score[c] += w;
                        }
                    }
                }
            }
            if legal.iter().any(|c| score[c] > 0.0) {
                return score;
            }
        }

        for &ship in &open_ships {
            for p in placements(ship) {
                for c in p.cells.intersection(legal).iter() {
                    score[c] += 1.0;
                }
            }
        }
        if self.settings.parity {
            let spacing = open_ships.iter().map(|&i| board.ship_length(i)).min().unwrap_or(1);
            if spacing > 1 {
                let class_of = |c: usize| {
                    let (r, col) = board.row_col(c);
                    (r + col) % spacing
                };
                // keep the class with the most legal mass; ties go to the class
                // holding the single best cell
                let mut mass = vec![0.0; spacing];
                for c in legal.iter() {
                    mass[class_of(c)] += score[c];
                }
                let top = argmax_cell(&score, legal).map(class_of);
                let keep = (0..spacing)
                    .max_by(|&a, &b| {
                        mass[a]
                            .partial_cmp(&mass[b])
                            .expect("finite scores")
                            .then((Some(a) == top).cmp(&(Some(b) == top)))
                            .then(b.cmp(&a))
                    })
                    .expect("spacing > 1");
                if mass[keep] > 0.0 {
                    for c in 0..board.cells() {
                        if class_of(c) != keep {
                            score[c] = 0.0;
                        }
                    }
                }
            }
        }
        score
    }
}

fn exact_counts(universe: &LayoutSet, state: &PublicState) -> Vec<f64> {
    let key = state.info_key();
    let mut score = vec![0.0; universe.board().cells()];
    for layout in universe.layouts() {
        if key.admits(layout) {
            for c in layout.occupied().iter() {
                score[c] += 1.0;
            }
        }
    }
    score
}

impl AttackerPolicy for ProbMapPolicy {
    fn name(&self) -> String {
        if self.settings.parity {
            "probmap".into()
        } else {
            "probmap-noparity".into()
        }
    }

    fn act(&mut self, state: &PublicState, _rng: &mut EpisodeRng) -> Result<usize> {
        let scores = self.scores(state);
        argmax_cell(&scores, state.legal_mask()).ok_or(Error::IllegalAction { cell: state.cells() })
    }

    fn is_deterministic(&self) -> bool {
        true
    }
}
