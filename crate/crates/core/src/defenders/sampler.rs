use rand::Rng;

use super::family::DefenderFamily;
use crate::board::{sample_uniform_layout, Board, Layout, ShipPlacement};
use crate::Result;

/// Metropolis chain over legal layouts with stationary law `∝ exp(score)`.
///
/// Most proposals pick a ship uniformly and re-place it uniformly among all
/// of its in-bounds placements; proposals that collide are rejected, which
/// keeps the proposal symmetric. One step in [`GLOBAL_MOVE_EVERY`] instead
/// proposes a fresh uniform layout, so the chain stays irreducible on
/// cramped boards where ships cannot pass each other.
pub(crate) const GLOBAL_MOVE_EVERY: u32 = 10;

pub(crate) struct MetropolisChain<'a> {
    board: &'a Board,
    family: &'a DefenderFamily,
    ships: Vec<ShipPlacement>,
    score: f64,
}

impl<'a> MetropolisChain<'a> {
    pub fn start<R: Rng + ?Sized>(board: &'a Board, family: &'a DefenderFamily, rng: &mut R) -> Result<Self> {
        let layout = sample_uniform_layout(board, rng)?;
        Ok(MetropolisChain {
            board,
            family,
            score: family.score(board, &layout),
            ships: placements_of(board, &layout),
        })
    }

    pub fn advance<R: Rng + ?Sized>(&mut self, steps: usize, rng: &mut R) {
        for _ in 0..steps {
            self.step(rng);
        }
    }

    fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        if rng.gen_ratio(1, GLOBAL_MOVE_EVERY) {
            self.global_step(rng);
            return;
        }
        let ship = rng.gen_range(0..self.ships.len());
        let table = self.board.placements(ship);
        let candidate = table[rng.gen_range(0..table.len())];
        let clash = self
            .ships
            .iter()
            .enumerate()
            .any(|(j, other)| j != ship && !self.board.compatible(&candidate, other));
        if clash {
            return;
        }
        let previous = std::mem::replace(&mut self.ships[ship], candidate);
        let proposed = self.family.score(self.board, &self.layout());
        let accept = proposed >= self.score || rng.gen::<f64>() < (proposed - self.score).exp();
        if accept {
            self.score = proposed;
        } else {
            self.ships[ship] = previous;
        }
    }

    fn global_step<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let Ok(layout) = sample_uniform_layout(self.board, rng) else {
            return;
        };
        let proposed = self.family.score(self.board, &layout);
        if proposed >= self.score || rng.gen::<f64>() < (proposed - self.score).exp() {
            self.score = proposed;
            self.ships = placements_of(self.board, &layout);
        }
    }

    pub fn layout(&self) -> Layout {
        Layout::from_ship_placements(&self.ships)
    }
}

fn placements_of(board: &Board, layout: &Layout) -> Vec<ShipPlacement> {
    layout
        .placements()
        .iter()
        .enumerate()
        .map(|(i, &p)| board.ship_placement(i, p).expect("legal layouts are in bounds"))
        .collect()
}
