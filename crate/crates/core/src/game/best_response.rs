use crate::attackers::DeterministicPolicyTable;
use crate::board::{CellSet, InfoKey, LayoutSet, Observation};
use crate::defenders::{DefenderPolytope, ExplicitDistribution};
use crate::{Error, Result};
use std::collections::HashMap;

/// Largest board (in cells) the exact attacker best response accepts.
pub const DP_CELL_GUARD: usize = 16;
/// Largest layout set the exact attacker best response accepts.
pub const DP_LAYOUT_GUARD: usize = 5000;

const TIE_TOL: f64 = 1e-12;

/// Exact attacker best response to an explicit defender distribution.
///
/// Expectimax over information states, memoized on the set of layouts still
/// consistent plus the hit cells. Returns a table that is total on every
/// history reachable under any layout of the universe, and the optimal
/// expected shots-to-win under `rho`. Ties go to the lowest cell; states
/// of zero probability fire the lowest cell that some consistent layout
/// occupies.
pub fn attacker_best_response(rho: &ExplicitDistribution) -> Result<(DeterministicPolicyTable, f64)> {
    let universe = rho.universe();
    check_guards(universe)?;
    let mut solver = Solver::new(universe, rho.weights());
    let all: Vec<u32> = (0..universe.len() as u32).collect();
    let root_value = solver.value(&all, CellSet::EMPTY);

    let board = universe.board();
    let mut table = DeterministicPolicyTable::new("exact-br", board.num_ships());
    let mut stack = vec![(InfoKey::fresh(board.num_ships()), all)];
    while let Some((key, support)) = stack.pop() {
        if key.all_sunk() || key.fired().len() >= board.t_max() {
            continue;
        }
        solver.value(&support, key.hit);
        let cell = solver.action(&support, key.hit);
        table.insert(key.clone(), cell)?;
        for (outcome, child) in split(universe, &support, key.hit, cell) {
            stack.push((key.advance(cell, outcome), child));
        }
    }
    let total: f64 = rho.weights().iter().sum();
    Ok((table, root_value / total))
}

fn check_guards(universe: &LayoutSet) -> Result<()> {
    let cells = universe.board().cells();
    if cells > DP_CELL_GUARD {
        return Err(Error::GuardExceeded {
            what: "exact best response board cells",
            count: cells,
            limit: DP_CELL_GUARD,
        });
    }
    if universe.board().t_max() < cells {
        return Err(Error::InvalidConfig(
            "exact best response needs an untruncated horizon".into(),
        ));
    }
    if universe.len() > DP_LAYOUT_GUARD {
        return Err(Error::GuardExceeded {
            what: "exact best response layouts",
            count: universe.len(),
            limit: DP_LAYOUT_GUARD,
        });
    }
    Ok(())
}

/// Partitions `support` by the observation firing `cell` would produce.
fn split(universe: &LayoutSet, support: &[u32], hit: CellSet, cell: usize) -> Vec<(Observation, Vec<u32>)> {
    let mut groups: Vec<(Observation, Vec<u32>)> = Vec::new();
    for &z in support {
        let layout = universe.get(z as usize);
        let outcome = match layout.ship_at(cell) {
            None => Observation::Miss,
            Some(ship) if layout.ship_cells(ship).is_subset(hit.with(cell)) => Observation::Sunk(ship),
            Some(_) => Observation::Hit,
        };
        match groups.iter_mut().find(|(o, _)| *o == outcome) {
            Some((_, g)) => g.push(z),
            None => groups.push((outcome, vec![z])),
        }
    }
    groups
}

type MemoKey = (Vec<u64>, CellSet);

struct Solver<'a> {
    universe: &'a LayoutSet,
    weights: &'a [f64],
    memo: HashMap<MemoKey, (f64, usize)>,
}

impl<'a> Solver<'a> {
    fn new(universe: &'a LayoutSet, weights: &'a [f64]) -> Self {
        Solver {
            universe,
            weights,
            memo: HashMap::new(),
        }
    }

    fn key(&self, support: &[u32], hit: CellSet) -> MemoKey {
        let mut bits = vec![0u64; self.universe.len().div_ceil(64)];
        for &z in support {
            bits[z as usize / 64] |= 1 << (z % 64);
        }
        (bits, hit)
    }

    fn action(&self, support: &[u32], hit: CellSet) -> usize {
        self.memo[&self.key(support, hit)].1
    }

    /// Unnormalized expected remaining shots: sum over the support of
    /// `rho(z) * E[remaining tau | z]`.
    fn value(&mut self, support: &[u32], hit: CellSet) -> f64 {
        let key = self.key(support, hit);
        if let Some(&(v, _)) = self.memo.get(&key) {
            return v;
        }
        let layouts = self.universe;
        // every consistent layout shares the sunk status, so checking one suffices
        if layouts.get(support[0] as usize).occupied().is_subset(hit) {
            self.memo.insert(key, (0.0, usize::MAX));
            return 0.0;
        }
        let candidates = support
            .iter()
            .fold(CellSet::EMPTY, |acc, &z| acc.union(layouts.get(z as usize).occupied()))
            .difference(hit);
        let mass: f64 = support.iter().map(|&z| self.weights[z as usize]).sum();
        let result = if mass <= 0.0 {
            (0.0, candidates.first().expect("unsunk layouts have unfired cells"))
        } else {
            let mut best: Option<(f64, usize)> = None;
            for cell in candidates.iter() {
                let mut future = 0.0;
                for (outcome, child) in split(layouts, support, hit, cell) {
                    let child_hit = if outcome.is_hit() { hit.with(cell) } else { hit };
                    future += self.value(&child, child_hit);
                }
                let better = match best {
                    None => true,
                    Some((b, _)) => future < b - TIE_TOL * b.abs().max(1.0),
                };
                if better {
                    best = Some((future, cell));
                }
            }
            let (future, cell) = best.expect("candidates nonempty");
            (mass + future, cell)
        };
        self.memo.insert(key, result);
        result.0
    }
}

/// The generator of `polytope` maximizing expected loss for the per-layout
/// losses `losses`, with that value. Ties go to the earliest generator.
pub fn defender_best_response(losses: &[f64], polytope: &DefenderPolytope) -> Result<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (j, g) in polytope.extreme_points().iter().enumerate() {
        let v = g.expectation(losses)?;
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((j, v));
        }
    }
    best.ok_or(Error::EmptySupport)
}

/// Convenience wrapper returning the maximizing distribution itself.
pub fn defender_best_response_distribution(
    losses: &[f64],
    polytope: &DefenderPolytope,
) -> Result<(ExplicitDistribution, f64)> {
    let (j, v) = defender_best_response(losses, polytope)?;
    Ok((polytope.extreme_points()[j].clone(), v))
}
