use rand::Rng;

use crate::board::{Board, CellSet, InfoKey, Layout, ShipPlacement};

/// Per-ship placements that agree with the shot record on their own:
/// sunk ships sit inside the hits before their sinking shot plus that cell;
/// unsunk ships avoid misses and are not already fully hit.
pub(crate) fn ship_candidates(board: &Board, key: &InfoKey) -> Vec<Vec<ShipPlacement>> {
    (0..board.num_ships())
        .map(|ship| {
            board
                .placements(ship)
                .iter()
                .filter(|p| match &key.sinks[ship] {
                    Some(s) => p.cells.contains(s.cell) && p.cells.is_subset(s.hits_before.with(s.cell)),
                    None => p.cells.is_disjoint(key.miss) && !p.cells.is_subset(key.hit),
                })
                .copied()
                .collect()
        })
        .collect()
}

const ATTRIBUTION_LIMIT: usize = 10_000;

/// Hit cells that belong to a sunk ship in every joint placement of the sunk
/// ships compatible with their records. Falls back to the sinking cells
/// alone when the search is too large.
pub(crate) fn resolved_cells(board: &Board, key: &InfoKey, candidates: &[Vec<ShipPlacement>]) -> CellSet {
    let sunk: Vec<usize> = (0..board.num_ships()).filter(|&i| key.sinks[i].is_some()).collect();
    let sink_cells: CellSet = key.sinks.iter().flatten().map(|s| s.cell).collect();
    if sunk.is_empty() {
        return CellSet::EMPTY;
    }
    if sunk.iter().all(|&i| candidates[i].len() == 1) {
        return sunk
            .iter()
            .fold(CellSet::EMPTY, |acc, &i| acc.union(candidates[i][0].cells));
    }
    let mut common: Option<CellSet> = None;
    let mut visited = 0usize;
    let mut stack: Vec<ShipPlacement> = Vec::with_capacity(sunk.len());
    let complete = attribution_dfs(board, &sunk, candidates, &mut stack, &mut visited, &mut |cells| {
        common = Some(common.map_or(cells, |c| c.intersection(cells)));
    });
    match common {
        Some(c) if complete => c.union(sink_cells),
        _ => sink_cells,
    }
}

fn attribution_dfs(
    board: &Board,
    sunk: &[usize],
    candidates: &[Vec<ShipPlacement>],
    stack: &mut Vec<ShipPlacement>,
    visited: &mut usize,
    on_leaf: &mut dyn FnMut(CellSet),
) -> bool {
    if stack.len() == sunk.len() {
        *visited += 1;
        on_leaf(stack.iter().fold(CellSet::EMPTY, |acc, p| acc.union(p.cells)));
        return *visited < ATTRIBUTION_LIMIT;
    }
    for p in &candidates[sunk[stack.len()]] {
        if stack.iter().all(|q| board.compatible(p, q)) {
            stack.push(*p);
            let more = attribution_dfs(board, sunk, candidates, stack, visited, on_leaf);
            stack.pop();
            if !more {
                return false;
            }
        }
    }
    true
}

/// One exact draw from the uniform posterior given `key`: each ship is placed
/// uniformly among its candidates and the whole draw is rejected unless the
/// ships are compatible and cover every hit. `None` after `attempts` failures.
pub(crate) fn sample_consistent<R: Rng + ?Sized>(
    board: &Board,
    key: &InfoKey,
    candidates: &[Vec<ShipPlacement>],
    attempts: usize,
    rng: &mut R,
) -> (Option<Layout>, usize) {
    if candidates.iter().any(|c| c.is_empty()) {
        return (None, 0);
    }
    let mut ships: Vec<ShipPlacement> = Vec::with_capacity(candidates.len());
    for attempt in 1..=attempts {
        ships.clear();
        let mut ok = true;
        for cands in candidates {
            let p = cands[rng.gen_range(0..cands.len())];
            if ships.iter().any(|q| !board.compatible(&p, q)) {
                ok = false;
                break;
            }
            ships.push(p);
        }
        if ok {
            let covered = ships.iter().fold(CellSet::EMPTY, |acc, p| acc.union(p.cells));
            if key.hit.is_subset(covered) {
                return (Some(Layout::from_ship_placements(&ships)), attempt);
            }
        }
    }
    (None, attempts)
}

/// Randomized depth-first search for any layout consistent with `key`.
/// Ships are placed most-constrained first; a branch is cut as soon as some
/// uncovered hit can no longer be covered by a remaining ship.
pub(crate) fn find_consistent<R: Rng + ?Sized>(
    board: &Board,
    key: &InfoKey,
    candidates: &[Vec<ShipPlacement>],
    node_budget: usize,
    rng: &mut R,
) -> Option<Layout> {
    use rand::seq::SliceRandom;
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by_key(|&i| candidates[i].len());
    let shuffled: Vec<Vec<ShipPlacement>> = candidates
        .iter()
        .map(|c| {
            let mut c = c.clone();
            c.shuffle(rng);
            c
        })
        .collect();
    let mut chosen: Vec<Option<ShipPlacement>> = vec![None; candidates.len()];
    let mut nodes = 0usize;
    if search(board, key, &shuffled, &order, 0, &mut chosen, &mut nodes, node_budget) {
        let ships: Vec<ShipPlacement> = chosen.into_iter().map(|p| p.expect("all placed")).collect();
        Some(Layout::from_ship_placements(&ships))
    } else {
        None
    }
}

#[allow(clippy::too_many_arguments)]
fn search(
    board: &Board,
    key: &InfoKey,
    candidates: &[Vec<ShipPlacement>],
    order: &[usize],
    depth: usize,
    chosen: &mut [Option<ShipPlacement>],
    nodes: &mut usize,
    budget: usize,
) -> bool {
    *nodes += 1;
    if *nodes > budget {
        return false;
    }
    let covered = chosen
        .iter()
        .flatten()
        .fold(CellSet::EMPTY, |acc, p| acc.union(p.cells));
    if depth == order.len() {
        return key.hit.is_subset(covered);
    }
    let open = key.hit.difference(covered);
    let coverable = order[depth..].iter().fold(CellSet::EMPTY, |acc, &i| {
        candidates[i]
            .iter()
            .filter(|p| chosen.iter().flatten().all(|q| board.compatible(p, q)))
            .fold(acc, |a, p| a.union(p.cells))
    });
    if !open.is_subset(coverable) {
        return false;
    }
    let ship = order[depth];
    for p in &candidates[ship] {
        if chosen.iter().flatten().all(|q| board.compatible(p, q)) {
            chosen[ship] = Some(*p);
            if search(board, key, candidates, order, depth + 1, chosen, nodes, budget) {
                return true;
            }
            chosen[ship] = None;
            if *nodes > budget {
                return false;
            }
        }
    }
    false
}

/// Metropolis moves targeting the uniform posterior: re-place one ship
/// uniformly among its candidates and keep the move iff the layout stays
/// consistent.
pub(crate) fn rejuvenate<R: Rng + ?Sized>(
    board: &Board,
    key: &InfoKey,
    candidates: &[Vec<ShipPlacement>],
    layout: &Layout,
    steps: usize,
    rng: &mut R,
) -> Layout {
    let mut ships: Vec<ShipPlacement> = layout
        .placements()
        .iter()
        .enumerate()
        .map(|(i, &p)| board.ship_placement(i, p).expect("legal layouts are in bounds"))
        .collect();
    for _ in 0..steps {
        let ship = rng.gen_range(0..ships.len());
        let cands = &candidates[ship];
        let p = cands[rng.gen_range(0..cands.len())];
        let fits = ships
            .iter()
            .enumerate()
            .all(|(j, q)| j == ship || board.compatible(&p, q));
        if !fits {
            continue;
        }
        let covered = ships
            .iter()
            .enumerate()
            .fold(p.cells, |acc, (j, q)| if j == ship { acc } else { acc.union(q.cells) });
        if key.hit.is_subset(covered) {
            ships[ship] = p;
        }
    }
    Layout::from_ship_placements(&ships)
}
