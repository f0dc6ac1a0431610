use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::Rng;

use super::cells::CellSet;
use super::config::{Board, BoardConfig, Placement, ShipPlacement};
use crate::{Error, Result};

/// A legal hidden layout: one placement per ship, in fleet order.
///
/// Ordering is lexicographic over `(anchor, orientation)` of ship 0, then
/// ship 1, and so on; this is the canonical order of enumerated layouts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Layout {
    placements: Vec<Placement>,
    ship_cells: Vec<CellSet>,
    occupied: CellSet,
}

impl Layout {
    pub fn new(board: &Board, placements: &[Placement]) -> Result<Self> {
        if placements.len() != board.num_ships() {
            return Err(Error::DimensionMismatch {
                expected: board.num_ships(),
                got: placements.len(),
            });
        }
        let mut ships = Vec::with_capacity(placements.len());
        for (ship, &placement) in placements.iter().enumerate() {
            let sp = board
                .ship_placement(ship, placement)
                .ok_or_else(|| Error::InvalidConfig(format!("ship {ship} at {placement:?} is out of bounds")))?;
            if ships.iter().any(|other| !board.compatible(&sp, other)) {
                return Err(Error::InvalidConfig(format!("ship {ship} at {placement:?} overlaps")));
            }
            ships.push(sp);
        }
        Ok(Self::from_ship_placements(&ships))
    }

    pub(crate) fn from_ship_placements(ships: &[ShipPlacement]) -> Self {
        let ship_cells: Vec<CellSet> = ships.iter().map(|s| s.cells).collect();
        Layout {
            placements: ships.iter().map(|s| s.placement).collect(),
            occupied: ship_cells.iter().fold(CellSet::EMPTY, |acc, &c| acc.union(c)),
            ship_cells,
        }
    }

    pub fn placements(&self) -> &[Placement] {
        &self.placements
    }

    pub fn ship_cells(&self, ship: usize) -> CellSet {
        self.ship_cells[ship]
    }

    pub fn all_ship_cells(&self) -> &[CellSet] {
        &self.ship_cells
    }

    pub fn occupied(&self) -> CellSet {
        self.occupied
    }

    pub fn ship_at(&self, cell: usize) -> Option<usize> {
        self.ship_cells.iter().position(|s| s.contains(cell))
    }

    /// Compact id such as `0H,5V` (anchor and orientation per ship).
    pub fn id(&self) -> String {
        self.placements
            .iter()
            .map(|p| {
                let o = match p.orientation {
                    super::Orientation::Horizontal => 'H',
                    super::Orientation::Vertical => 'V',
                };
                format!("{}{o}", p.anchor)
            })
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn parse_id(board: &Board, id: &str) -> Result<Self> {
        let placements = id
            .split(',')
            .map(|tok| {
                let tok = tok.trim();
                let (num, o) = tok.split_at(tok.len().saturating_sub(1));
                let orientation = match o {
                    "H" => super::Orientation::Horizontal,
                    "V" => super::Orientation::Vertical,
                    _ => return Err(Error::InvalidConfig(format!("bad layout token `{tok}`"))),
                };
                let anchor = num
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("bad layout token `{tok}`")))?;
                Ok(Placement { anchor, orientation })
            })
            .collect::<Result<Vec<_>>>()?;
        Layout::new(board, &placements)
    }
}

/// The enumerated latent set of a board, in canonical order, with reverse lookup.
#[derive(Debug)]
pub struct LayoutSet {
    board: Arc<Board>,
    layouts: Vec<Layout>,
    index: HashMap<Layout, usize>,
}

impl LayoutSet {
    pub fn enumerate(board: &Arc<Board>) -> Result<Arc<LayoutSet>> {
        let layouts = enumerate_layouts(board)?;
        let index = layouts.iter().cloned().enumerate().map(|(i, l)| (l, i)).collect();
        Ok(Arc::new(LayoutSet {
            board: Arc::clone(board),
            layouts,
            index,
        }))
    }

    pub fn board(&self) -> &Arc<Board> {
        &self.board
    }

    pub fn layouts(&self) -> &[Layout] {
        &self.layouts
    }

    pub fn len(&self) -> usize {
        self.layouts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layouts.is_empty()
    }

    pub fn get(&self, i: usize) -> &Layout {
        &self.layouts[i]
    }

    pub fn index_of(&self, layout: &Layout) -> Option<usize> {
        self.index.get(layout).copied()
    }

    /// Process-wide enumeration of `board`'s configuration, or `None` when
    /// it has more than `limit` layouts (or more than the board's guard).
    pub fn shared(board: &Arc<Board>, limit: usize) -> Option<Arc<LayoutSet>> {
        type Cache = Mutex<HashMap<BoardConfig, Option<Arc<LayoutSet>>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let cached = cache
            .lock()
            .expect("layout cache poisoned")
            .get(board.config())
            .cloned();
        let set = match cached {
            Some(set) => set,
            None => {
                let set = LayoutSet::enumerate(board).ok();
                cache
                    .lock()
                    .expect("layout cache poisoned")
                    .insert(board.config().clone(), set.clone());
                set
            }
        };
        set.filter(|s| s.len() <= limit)
    }
}

/// Every legal layout exactly once, in canonical order.
///
/// Fails with [`Error::GuardExceeded`] as soon as more than
/// `enumeration_guard` layouts have been found.
pub fn enumerate_layouts(board: &Board) -> Result<Vec<Layout>> {
    let limit = board.config().enumeration_guard;
    let mut out = Vec::new();
    let mut stack = Vec::with_capacity(board.num_ships());
    let mut visit = |ships: &[ShipPlacement]| -> bool {
        if out.len() >= limit {
            return false;
        }
        out.push(Layout::from_ship_placements(ships));
        true
    };
    if !dfs(board, &mut stack, &mut visit) {
        return Err(Error::GuardExceeded {
            what: "layout enumeration",
            count: limit + 1,
            limit,
        });
    }
    Ok(out)
}

/// Number of legal layouts, or `None` once the count passes `limit`.
pub fn count_layouts(board: &Board, limit: usize) -> Option<usize> {
    let mut count = 0usize;
    let mut stack = Vec::with_capacity(board.num_ships());
    let mut visit = |_: &[ShipPlacement]| -> bool {
        count += 1;
        count <= limit
    };
    dfs(board, &mut stack, &mut visit).then_some(count)
}

fn dfs<F>(board: &Board, stack: &mut Vec<ShipPlacement>, visit: &mut F) -> bool
where
    F: FnMut(&[ShipPlacement]) -> bool,
{
    let ship = stack.len();
    if ship == board.num_ships() {
        return visit(stack);
    }
    for sp in board.placements(ship) {
        if stack.iter().all(|other| board.compatible(sp, other)) {
            stack.push(*sp);
            let keep_going = dfs(board, stack, visit);
            stack.pop();
            if !keep_going {
                return false;
            }
        }
    }
    true
}

const REJECTION_BUDGET: usize = 1_000_000;

/// Exact uniform draw from the legal layouts: place every ship independently
/// and uniformly, reject the whole layout on any conflict.
pub fn sample_uniform_layout<R: Rng + ?Sized>(board: &Board, rng: &mut R) -> Result<Layout> {
    let mut ships = Vec::with_capacity(board.num_ships());
    'attempt: for _ in 0..REJECTION_BUDGET {
        ships.clear();
        for ship in 0..board.num_ships() {
            let table = board.placements(ship);
            let sp = table[rng.gen_range(0..table.len())];
            if ships.iter().any(|other| !board.compatible(&sp, other)) {
                continue 'attempt;
            }
            ships.push(sp);
        }
        return Ok(Layout::from_ship_placements(&ships));
    }
    Err(Error::EmptySupport)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::BoardConfig;
    use crate::seed::rng_from;
    use std::collections::BTreeSet;

    fn board(h: usize, w: usize, ships: &[usize]) -> Arc<Board> {
        Board::new(BoardConfig::new(h, w, ships)).unwrap()
    }

    /// Independent oracle: every (anchor, orientation) tuple per ship, kept
    /// when in bounds and pairwise disjoint, using plain coordinate sets.
    fn brute_force(h: usize, w: usize, ships: &[usize]) -> BTreeSet<Vec<BTreeSet<usize>>> {
        let mut per_ship: Vec<Vec<BTreeSet<usize>>> = Vec::new();
        for &len in ships {
            let mut options = BTreeSet::new();
            for r in 0..h {
                for c in 0..w {
                    if c + len <= w {
                        options.insert((0..len).map(|k| r * w + c + k).collect::<BTreeSet<_>>());
                    }
                    if r + len <= h {
                        options.insert((0..len).map(|k| (r + k) * w + c).collect::<BTreeSet<_>>());
                    }
                }
            }
            per_ship.push(options.into_iter().collect());
        }
        let mut out = BTreeSet::new();
        let mut choice = vec![0usize; ships.len()];
        loop {
            let cells: Vec<BTreeSet<usize>> = choice
                .iter()
                .enumerate()
                .map(|(s, &i)| per_ship[s][i].clone())
                .collect();
            let total: usize = cells.iter().map(|c| c.len()).sum();
            let union: BTreeSet<usize> = cells.iter().flatten().copied().collect();
            if union.len() == total {
                out.insert(cells);
            }
            let mut k = 0;
            loop {
                if k == ships.len() {
                    return out;
                }
                choice[k] += 1;
                if choice[k] < per_ship[k].len() {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
        }
    }

    fn as_sets(board: &Board, layouts: &[Layout]) -> BTreeSet<Vec<BTreeSet<usize>>> {
        layouts
            .iter()
            .map(|l| {
                (0..board.num_ships())
                    .map(|s| l.ship_cells(s).iter().collect())
                    .collect()
            })
            .collect()
    }

    #[test]
    fn forced_single_layout() {
        let b = board(1, 2, &[2]);
        assert_eq!(enumerate_layouts(&b).unwrap().len(), 1);
    }

    #[test]
    fn three_by_three_has_twelve() {
        let b = board(3, 3, &[2]);
        assert_eq!(enumerate_layouts(&b).unwrap().len(), 12);
    }

    #[test]
    fn one_by_three_layouts() {
        let b = board(1, 3, &[2]);
        let layouts = enumerate_layouts(&b).unwrap();
        assert_eq!(layouts.len(), 2);
        assert_eq!(layouts[0].occupied(), [0, 1].into_iter().collect());
        assert_eq!(layouts[1].occupied(), [1, 2].into_iter().collect());
    }

    #[test]
    fn matches_brute_force_up_to_four_by_four() {
        for (h, w, ships) in [
            (3, 3, vec![2]),
            (3, 3, vec![2, 2]),
            (2, 4, vec![3, 1]),
            (4, 4, vec![3, 2]),
            (4, 4, vec![2, 2, 2]),
            (3, 4, vec![3, 3]),
        ] {
            let b = board(h, w, &ships);
            let layouts = enumerate_layouts(&b).unwrap();
            let unique: BTreeSet<_> = layouts.iter().collect();
            assert_eq!(unique.len(), layouts.len(), "duplicates on {h}x{w} {ships:?}");
            assert!(layouts.windows(2).all(|p| p[0] < p[1]), "canonical order");
            assert_eq!(as_sets(&b, &layouts), brute_force(h, w, &ships), "{h}x{w} {ships:?}");
            for l in &layouts {
                assert!(Layout::new(&b, l.placements()).is_ok());
            }
        }
    }

    #[test]
    fn guard_trips() {
        let b = Board::new(BoardConfig::standard().with_enumeration_guard(1000)).unwrap();
        assert!(matches!(enumerate_layouts(&b), Err(Error::GuardExceeded { .. })));
        assert_eq!(count_layouts(&b, 1000), None);
        assert_eq!(count_layouts(&board(3, 3, &[2]), 1000), Some(12));
    }

    #[test]
    fn no_touch_removes_adjacent_layouts() {
        let touching = enumerate_layouts(&board(3, 3, &[2, 1])).unwrap().len();
        let b = Board::new(BoardConfig::new(3, 3, &[2, 1]).with_no_touch(true)).unwrap();
        let apart = enumerate_layouts(&b).unwrap();
        assert!(apart.len() < touching);
        for l in &apart {
            let a = b.ship_placement(0, l.placements()[0]).unwrap();
            assert!(a.halo.is_disjoint(l.ship_cells(1)));
        }
    }

    #[test]
    fn layout_ids_round_trip() {
        let b = board(4, 4, &[3, 2]);
        for l in enumerate_layouts(&b).unwrap() {
            assert_eq!(Layout::parse_id(&b, &l.id()).unwrap(), l);
        }
    }

    #[test]
    fn uniform_sampler_is_legal() {
        let b = Board::new(BoardConfig::standard()).unwrap();
        let mut rng = rng_from(3);
        for _ in 0..200 {
            let l = sample_uniform_layout(&b, &mut rng).unwrap();
            assert_eq!(l.occupied().len(), 17);
            assert!(Layout::new(&b, l.placements()).is_ok());
        }
    }
}
