use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::cells::{CellSet, MAX_CELLS};
use crate::{Error, Result};

pub const DEFAULT_ENUMERATION_GUARD: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

/// Where one ship sits: the top-left cell and the direction it extends in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Placement {
    pub anchor: usize,
    pub orientation: Orientation,
}

/// Board geometry and fleet. Cells are indexed row-major, `0..height * width`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoardConfig {
    pub height: usize,
    pub width: usize,
    pub ship_lengths: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation_cap: Option<usize>,
    /// Forbid ships from sharing an edge or a corner.
    #[serde(default)]
    pub no_touch: bool,
    #[serde(default = "default_guard")]
    pub enumeration_guard: usize,
}

fn default_guard() -> usize {
    DEFAULT_ENUMERATION_GUARD
}

impl BoardConfig {
    pub fn new(height: usize, width: usize, ship_lengths: &[usize]) -> Self {
        BoardConfig {
            height,
            width,
            ship_lengths: ship_lengths.to_vec(),
            truncation_cap: None,
            no_touch: false,
            enumeration_guard: DEFAULT_ENUMERATION_GUARD,
        }
    }

    /// The 10x10 board with the 5-4-3-3-2 fleet.
    pub fn standard() -> Self {
        Self::new(10, 10, &[5, 4, 3, 3, 2])
    }

    pub fn with_truncation(mut self, cap: usize) -> Self {
        self.truncation_cap = Some(cap);
        self
    }

    pub fn with_no_touch(mut self, no_touch: bool) -> Self {
        self.no_touch = no_touch;
        self
    }

    pub fn with_enumeration_guard(mut self, guard: usize) -> Self {
        self.enumeration_guard = guard;
        self
    }

    pub fn cells(&self) -> usize {
        self.height * self.width
    }

    /// Effective horizon: `min(H*W, cap)` with a cap, `H*W` without.
    pub fn t_max(&self) -> usize {
        match self.truncation_cap {
            Some(cap) => cap.min(self.cells()),
            None => self.cells(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.height == 0 || self.width == 0 {
            return Err(Error::InvalidConfig("board height and width must be positive".into()));
        }
        if self.cells() > MAX_CELLS {
            return Err(Error::InvalidConfig(format!(
                "board has {} cells; at most {MAX_CELLS} are supported",
                self.cells()
            )));
        }
        if self.ship_lengths.is_empty() {
            return Err(Error::InvalidConfig("ship_lengths must not be empty".into()));
        }
        let longest = self.height.max(self.width);
        for &len in &self.ship_lengths {
            if len == 0 || len > longest {
                return Err(Error::InvalidConfig(format!(
                    "ship length {len} does not fit a {}x{} board",
                    self.height, self.width
                )));
            }
        }
        let total: usize = self.ship_lengths.iter().sum();
        if total > self.cells() {
            return Err(Error::InvalidConfig(format!(
                "fleet occupies {total} cells but the board has {}",
                self.cells()
            )));
        }
        if self.truncation_cap == Some(0) {
            return Err(Error::InvalidConfig("truncation_cap must be positive".into()));
        }
        Ok(())
    }
}

/// One legal position for a ship of a given length, with its cell mask and,
/// for no-touch boards, the ring of cells around it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShipPlacement {
    pub placement: Placement,
    pub cells: CellSet,
    pub halo: CellSet,
}

/// A validated board with precomputed placement tables and cell masks.
#[derive(Debug)]
pub struct Board {
    config: BoardConfig,
    by_length: HashMap<usize, Arc<[ShipPlacement]>>,
    ring: CellSet,
    even: CellSet,
    adjacent_pairs: Vec<(usize, usize)>,
}

impl Board {
    pub fn new(config: BoardConfig) -> Result<Arc<Board>> {
        config.validate()?;
        let (h, w) = (config.height, config.width);
        let mut by_length = HashMap::new();
        for &len in &config.ship_lengths {
            by_length.entry(len).or_insert_with(|| placements_for(h, w, len).into());
        }
        let mut ring = CellSet::EMPTY;
        let mut even = CellSet::EMPTY;
        let mut adjacent_pairs = Vec::new();
        for r in 0..h {
            for c in 0..w {
                let cell = r * w + c;
                if r == 0 || c == 0 || r + 1 == h || c + 1 == w {
                    ring.insert(cell);
                }
                if (r + c) % 2 == 0 {
                    even.insert(cell);
                }
                if c + 1 < w {
                    adjacent_pairs.push((cell, cell + 1));
                }
                if r + 1 < h {
                    adjacent_pairs.push((cell, cell + w));
                }
            }
        }
        Ok(Arc::new(Board {
            config,
            by_length,
            ring,
            even,
            adjacent_pairs,
        }))
    }

    pub fn config(&self) -> &BoardConfig {
        &self.config
    }

    pub fn height(&self) -> usize {
        self.config.height
    }

    pub fn width(&self) -> usize {
        self.config.width
    }

    pub fn cells(&self) -> usize {
        self.config.cells()
    }

    pub fn num_ships(&self) -> usize {
        self.config.ship_lengths.len()
    }

    pub fn ship_length(&self, ship: usize) -> usize {
        self.config.ship_lengths[ship]
    }

    pub fn t_max(&self) -> usize {
        self.config.t_max()
    }

    /// Every in-bounds placement for `ship`, sorted by (anchor, orientation).
    pub fn placements(&self, ship: usize) -> &[ShipPlacement] {
        &self.by_length[&self.config.ship_lengths[ship]]
    }

    pub fn placements_for_length(&self, len: usize) -> Option<&[ShipPlacement]> {
        self.by_length.get(&len).map(|p| &p[..])
    }

    pub fn all_cells(&self) -> CellSet {
        CellSet::full(self.cells())
    }

    pub fn outer_ring(&self) -> CellSet {
        self.ring
    }

    pub fn even_cells(&self) -> CellSet {
        self.even
    }

    /// Unordered 4-neighbour cell pairs.
    pub fn adjacent_pairs(&self) -> &[(usize, usize)] {
        &self.adjacent_pairs
    }

    pub fn row_col(&self, cell: usize) -> (usize, usize) {
        (cell / self.config.width, cell % self.config.width)
    }

    /// Whether a ship at `candidate` may coexist with one at `other`.
    #[inline]
    pub fn compatible(&self, candidate: &ShipPlacement, other: &ShipPlacement) -> bool {
        if self.config.no_touch {
            candidate.cells.is_disjoint(other.cells.union(other.halo))
        } else {
            candidate.cells.is_disjoint(other.cells)
        }
    }

    pub fn ship_placement(&self, ship: usize, placement: Placement) -> Option<ShipPlacement> {
        let table = self.placements(ship);
        table
            .binary_search_by(|p| p.placement.cmp(&placement))
            .ok()
            .map(|i| table[i])
    }
}

fn placements_for(h: usize, w: usize, len: usize) -> Vec<ShipPlacement> {
    let mut out = Vec::new();
    for r in 0..h {
        for c in 0..w {
            let anchor = r * w + c;
            let mut orientations = vec![Orientation::Horizontal];
            // a single-cell ship has one placement per cell
            if len > 1 {
                orientations.push(Orientation::Vertical);
            }
            for orientation in orientations {
                let fits = match orientation {
                    Orientation::Horizontal => c + len <= w,
                    Orientation::Vertical => r + len <= h,
                };
                if !fits {
                    continue;
                }
                let cells: CellSet = (0..len)
                    .map(|k| match orientation {
                        Orientation::Horizontal => anchor + k,
                        Orientation::Vertical => anchor + k * w,
                    })
                    .collect();
                let mut halo = CellSet::EMPTY;
                for cell in cells.iter() {
                    let (cr, cc) = (cell / w, cell % w);
                    for dr in -1i64..=1 {
                        for dc in -1i64..=1 {
                            let (nr, nc) = (cr as i64 + dr, cc as i64 + dc);
                            if nr >= 0 && nc >= 0 && (nr as usize) < h && (nc as usize) < w {
                                halo.insert(nr as usize * w + nc as usize);
                            }
                        }
                    }
                }
                out.push(ShipPlacement {
                    placement: Placement { anchor, orientation },
                    cells,
                    halo: halo.difference(cells),
                });
            }
        }
    }
    out
}
