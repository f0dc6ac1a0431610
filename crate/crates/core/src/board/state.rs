use std::fmt;
use std::str::FromStr;

use super::cells::CellSet;
use super::config::Board;
use super::layout::Layout;
use crate::{Error, Result};

/// Outcome of one shot. `Sunk` names the ship whose last cell was hit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Observation {
    Miss,
    Hit,
    Sunk(usize),
}

impl Observation {
    pub fn is_hit(self) -> bool {
        !matches!(self, Observation::Miss)
    }
}

impl fmt::Display for Observation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observation::Miss => f.write_str("miss"),
            Observation::Hit => f.write_str("hit"),
            Observation::Sunk(ship) => write!(f, "sunk:{ship}"),
        }
    }
}

impl FromStr for Observation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "miss" => Ok(Observation::Miss),
            "hit" => Ok(Observation::Hit),
            _ => s
                .strip_prefix("sunk:")
                .and_then(|n| n.parse().ok())
                .map(Observation::Sunk)
                .ok_or_else(|| Error::InvalidConfig(format!("bad observation `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Shot {
    pub cell: usize,
    pub outcome: Observation,
}

/// The cell that sank a ship and the hit cells recorded before that shot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SinkRecord {
    pub cell: usize,
    pub hits_before: CellSet,
}

/// Canonical information state.
///
/// Two histories with equal keys admit exactly the same consistent layouts:
/// a layout agrees with a log iff it avoids every miss, covers every hit,
/// leaves each unsunk ship incomplete, and places each sunk ship inside the
/// hits recorded before its sinking shot plus that shot's cell.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InfoKey {
    pub miss: CellSet,
    pub hit: CellSet,
    pub sinks: Vec<Option<SinkRecord>>,
}

impl InfoKey {
    pub fn fresh(num_ships: usize) -> Self {
        InfoKey {
            miss: CellSet::EMPTY,
            hit: CellSet::EMPTY,
            sinks: vec![None; num_ships],
        }
    }

    pub fn fired(&self) -> CellSet {
        self.miss.union(self.hit)
    }

    pub fn admits(&self, layout: &Layout) -> bool {
        let occupied = layout.occupied();
        if !self.miss.is_disjoint(occupied) || !self.hit.is_subset(occupied) {
            return false;
        }
        self.sinks.iter().enumerate().all(|(ship, sink)| {
            let cells = layout.ship_cells(ship);
            match sink {
                Some(s) => cells.contains(s.cell) && cells.is_subset(s.hits_before.with(s.cell)),
                None => !cells.is_subset(self.hit),
            }
        })
    }

    /// Result of firing `cell` on `layout` from this state. Assumes `admits(layout)`.
    #[inline]
    pub fn outcome(&self, layout: &Layout, cell: usize) -> Observation {
        match layout.ship_at(cell) {
            None => Observation::Miss,
            Some(ship) if layout.ship_cells(ship).is_subset(self.hit.with(cell)) => Observation::Sunk(ship),
            Some(_) => Observation::Hit,
        }
    }

    pub fn advance(&self, cell: usize, outcome: Observation) -> InfoKey {
        let mut next = self.clone();
        match outcome {
            Observation::Miss => next.miss.insert(cell),
            Observation::Hit => next.hit.insert(cell),
            Observation::Sunk(ship) => {
                next.sinks[ship] = Some(SinkRecord {
                    cell,
                    hits_before: self.hit,
                });
                next.hit.insert(cell);
            }
        }
        next
    }

    pub fn all_sunk(&self) -> bool {
        self.sinks.iter().all(Option::is_some)
    }

    /// Flat text form, e.g. `1:hit|4:miss|5:sunk:0@1`.
    pub fn encode(&self) -> String {
        let mut parts: Vec<(usize, String)> = Vec::new();
        for cell in self.miss.iter() {
            parts.push((cell, format!("{cell}:miss")));
        }
        let sunk_cells: CellSet = self.sinks.iter().flatten().map(|s| s.cell).collect();
        for cell in self.hit.difference(sunk_cells).iter() {
            parts.push((cell, format!("{cell}:hit")));
        }
        for (ship, sink) in self.sinks.iter().enumerate() {
            if let Some(s) = sink {
                let before: Vec<String> = s.hits_before.iter().map(|c| c.to_string()).collect();
                parts.push((s.cell, format!("{}:sunk:{ship}@{}", s.cell, before.join("."))));
            }
        }
        parts.sort_by_key(|p| p.0);
        if parts.is_empty() {
            return "-".into();
        }
        parts.into_iter().map(|p| p.1).collect::<Vec<_>>().join("|")
    }

    pub fn decode(text: &str, num_ships: usize) -> Result<InfoKey> {
        let bad = || Error::InvalidConfig(format!("bad history key `{text}`"));
        let mut key = InfoKey::fresh(num_ships);
        if text == "-" {
            return Ok(key);
        }
        for part in text.split('|') {
            let (cell, rest) = part.split_once(':').ok_or_else(bad)?;
            let cell: usize = cell.parse().map_err(|_| bad())?;
            if rest == "miss" {
                key.miss.insert(cell);
            } else if rest == "hit" {
                key.hit.insert(cell);
            } else {
                let spec = rest.strip_prefix("sunk:").ok_or_else(bad)?;
                let (ship, before) = spec.split_once('@').ok_or_else(bad)?;
                let ship: usize = ship.parse().map_err(|_| bad())?;
                let hits_before = before
                    .split('.')
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<usize>().map_err(|_| bad()))
                    .collect::<Result<CellSet>>()?;
                *key.sinks.get_mut(ship).ok_or_else(bad)? = Some(SinkRecord { cell, hits_before });
                key.hit.insert(cell);
            }
        }
        Ok(key)
    }
}

/// Everything the attacker can see: misses, hits, sunk ships, and the ordered
/// shot log. `t` is the log length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicState {
    cells: usize,
    key: InfoKey,
    log: Vec<Shot>,
}

impl PublicState {
    pub fn new(board: &Board) -> Self {
        PublicState {
            cells: board.cells(),
            key: InfoKey::fresh(board.num_ships()),
            log: Vec::new(),
        }
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn t(&self) -> usize {
        self.log.len()
    }

    pub fn miss_mask(&self) -> CellSet {
        self.key.miss
    }

    /// Every cell that returned `Hit` or `Sunk`.
    pub fn hit_mask(&self) -> CellSet {
        self.key.hit
    }

    pub fn fired(&self) -> CellSet {
        self.key.fired()
    }

    pub fn sunk(&self, ship: usize) -> bool {
        self.key.sinks[ship].is_some()
    }

    pub fn sinks(&self) -> &[Option<SinkRecord>] {
        &self.key.sinks
    }

    pub fn all_sunk(&self) -> bool {
        self.key.all_sunk()
    }

    pub fn shot_log(&self) -> &[Shot] {
        &self.log
    }

    pub fn info_key(&self) -> &InfoKey {
        &self.key
    }

    /// Cells not yet fired upon.
    pub fn legal_mask(&self) -> CellSet {
        CellSet::full(self.cells).difference(self.fired())
    }

    pub fn legal_actions(&self) -> Vec<usize> {
        self.legal_mask().iter().collect()
    }

    pub fn is_legal(&self, cell: usize) -> bool {
        cell < self.cells && !self.fired().contains(cell)
    }

    pub fn consistent_with(&self, layout: &Layout) -> bool {
        self.key.admits(layout)
    }

    /// Fires `action` against `layout`, returning the successor state.
    pub fn step(&self, layout: &Layout, action: usize) -> Result<(PublicState, Observation)> {
        let mut next = self.clone();
        let obs = next.apply(layout, action)?;
        Ok((next, obs))
    }

    /// In-place variant of [`PublicState::step`].
    pub fn apply(&mut self, layout: &Layout, action: usize) -> Result<Observation> {
        if !self.is_legal(action) {
            return Err(Error::IllegalAction { cell: action });
        }
        if !self.key.admits(layout) {
            return Err(Error::InconsistentState(format!(
                "layout {} disagrees with {}",
                layout.id(),
                self.key.encode()
            )));
        }
        Ok(self.apply_unchecked(layout, action))
    }

    pub(crate) fn apply_unchecked(&mut self, layout: &Layout, action: usize) -> Observation {
        let outcome = self.key.outcome(layout, action);
        self.key = self.key.advance(action, outcome);
        self.log.push(Shot { cell: action, outcome });
        outcome
    }

    /// Records an externally supplied observation (for posterior queries).
    pub fn record(&mut self, cell: usize, outcome: Observation) -> Result<()> {
        if !self.is_legal(cell) {
            return Err(Error::IllegalAction { cell });
        }
        if let Observation::Sunk(ship) = outcome {
            if ship >= self.key.sinks.len() || self.key.sinks[ship].is_some() {
                return Err(Error::InconsistentState(format!("ship {ship} cannot sink at {cell}")));
            }
        }
        self.key = self.key.advance(cell, outcome);
        self.log.push(Shot { cell, outcome });
        Ok(())
    }

    pub fn from_log(board: &Board, log: &[Shot]) -> Result<Self> {
        let mut state = PublicState::new(board);
        for shot in log {
            state.record(shot.cell, shot.outcome)?;
        }
        Ok(state)
    }

    pub fn observation_tensor(&self, board: &Board) -> ObservationTensor {
        let cells = self.cells;
        let mut data = vec![0.0f32; 3 * cells];
        for c in 0..cells {
            let hit = self.key.hit.contains(c) as u8 as f32;
            let miss = self.key.miss.contains(c) as u8 as f32;
            data[c] = hit;
            data[cells + c] = miss;
            data[2 * cells + c] = 1.0 - (hit + miss);
        }
        ObservationTensor {
            height: board.height(),
            width: board.width(),
            data,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Hit = 0,
    Miss = 1,
    Unknown = 2,
}

/// Three `H x W` planes (Hit, Miss, Unknown), channel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationTensor {
    pub height: usize,
    pub width: usize,
    pub data: Vec<f32>,
}

impl ObservationTensor {
    pub fn plane(&self, channel: Channel) -> &[f32] {
        let n = self.height * self.width;
        let k = channel as usize;
        &self.data[k * n..(k + 1) * n]
    }

    pub fn get(&self, channel: Channel, row: usize, col: usize) -> f32 {
        self.plane(channel)[row * self.width + col]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::{enumerate_layouts, BoardConfig, Orientation, Placement};
    use proptest::prelude::*;

    fn setup(h: usize, w: usize, ships: &[usize]) -> (std::sync::Arc<Board>, Vec<Layout>) {
        let b = Board::new(BoardConfig::new(h, w, ships)).unwrap();
        let l = enumerate_layouts(&b).unwrap();
        (b, l)
    }

    #[test]
    fn fresh_state_all_legal() {
        let (b, _) = setup(3, 3, &[2]);
        let s = PublicState::new(&b);
        assert_eq!(s.legal_actions(), (0..9).collect::<Vec<_>>());
    }

    #[test]
    fn one_cell_left() {
        let (b, layouts) = setup(3, 3, &[2]);
        // ship on {7, 8}; fire everything except 8 in an order that sinks last
        let layout = layouts
            .iter()
            .find(|l| l.occupied() == [7, 8].into_iter().collect())
            .unwrap();
        let mut s = PublicState::new(&b);
        for c in 0..8 {
            s.apply(layout, c).unwrap();
        }
        assert_eq!(s.legal_actions(), vec![8]);
        assert_eq!(s.apply(layout, 8).unwrap(), Observation::Sunk(0));
    }

    #[test]
    fn after_hit_on_centre() {
        let (b, layouts) = setup(3, 3, &[2]);
        let layout = layouts.iter().find(|l| l.occupied().contains(4)).unwrap();
        let (s, obs) = PublicState::new(&b).step(layout, 4).unwrap();
        assert_eq!(obs, Observation::Hit);
        assert_eq!(s.legal_actions(), vec![0, 1, 2, 3, 5, 6, 7, 8]);
        assert_eq!(s.t(), 1);
    }

    #[test]
    fn forced_board_sinks_on_second_shot() {
        let (b, layouts) = setup(1, 2, &[2]);
        let (s, o1) = PublicState::new(&b).step(&layouts[0], 0).unwrap();
        assert_eq!(o1, Observation::Hit);
        let (s, o2) = s.step(&layouts[0], 1).unwrap();
        assert_eq!(o2, Observation::Sunk(0));
        assert!(s.all_sunk());
        assert_eq!(s.t(), 2);
    }

    #[test]
    fn miss_off_the_ship() {
        let (b, _) = setup(1, 3, &[2]);
        let layout = Layout::new(
            &b,
            &[Placement {
                anchor: 0,
                orientation: Orientation::Horizontal,
            }],
        )
        .unwrap();
        let (_, obs) = PublicState::new(&b).step(&layout, 2).unwrap();
        assert_eq!(obs, Observation::Miss);
    }

    #[test]
    fn repeated_and_out_of_range_shots_rejected() {
        let (b, layouts) = setup(1, 3, &[2]);
        let (s, _) = PublicState::new(&b).step(&layouts[0], 0).unwrap();
        assert!(matches!(s.step(&layouts[0], 0), Err(Error::IllegalAction { cell: 0 })));
        assert!(matches!(s.step(&layouts[0], 3), Err(Error::IllegalAction { cell: 3 })));
    }

    #[test]
    fn inconsistent_layout_rejected() {
        let (b, layouts) = setup(1, 3, &[2]);
        // miss at 0 rules out {0,1}
        let (s, _) = PublicState::new(&b).step(&layouts[1], 0).unwrap();
        assert!(matches!(s.step(&layouts[0], 2), Err(Error::InconsistentState(_))));
    }

    #[test]
    fn tensor_channels() {
        let (b, layouts) = setup(3, 3, &[2]);
        let fresh = PublicState::new(&b).observation_tensor(&b);
        assert!(fresh.plane(Channel::Unknown).iter().all(|&v| v == 1.0));
        assert!(fresh.plane(Channel::Hit).iter().all(|&v| v == 0.0));
        let layout = layouts.iter().find(|l| !l.occupied().contains(3)).unwrap();
        let (s, _) = PublicState::new(&b).step(layout, 3).unwrap();
        let t = s.observation_tensor(&b);
        assert_eq!(t.get(Channel::Miss, 1, 0), 1.0);
        assert_eq!(t.get(Channel::Unknown, 1, 0), 0.0);
        assert_eq!(t.plane(Channel::Unknown).iter().sum::<f32>(), 8.0);
    }

    #[test]
    fn order_matters_for_sink_attribution() {
        // ship 0 (len 2) sunk at 4 after 1 was hit; 5 hit afterwards.
        // {4,5} as ship 0 would have sunk at 5, not 4.
        let b = Board::new(BoardConfig::new(3, 3, &[2, 2])).unwrap();
        let mut s = PublicState::new(&b);
        s.record(1, Observation::Hit).unwrap();
        s.record(4, Observation::Sunk(0)).unwrap();
        s.record(5, Observation::Hit).unwrap();
        let all = enumerate_layouts(&b).unwrap();
        for l in all.iter().filter(|l| s.consistent_with(l)) {
            assert_eq!(l.ship_cells(0), [1, 4].into_iter().collect());
        }
        let mut swapped = PublicState::new(&b);
        swapped.record(5, Observation::Hit).unwrap();
        swapped.record(4, Observation::Sunk(0)).unwrap();
        swapped.record(1, Observation::Hit).unwrap();
        assert_ne!(s.info_key(), swapped.info_key());
    }

    #[test]
    fn key_text_round_trip() {
        let b = Board::new(BoardConfig::new(3, 3, &[2, 2])).unwrap();
        let mut s = PublicState::new(&b);
        s.record(1, Observation::Hit).unwrap();
        s.record(0, Observation::Miss).unwrap();
        s.record(4, Observation::Sunk(0)).unwrap();
        let text = s.info_key().encode();
        assert_eq!(&InfoKey::decode(&text, 2).unwrap(), s.info_key());
        assert_eq!(InfoKey::decode("-", 2).unwrap(), InfoKey::fresh(2));
    }

    proptest! {
        #[test]
        fn reachable_state_invariants(seed in 0u64..5000, steps in 0usize..16) {
            use rand::seq::SliceRandom;
            let (b, layouts) = setup(4, 4, &[3, 2]);
            let mut rng = crate::seed::rng_from(seed);
            let layout = layouts.choose(&mut rng).unwrap();
            let mut s = PublicState::new(&b);
            let mut order: Vec<usize> = (0..16).collect();
            order.shuffle(&mut rng);
            for &cell in order.iter().take(steps) {
                s.apply(layout, cell).unwrap();
                prop_assert!(s.miss_mask().is_disjoint(s.hit_mask()));
                prop_assert_eq!(s.fired().len(), s.t());
                prop_assert_eq!(s.legal_actions().len(), 16 - s.t());
                let t = s.observation_tensor(&b);
                for c in 0..16 {
                    let total = t.data[c] + t.data[16 + c] + t.data[32 + c];
                    prop_assert_eq!(total, 1.0);
                }
                prop_assert!(s.consistent_with(layout));
                for (ship, sink) in s.sinks().iter().enumerate() {
                    prop_assert_eq!(sink.is_some(), layout.ship_cells(ship).is_subset(s.hit_mask()));
                }
            }
        }
    }
}
