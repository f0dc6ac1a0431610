use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::sync::Arc;

use super::AttackerPolicy;
use crate::board::{Board, InfoKey, LayoutSet, PublicState};
use crate::seed::{rng_from, EpisodeRng};
use crate::{Error, Result};

/// An explicit deterministic history-dependent policy: information state to
/// cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterministicPolicyTable {
    name: String,
    num_ships: usize,
    actions: HashMap<InfoKey, usize>,
}

impl DeterministicPolicyTable {
    pub fn new(name: impl Into<String>, num_ships: usize) -> Self {
        DeterministicPolicyTable {
            name: name.into(),
            num_ships,
            actions: HashMap::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn get(&self, key: &InfoKey) -> Option<usize> {
        self.actions.get(key).copied()
    }

    /// Maps `key` to `cell`; remapping a key to a different cell is an error.
    pub fn insert(&mut self, key: InfoKey, cell: usize) -> Result<()> {
        if key.fired().contains(cell) {
            return Err(Error::IllegalAction { cell });
        }
        match self.actions.insert(key.clone(), cell) {
            Some(prev) if prev != cell => Err(Error::InconsistentState(format!(
                "history {} maps to both {prev} and {cell}",
                key.encode()
            ))),
            _ => Ok(()),
        }
    }

    /// Records `policy`'s play against every layout of `universe`.
    pub fn record(policy: &mut dyn AttackerPolicy, universe: &LayoutSet) -> Result<Self> {
        if !policy.is_deterministic() {
            return Err(Error::InvalidConfig(format!(
                "policy `{}` is stochastic and cannot be tabulated",
                policy.name()
            )));
        }
        let board = universe.board();
        let mut table = DeterministicPolicyTable::new(policy.name(), board.num_ships());
        let mut rng = rng_from(0);
        for layout in universe.layouts() {
            policy.reset();
            let mut state = PublicState::new(board);
            while !state.all_sunk() && state.t() < board.t_max() {
                let cell = policy.act(&state, &mut rng)?;
                if !state.is_legal(cell) {
                    return Err(Error::PolicyViolation {
                        policy: policy.name(),
                        cell,
                        step: state.t(),
                    });
                }
                table.insert(state.info_key().clone(), cell)?;
                state.apply(layout, cell)?;
            }
        }
        Ok(table)
    }

    /// Stable content fingerprint (FNV-1a over the sorted entries).
    pub fn fingerprint(&self) -> u64 {
        let mut lines: Vec<String> = self
            .actions
            .iter()
            .map(|(k, a)| format!("{},{a}", k.encode()))
            .collect();
        lines.sort();
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for byte in lines.join("\n").bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        h
    }

    /// `history,action` rows sorted by history text.
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        let mut rows: Vec<(String, usize)> = self.actions.iter().map(|(k, a)| (k.encode(), *a)).collect();
        rows.sort();
        writeln!(out, "history,action")?;
        for (k, a) in rows {
            writeln!(out, "{k},{a}")?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(name: impl Into<String>, board: &Board, input: R) -> Result<Self> {
        let mut table = DeterministicPolicyTable::new(name, board.num_ships());
        for (n, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || (n == 0 && line == "history,action") {
                continue;
            }
            let (key, action) = line.rsplit_once(',').ok_or_else(|| {
                Error::InvalidConfig(format!("policy table line {}: expected `history,action`", n + 1))
            })?;
            let key = InfoKey::decode(key, board.num_ships())?;
            let action = action
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("policy table line {}: bad action", n + 1)))?;
            if action >= board.cells() {
                return Err(Error::IllegalAction { cell: action });
            }
            table.insert(key, action)?;
        }
        Ok(table)
    }
}

/// Plays a shared [`DeterministicPolicyTable`].
#[derive(Debug, Clone)]
pub struct TablePolicy {
    table: Arc<DeterministicPolicyTable>,
}

impl TablePolicy {
    pub fn new(table: Arc<DeterministicPolicyTable>) -> Self {
        TablePolicy { table }
    }
}

impl AttackerPolicy for TablePolicy {
    fn name(&self) -> String {
        self.table.name.clone()
    }

    fn act(&mut self, state: &PublicState, _rng: &mut EpisodeRng) -> Result<usize> {
        self.table
            .get(state.info_key())
            .ok_or_else(|| Error::UnmappedHistory(state.info_key().encode()))
    }

    fn is_deterministic(&self) -> bool {
        true
    }
}
