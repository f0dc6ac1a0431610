use rand::Rng;

use super::AttackerPolicy;
use crate::board::PublicState;
use crate::seed::EpisodeRng;
use crate::{Error, Result};

/// Fires uniformly at random among unfired cells.
#[derive(Debug, Clone, Copy, Default)]
pub struct RandomPolicy;

impl AttackerPolicy for RandomPolicy {
    fn name(&self) -> String {
        "random".into()
    }

    fn act(&mut self, state: &PublicState, rng: &mut EpisodeRng) -> Result<usize> {
        let legal = state.legal_mask();
        let k = legal.len();
        if k == 0 {
            return Err(Error::IllegalAction { cell: state.cells() });
        }
        let pick = rng.gen_range(0..k);
        Ok(legal.iter().nth(pick).expect("pick < len"))
    }

    fn is_deterministic(&self) -> bool {
        false
    }
}

/// Fires `order[t]` at step `t`, whatever the outcomes. The order is not
/// checked, so a repeated cell surfaces as a policy violation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedOrder {
    order: Vec<usize>,
}

impl FixedOrder {
    pub fn new(order: Vec<usize>) -> Self {
        FixedOrder { order }
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }
}

impl AttackerPolicy for FixedOrder {
    fn name(&self) -> String {
        let cells: Vec<String> = self.order.iter().map(|c| c.to_string()).collect();
        format!("fixed[{}]", cells.join("."))
    }

    fn act(&mut self, state: &PublicState, _rng: &mut EpisodeRng) -> Result<usize> {
        self.order
            .get(state.t())
            .copied()
            .ok_or(Error::IllegalAction { cell: state.cells() })
    }

    fn is_deterministic(&self) -> bool {
        true
    }
}
