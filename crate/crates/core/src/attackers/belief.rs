use crate::board::{Layout, PublicState, Shot};
use crate::defenders::ExplicitDistribution;
use crate::{Error, Result};

/// A weighted set of layouts consistent with a shot log.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefState {
    pub layouts: Vec<Layout>,
    pub weights: Vec<f64>,
}

impl BeliefState {
    /// Equal weight per entry; repeated layouts accumulate weight.
    pub fn from_particles(layouts: Vec<Layout>) -> Self {
        let w = 1.0 / layouts.len() as f64;
        BeliefState {
            weights: vec![w; layouts.len()],
            layouts,
        }
    }

    pub fn len(&self) -> usize {
        self.layouts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layouts.is_empty()
    }

    /// Posterior probability that each cell is occupied.
    pub fn marginals(&self, cells: usize) -> Vec<f64> {
        let mut m = vec![0.0; cells];
        for (layout, w) in self.layouts.iter().zip(&self.weights) {
            for c in layout.occupied().iter() {
                m[c] += w;
            }
        }
        m
    }

    pub fn weight_of(&self, layout: &Layout) -> f64 {
        self.layouts
            .iter()
            .zip(&self.weights)
            .filter(|(l, _)| *l == layout)
            .map(|(_, w)| w)
            .sum()
    }
}

/// Bayes restriction of an explicit prior to the layouts consistent with `log`.
pub fn exact_posterior(log: &[Shot], prior: &ExplicitDistribution) -> Result<BeliefState> {
    let universe = prior.universe();
    let state = PublicState::from_log(universe.board(), log)?;
    let key = state.info_key();
    let mut layouts = Vec::new();
    let mut weights = Vec::new();
    for i in prior.support() {
        let layout = universe.get(i);
        if key.admits(layout) {
            layouts.push(layout.clone());
            weights.push(prior.weight(i));
        }
    }
    let total: f64 = weights.iter().sum();
    if layouts.is_empty() || total <= 0.0 {
        return Err(Error::ZeroPosterior);
    }
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(BeliefState { layouts, weights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::{Board, BoardConfig, LayoutSet, Observation};
    use std::sync::Arc;

    fn uniform_1x3() -> ExplicitDistribution {
        let b = Board::new(BoardConfig::new(1, 3, &[2])).unwrap();
        ExplicitDistribution::uniform(LayoutSet::enumerate(&b).unwrap())
    }

    fn shot(cell: usize, outcome: Observation) -> Shot {
        Shot { cell, outcome }
    }

    #[test]
    fn empty_log_keeps_prior() {
        let prior = uniform_1x3();
        let post = exact_posterior(&[], &prior).unwrap();
        assert_eq!(post.weights, prior.weights());
    }

    #[test]
    fn centre_hit_keeps_both_layouts() {
        let post = exact_posterior(&[shot(1, Observation::Hit)], &uniform_1x3()).unwrap();
        assert_eq!(post.weights, vec![0.5, 0.5]);
    }

    #[test]
    fn corner_miss_collapses() {
        let prior = uniform_1x3();
        let post = exact_posterior(&[shot(0, Observation::Miss)], &prior).unwrap();
        assert_eq!(post.layouts, vec![prior.universe().get(1).clone()]);
        assert_eq!(post.weights, vec![1.0]);
    }

    #[test]
    fn contradictory_log_is_zero_posterior() {
        let log = [shot(0, Observation::Miss), shot(2, Observation::Miss)];
        assert!(matches!(
            exact_posterior(&log, &uniform_1x3()),
            Err(Error::ZeroPosterior)
        ));
    }

    #[test]
    fn weighted_prior_is_renormalized() {
        let prior = uniform_1x3();
        let skewed = ExplicitDistribution::new(Arc::clone(prior.universe()), vec![0.9, 0.1]).unwrap();
        let post = exact_posterior(&[shot(1, Observation::Hit)], &skewed).unwrap();
        assert_eq!(post.weights, vec![0.9, 0.1]);
        let m = post.marginals(3);
        assert!((m[0] - 0.9).abs() < 1e-12 && m[1] == 1.0);
    }
}
