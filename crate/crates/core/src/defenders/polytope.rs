use std::sync::Arc;

use super::distribution::ExplicitDistribution;
use crate::board::LayoutSet;
use crate::{Error, Result};

/// Convex hull of explicit defender distributions over one layout set.
#[derive(Debug, Clone)]
pub struct DefenderPolytope {
    generators: Vec<ExplicitDistribution>,
}

impl DefenderPolytope {
    /// Keeps the first copy of any generator repeated within 1e-12 (L∞).
    pub fn new(generators: Vec<ExplicitDistribution>) -> Result<Self> {
        let first = generators.first().ok_or(Error::EmptySupport)?;
        if generators.iter().any(|g| !first.same_universe(g)) {
            return Err(Error::WeightMismatch(
                "polytope generators use different layout sets".into(),
            ));
        }
        let mut kept: Vec<ExplicitDistribution> = Vec::with_capacity(generators.len());
        for g in generators {
            let duplicate = kept
                .iter()
                .any(|k| k.weights().iter().zip(g.weights()).all(|(a, b)| (a - b).abs() <= 1e-12));
            if !duplicate {
                kept.push(g);
            }
        }
        Ok(DefenderPolytope { generators: kept })
    }

    /// The full simplex: one point mass per layout.
    pub fn simplex(universe: &Arc<LayoutSet>) -> Self {
        DefenderPolytope {
            generators: (0..universe.len())
                .map(|i| ExplicitDistribution::point_mass(Arc::clone(universe), i))
                .collect(),
        }
    }

    pub fn extreme_points(&self) -> &[ExplicitDistribution] {
        &self.generators
    }

    pub fn universe(&self) -> &Arc<LayoutSet> {
        self.generators[0].universe()
    }

    pub fn dimension(&self) -> usize {
        self.universe().len()
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }
}
