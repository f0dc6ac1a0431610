use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use super::distribution::{ExplicitDistribution, LatentDistribution};
use crate::board::{count_layouts, sample_uniform_layout, Board, BoardConfig, Layout, LayoutSet};
use crate::seed::rng_from;
use crate::{Error, Result};

/// Sample size and seed of the Monte Carlo UNIFORM reference used on boards
/// too large to enumerate.
pub const REFERENCE_SAMPLES: usize = 100_000;
pub const REFERENCE_SEED: u64 = 0x005e_ed0f_u64;

/// Geometric summary of a defender distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftMetrics {
    /// L1 distance between marginal occupancy and UNIFORM's, scaled by
    /// `HW / (2 * total ship cells)`.
    pub centroid_dist_mean: f64,
    /// Expected number of 4-adjacent occupied cell pairs.
    pub cluster_score: f64,
    /// Mean Bernoulli entropy (nats) of per-cell marginal occupancy.
    pub marginal_entropy: f64,
    /// Population standard deviation of the occupancy mass fraction across
    /// the four quadrants; cells on an odd midline are split evenly.
    pub quadrant_mass_std: f64,
    /// Layouts drawn, or 0 when computed exactly from weights.
    pub sample_count: usize,
}

/// Per-cell marginal occupancy of UNIFORM.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformReference {
    pub marginals: Vec<f64>,
    /// 0 when exact.
    pub samples: usize,
    pub seed: u64,
}

impl UniformReference {
    pub fn compute(board: &Arc<Board>) -> Result<Self> {
        if count_layouts(board, board.config().enumeration_guard).is_some() {
            let universe = LayoutSet::enumerate(board)?;
            let exact = ExplicitDistribution::uniform(universe);
            return Ok(UniformReference {
                marginals: Accumulator::from_explicit(&exact).marginals(),
                samples: 0,
                seed: 0,
            });
        }
        let mut rng = rng_from(REFERENCE_SEED);
        let mut acc = Accumulator::new(board);
        for _ in 0..REFERENCE_SAMPLES {
            acc.add(&sample_uniform_layout(board, &mut rng)?, 1.0);
        }
        Ok(UniformReference {
            marginals: acc.marginals(),
            samples: REFERENCE_SAMPLES,
            seed: REFERENCE_SEED,
        })
    }

    /// Process-wide cached reference for `board`'s configuration.
    pub fn cached(board: &Arc<Board>) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<BoardConfig, Arc<UniformReference>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(hit) = cache.lock().expect("reference cache poisoned").get(board.config()) {
            return Ok(Arc::clone(hit));
        }
        let fresh = Arc::new(Self::compute(board)?);
        cache
            .lock()
            .expect("reference cache poisoned")
            .insert(board.config().clone(), Arc::clone(&fresh));
        Ok(fresh)
    }
}

struct Accumulator<'a> {
    board: &'a Board,
    occupancy: Vec<f64>,
    pairs: f64,
    mass: f64,
}

impl<'a> Accumulator<'a> {
    fn new(board: &'a Board) -> Self {
        Accumulator {
            board,
            occupancy: vec![0.0; board.cells()],
            pairs: 0.0,
            mass: 0.0,
        }
    }

    fn from_explicit(dist: &'a ExplicitDistribution) -> Self {
        let mut acc = Accumulator::new(dist.universe().board());
        for i in dist.support() {
            acc.add(dist.universe().get(i), dist.weight(i));
        }
        acc
    }

    fn add(&mut self, layout: &Layout, weight: f64) {
        let occ = layout.occupied();
        for c in occ.iter() {
            self.occupancy[c] += weight;
        }
        let adjacent = self
            .board
            .adjacent_pairs()
            .iter()
            .filter(|(a, b)| occ.contains(*a) && occ.contains(*b))
            .count();
        self.pairs += weight * adjacent as f64;
        self.mass += weight;
    }

    fn marginals(&self) -> Vec<f64> {
        self.occupancy.iter().map(|o| o / self.mass).collect()
    }

    fn finish(&self, reference: &[f64], is_uniform: bool, samples: usize) -> ShiftMetrics {
        let p = self.marginals();
        let board = self.board;
        let ship_cells: usize = board.config().ship_lengths.iter().sum();
        let centroid = if is_uniform {
            0.0
        } else {
            let l1: f64 = p.iter().zip(reference).map(|(a, b)| (a - b).abs()).sum();
            l1 * board.cells() as f64 / (2.0 * ship_cells as f64)
        };
        let entropy = p.iter().map(|&q| bernoulli_entropy(q)).sum::<f64>() / p.len() as f64;
        ShiftMetrics {
            centroid_dist_mean: centroid,
            cluster_score: self.pairs / self.mass,
            marginal_entropy: entropy,
            quadrant_mass_std: quadrant_std(board, &p),
            sample_count: samples,
        }
    }
}

fn bernoulli_entropy(q: f64) -> f64 {
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.ln() };
    term(q) + term(1.0 - q)
}

/// Share of a row (or column) index in the low/high half.
fn halves(i: usize, n: usize) -> [f64; 2] {
    if n % 2 == 1 && i == n / 2 {
        [0.5, 0.5]
    } else if i < n / 2 {
        [1.0, 0.0]
    } else {
        [0.0, 1.0]
    }
}

fn quadrant_std(board: &Board, marginals: &[f64]) -> f64 {
    let (h, w) = (board.height(), board.width());
    let mut quad = [0.0f64; 4];
    for (cell, &m) in marginals.iter().enumerate() {
        let (r, c) = board.row_col(cell);
        let (rs, cs) = (halves(r, h), halves(c, w));
        for (qi, q) in quad.iter_mut().enumerate() {
            *q += m * rs[qi / 2] * cs[qi % 2];
        }
    }
    let total: f64 = quad.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let fractions = quad.map(|q| q / total);
    let mean = 0.25;
    (fractions.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / 4.0).sqrt()
}

/// Table-style shift metrics of a defender distribution. Explicit
/// distributions are summarized exactly; anything else draws `n_samples`
/// layouts from `seed`, unless the board is enumerable, in which case the
/// exact weights are used.
pub fn shift_metrics(dist: &LatentDistribution, n_samples: usize, seed: u64) -> Result<ShiftMetrics> {
    let reference = UniformReference::cached(dist.board())?;
    shift_metrics_against(dist, &reference, n_samples, seed)
}

pub fn shift_metrics_against(
    dist: &LatentDistribution,
    reference: &UniformReference,
    n_samples: usize,
    seed: u64,
) -> Result<ShiftMetrics> {
    let board = dist.board();
    if reference.marginals.len() != board.cells() {
        return Err(Error::DimensionMismatch {
            expected: board.cells(),
            got: reference.marginals.len(),
        });
    }
    let uniform = dist.is_uniform();
    if let Some(explicit) = dist.as_explicit() {
        return Ok(Accumulator::from_explicit(explicit).finish(&reference.marginals, uniform, 0));
    }
    if count_layouts(board, board.config().enumeration_guard).is_some() {
        let explicit = dist.to_explicit(&LayoutSet::enumerate(board)?)?;
        return Ok(Accumulator::from_explicit(&explicit).finish(&reference.marginals, uniform, 0));
    }
    if n_samples < 100 {
        return Err(Error::InvalidConfig(format!(
            "shift metrics need at least 100 samples, got {n_samples}"
        )));
    }
    let mut acc = Accumulator::new(board);
    for layout in dist.sample_many(n_samples, seed)? {
        acc.add(&layout, 1.0);
    }
    Ok(acc.finish(&reference.marginals, uniform, n_samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::defenders::DefenderFamily;

    fn universe(h: usize, w: usize, ships: &[usize]) -> Arc<LayoutSet> {
        LayoutSet::enumerate(&Board::new(BoardConfig::new(h, w, ships)).unwrap()).unwrap()
    }

    #[test]
    fn point_mass_has_zero_entropy() {
        let u = universe(3, 3, &[2]);
        let d = LatentDistribution::Explicit(ExplicitDistribution::point_mass(u, 4));
        let m = shift_metrics(&d, 100, 0).unwrap();
        assert_eq!(m.marginal_entropy, 0.0);
        assert_eq!(m.cluster_score, 1.0);
    }

    #[test]
    fn uniform_centroid_is_zero() {
        let u = universe(4, 4, &[3, 2]);
        let d = LatentDistribution::Explicit(ExplicitDistribution::uniform(u.clone()));
        assert_eq!(shift_metrics(&d, 100, 0).unwrap().centroid_dist_mean, 0.0);
        let f = LatentDistribution::family(Arc::clone(u.board()), DefenderFamily::uniform());
        assert_eq!(shift_metrics(&f, 100, 0).unwrap().centroid_dist_mean, 0.0);
    }

    #[test]
    fn entropy_by_hand() {
        // 1x3 with one 2-ship: marginals (1/2, 1, 1/2) under uniform
        let u = universe(1, 3, &[2]);
        let d = LatentDistribution::Explicit(ExplicitDistribution::uniform(u));
        let m = shift_metrics(&d, 100, 0).unwrap();
        assert!((m.marginal_entropy - 2.0 * 2f64.ln() / 3.0).abs() < 1e-12);
    }

    #[test]
    fn quadrant_std_is_symmetric_under_dihedral_maps() {
        let u = universe(4, 4, &[3]);
        let board = u.board();
        let masses: Vec<f64> = (0..u.len()).map(|i| 1.0 + (i % 5) as f64).collect();
        let d = ExplicitDistribution::from_masses(u.clone(), masses).unwrap();
        let base = Accumulator::from_explicit(&d).marginals();
        let transforms: [fn(usize, usize) -> (usize, usize); 3] = [|r, c| (c, 3 - r), |r, c| (3 - r, c), |r, c| (c, r)];
        let reference = quadrant_std(board, &base);
        for t in transforms {
            let mut mapped = vec![0.0; 16];
            for (cell, &m) in base.iter().enumerate() {
                let (r, c) = t(cell / 4, cell % 4);
                mapped[r * 4 + c] = m;
            }
            assert!((quadrant_std(board, &mapped) - reference).abs() < 1e-12);
        }
    }

    #[test]
    fn odd_midlines_split_evenly() {
        let b = Board::new(BoardConfig::new(3, 3, &[1])).unwrap();
        let mut only_center = vec![0.0; 9];
        only_center[4] = 1.0;
        assert_eq!(quadrant_std(&b, &only_center), 0.0);
    }
}
