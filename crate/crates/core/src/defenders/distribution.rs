use std::fmt;
use std::io::{BufRead, Write};
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::family::DefenderFamily;
use crate::board::{sample_uniform_layout, Board, Layout, LayoutSet};
use crate::seed::{rng_from, EpisodeRng};
use crate::{Error, Result};

const WEIGHT_TOL: f64 = 1e-9;

/// Explicit weights over an enumerated latent set.
#[derive(Debug, Clone)]
pub struct ExplicitDistribution {
    universe: Arc<LayoutSet>,
    weights: Vec<f64>,
}

impl ExplicitDistribution {
    /// Weights must be nonnegative and sum to one (within 1e-9); they are
    /// rescaled so the stored sum is one to machine precision.
    pub fn new(universe: Arc<LayoutSet>, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != universe.len() {
            return Err(Error::DimensionMismatch {
                expected: universe.len(),
                got: weights.len(),
            });
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::WeightMismatch(format!("weight {w} is not a nonnegative number")));
        }
        let total: f64 = weights.iter().sum();
        if total == 0.0 {
            return Err(Error::EmptySupport);
        }
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::WeightMismatch(format!("weights sum to {total}, not 1")));
        }
        Ok(Self::normalized(universe, weights, total))
    }

    /// Normalizes arbitrary nonnegative masses.
    pub fn from_masses(universe: Arc<LayoutSet>, masses: Vec<f64>) -> Result<Self> {
        if masses.len() != universe.len() {
            return Err(Error::DimensionMismatch {
                expected: universe.len(),
                got: masses.len(),
            });
        }
        if masses.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::WeightMismatch("masses must be nonnegative".into()));
        }
        let total: f64 = masses.iter().sum();
        if total <= 0.0 {
            return Err(Error::EmptySupport);
        }
        Ok(Self::normalized(universe, masses, total))
    }

    fn normalized(universe: Arc<LayoutSet>, mut weights: Vec<f64>, total: f64) -> Self {
        if total != 1.0 {
            weights.iter_mut().for_each(|w| *w /= total);
        }
        ExplicitDistribution { universe, weights }
    }

    pub fn uniform(universe: Arc<LayoutSet>) -> Self {
        let n = universe.len();
        ExplicitDistribution {
            universe,
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn point_mass(universe: Arc<LayoutSet>, index: usize) -> Self {
        let mut weights = vec![0.0; universe.len()];
        weights[index] = 1.0;
        ExplicitDistribution { universe, weights }
    }

    /// Exact Gibbs weights `exp(score) / Z` of a scored family.
    pub fn from_family(universe: Arc<LayoutSet>, family: &DefenderFamily) -> Self {
        let board = Arc::clone(universe.board());
        let scores: Vec<f64> = universe.layouts().iter().map(|l| family.score(&board, l)).collect();
        let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let masses: Vec<f64> = scores.iter().map(|s| (s - top).exp()).collect();
        let total = masses.iter().sum();
        Self::normalized(universe, masses, total)
    }

    pub fn universe(&self) -> &Arc<LayoutSet> {
        &self.universe
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, index: usize) -> f64 {
        self.weights[index]
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(i, _)| i)
    }

    pub fn is_uniform(&self) -> bool {
        let u = 1.0 / self.weights.len() as f64;
        self.weights.iter().all(|w| (w - u).abs() <= 1e-12)
    }

    /// `sum_z rho(z) f(z)`.
    pub fn expectation(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                got: values.len(),
            });
        }
        Ok(self.weights.iter().zip(values).map(|(w, v)| w * v).sum())
    }

    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut last = 0;
        for (i, &w) in self.weights.iter().enumerate() {
            if w > 0.0 {
                acc += w;
                last = i;
                if u < acc {
                    return i;
                }
            }
        }
        last
    }

    pub fn same_universe(&self, other: &ExplicitDistribution) -> bool {
        Arc::ptr_eq(&self.universe, &other.universe)
            || (self.universe.len() == other.universe.len()
                && self.universe.board().config() == other.universe.board().config())
    }

    /// `sum_k w_k * rho_k` over distributions sharing one universe.
    pub fn blend(parts: &[(&ExplicitDistribution, f64)]) -> Result<Self> {
        let first = parts.first().ok_or(Error::EmptySupport)?.0;
        let mut weights = vec![0.0; first.weights.len()];
        for (dist, lambda) in parts {
            if !first.same_universe(dist) {
                return Err(Error::WeightMismatch("components use different layout sets".into()));
            }
            for (acc, w) in weights.iter_mut().zip(&dist.weights) {
                *acc += lambda * w;
            }
        }
        ExplicitDistribution::new(Arc::clone(&first.universe), weights)
    }

    /// Writes `layout,weight` rows (layout in `anchorO,...` form).
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "layout,weight")?;
        for (layout, w) in self.universe.layouts().iter().zip(&self.weights) {
            writeln!(out, "\"{}\",{w:.17e}", layout.id())?;
        }
        Ok(())
    }

    /// Reads `layout,weight` rows; the layout column is either a canonical
    /// index or a placement id. Unlisted layouts get weight zero.
    pub fn read_csv<R: BufRead>(universe: Arc<LayoutSet>, input: R) -> Result<Self> {
        let mut masses = vec![0.0; universe.len()];
        for (n, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || (n == 0 && line.starts_with("layout")) {
                continue;
            }
            let (id, weight) = line
                .rsplit_once(',')
                .ok_or_else(|| Error::InvalidConfig(format!("weights line {}: expected `layout,weight`", n + 1)))?;
            let id = id.trim().trim_matches('"');
            let index = match id.parse::<usize>() {
                Ok(i) if i < universe.len() => i,
                Ok(i) => return Err(Error::InvalidConfig(format!("layout index {i} out of range"))),
                Err(_) => {
                    let layout = Layout::parse_id(universe.board(), id)?;
                    universe
                        .index_of(&layout)
                        .ok_or_else(|| Error::InvalidConfig(format!("layout `{id}` is not legal")))?
                }
            };
            masses[index] += weight
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidConfig(format!("weights line {}: bad weight", n + 1)))?;
        }
        ExplicitDistribution::new(universe, masses)
    }
}

impl PartialEq for ExplicitDistribution {
    fn eq(&self, other: &Self) -> bool {
        self.same_universe(other) && self.weights == other.weights
    }
}

/// Metropolis settings for scored families on boards too large to enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerSettings {
    pub burn_in: usize,
    pub thinning: usize,
}

impl Default for SamplerSettings {
    fn default() -> Self {
        SamplerSettings {
            burn_in: 1000,
            thinning: 10,
        }
    }
}

/// A family-scored distribution, `P(B) ∝ exp(score(B))`, sampled without
/// enumerating the layout space.
#[derive(Debug, Clone)]
pub struct ScoredDistribution {
    pub board: Arc<Board>,
    pub family: DefenderFamily,
    pub sampler: SamplerSettings,
}

impl ScoredDistribution {
    pub fn new(board: Arc<Board>, family: DefenderFamily) -> Self {
        ScoredDistribution {
            board,
            family,
            sampler: SamplerSettings::default(),
        }
    }

    pub fn score(&self, layout: &Layout) -> f64 {
        self.family.score(&self.board, layout)
    }

    fn draw(&self, rng: &mut EpisodeRng) -> Result<Layout> {
        let mut chain = super::sampler::MetropolisChain::start(&self.board, &self.family, rng)?;
        chain.advance(self.sampler.burn_in, rng);
        Ok(chain.layout())
    }

    fn draw_many(&self, n: usize, rng: &mut EpisodeRng) -> Result<Vec<Layout>> {
        if self.family.weights.is_zero() {
            return (0..n).map(|_| sample_uniform_layout(&self.board, rng)).collect();
        }
        let mut chain = super::sampler::MetropolisChain::start(&self.board, &self.family, rng)?;
        chain.advance(self.sampler.burn_in, rng);
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            out.push(chain.layout());
            chain.advance(self.sampler.thinning.max(1), rng);
        }
        Ok(out)
    }
}

/// A defender strategy: a distribution over hidden layouts.
#[derive(Debug, Clone)]
pub enum LatentDistribution {
    Explicit(ExplicitDistribution),
    Scored(ScoredDistribution),
    /// Draw a component by weight, then a layout from it.
    Mixture(Vec<(f64, LatentDistribution)>),
}

impl LatentDistribution {
    pub fn family(board: Arc<Board>, family: DefenderFamily) -> Self {
        LatentDistribution::Scored(ScoredDistribution::new(board, family))
    }

    pub fn board(&self) -> &Arc<Board> {
        match self {
            LatentDistribution::Explicit(e) => e.universe().board(),
            LatentDistribution::Scored(s) => &s.board,
            LatentDistribution::Mixture(parts) => parts[0].1.board(),
        }
    }

    pub fn as_explicit(&self) -> Option<&ExplicitDistribution> {
        match self {
            LatentDistribution::Explicit(e) => Some(e),
            _ => None,
        }
    }

    /// Materializes exact weights over `universe`.
    pub fn to_explicit(&self, universe: &Arc<LayoutSet>) -> Result<ExplicitDistribution> {
        match self {
            LatentDistribution::Explicit(e) => {
                if e.universe().len() != universe.len() {
                    return Err(Error::WeightMismatch(
                        "explicit distribution over a different layout set".into(),
                    ));
                }
                Ok(e.clone())
            }
            LatentDistribution::Scored(s) => Ok(ExplicitDistribution::from_family(Arc::clone(universe), &s.family)),
            LatentDistribution::Mixture(parts) => {
                let explicit = parts
                    .iter()
                    .map(|(w, d)| Ok((d.to_explicit(universe)?, *w)))
                    .collect::<Result<Vec<_>>>()?;
                let refs: Vec<(&ExplicitDistribution, f64)> = explicit.iter().map(|(d, w)| (d, *w)).collect();
                ExplicitDistribution::blend(&refs)
            }
        }
    }

    /// True when every legal layout is equally likely.
    pub fn is_uniform(&self) -> bool {
        match self {
            LatentDistribution::Explicit(e) => e.is_uniform(),
            LatentDistribution::Scored(s) => s.family.weights.is_zero(),
            LatentDistribution::Mixture(parts) => parts.iter().all(|(w, d)| *w == 0.0 || d.is_uniform()),
        }
    }

    /// One layout, deterministic in `seed`. Scored families run a fresh
    /// Metropolis chain for the configured burn-in.
    pub fn sample(&self, seed: u64) -> Result<Layout> {
        self.sample_with(&mut rng_from(seed))
    }

    pub fn sample_with(&self, rng: &mut EpisodeRng) -> Result<Layout> {
        match self {
            LatentDistribution::Explicit(e) => Ok(e.universe().get(e.sample_index(rng)).clone()),
            LatentDistribution::Scored(s) if s.family.weights.is_zero() => sample_uniform_layout(&s.board, rng),
            LatentDistribution::Scored(s) => s.draw(rng),
            LatentDistribution::Mixture(parts) => pick(parts, rng).sample_with(rng),
        }
    }

    /// `n` layouts from one generator. Scored families use a single thinned
    /// chain; everything else draws independently.
    pub fn sample_many(&self, n: usize, seed: u64) -> Result<Vec<Layout>> {
        let mut rng = rng_from(seed);
        match self {
            LatentDistribution::Scored(s) => s.draw_many(n, &mut rng),
            _ => (0..n).map(|_| self.sample_with(&mut rng)).collect(),
        }
    }
}

fn pick<'a, R: Rng + ?Sized>(parts: &'a [(f64, LatentDistribution)], rng: &mut R) -> &'a LatentDistribution {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (w, d) in parts {
        acc += w;
        if u < acc && *w > 0.0 {
            return d;
        }
    }
    &parts
        .iter()
        .rev()
        .find(|(w, _)| *w > 0.0)
        .unwrap_or(&parts[parts.len() - 1])
        .1
}

impl fmt::Display for LatentDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatentDistribution::Explicit(e) => {
                if e.is_uniform() {
                    write!(f, "explicit-uniform[{}]", e.weights().len())
                } else {
                    write!(f, "explicit[{}]", e.support().count())
                }
            }
            LatentDistribution::Scored(s) => write!(f, "{}", s.family),
            LatentDistribution::Mixture(parts) => {
                write!(f, "mix(")?;
                for (i, (w, d)) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{w}*{d}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Convex combination of defender strategies. Explicit components over one
/// layout set blend into an explicit distribution with exact weights.
pub fn mixture(dists: &[LatentDistribution], weights: &[f64]) -> Result<LatentDistribution> {
    if dists.is_empty() || dists.len() != weights.len() {
        return Err(Error::WeightMismatch(format!(
            "{} components but {} weights",
            dists.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::WeightMismatch("mixture weights must be nonnegative".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > WEIGHT_TOL {
        return Err(Error::WeightMismatch(format!("mixture weights sum to {total}, not 1")));
    }
    let board = dists[0].board();
    if dists.iter().any(|d| d.board().config() != board.config()) {
        return Err(Error::WeightMismatch("components use different boards".into()));
    }
    let explicit: Option<Vec<&ExplicitDistribution>> = dists.iter().map(|d| d.as_explicit()).collect();
    if let Some(explicit) = explicit {
        if explicit.iter().all(|e| e.same_universe(explicit[0])) {
            let parts: Vec<(&ExplicitDistribution, f64)> = explicit.into_iter().zip(weights.iter().copied()).collect();
            return Ok(LatentDistribution::Explicit(ExplicitDistribution::blend(&parts)?));
        }
    }
    if dists.len() == 1 {
        return Ok(dists[0].clone());
    }
    Ok(LatentDistribution::Mixture(
        weights.iter().copied().zip(dists.iter().cloned()).collect(),
    ))
}
