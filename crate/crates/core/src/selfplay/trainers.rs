use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::attackers::{AttackerSpec, ParticleSettings, ProbMapSettings};
use crate::board::{rollout, Board, LayoutSet};
use crate::defenders::{DefenderFamily, DefenderPolytope, LatentDistribution, ScoreWeights};
use crate::evaluation::evaluate;
use crate::game::{attacker_best_response, defender_best_response, layout_losses, DP_LAYOUT_GUARD};
use crate::seed::{derive_seed, stream_seed, Stream};
use crate::{Error, Result};

/// Produces an improved attacker against a fixed latent distribution.
pub trait AttackerTrainer: Sync {
    fn id(&self) -> String;

    /// `budget` is in trainer-defined units, recorded alongside the run.
    fn improve(
        &self,
        policy: &AttackerSpec,
        dist: &LatentDistribution,
        budget: usize,
        seed: u64,
    ) -> Result<AttackerSpec>;
}

/// Produces a latent distribution that is hard for a frozen attacker.
pub trait DefenderTrainer: Sync {
    fn id(&self) -> String;

    fn train(&self, attacker: &AttackerSpec, budget: usize, seed: u64) -> Result<LatentDistribution>;
}

/// Returns the incumbent unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityTrainer;

impl AttackerTrainer for IdentityTrainer {
    fn id(&self) -> String {
        "identity".into()
    }

    fn improve(&self, policy: &AttackerSpec, _: &LatentDistribution, _: usize, _: u64) -> Result<AttackerSpec> {
        Ok(policy.clone())
    }
}

/// Always answers with the same distribution, e.g. the nominal one.
#[derive(Debug, Clone)]
pub struct FixedDefender(pub LatentDistribution);

impl DefenderTrainer for FixedDefender {
    fn id(&self) -> String {
        format!("fixed[{}]", self.0)
    }

    fn train(&self, _: &AttackerSpec, _: usize, _: u64) -> Result<LatentDistribution> {
        Ok(self.0.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttackerTrainerMode {
    /// Dynamic-programming best response; fails if the guards are exceeded.
    Exact,
    /// Best of the incumbent and the scripted baselines on fresh episodes.
    #[default]
    Heuristic,
    /// Exact when the board fits the guards, heuristic otherwise.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReferenceAttackerConfig {
    pub mode: AttackerTrainerMode,
    pub probmap: ProbMapSettings,
    pub particle: ParticleSettings,
}

impl Default for ReferenceAttackerConfig {
    fn default() -> Self {
        ReferenceAttackerConfig {
            mode: AttackerTrainerMode::Heuristic,
            probmap: ProbMapSettings::default(),
            particle: ParticleSettings::default(),
        }
    }
}

/// The reference attacker trainer. In heuristic mode `budget` is the number
/// of evaluation episodes per candidate; exact mode ignores it.
pub fn reference_attacker_trainer(
    policy: &AttackerSpec,
    dist: &LatentDistribution,
    budget: usize,
    seed: u64,
    config: &ReferenceAttackerConfig,
) -> Result<AttackerSpec> {
    match config.mode {
        AttackerTrainerMode::Exact => exact_attacker(dist),
        AttackerTrainerMode::Heuristic => heuristic_attacker(policy, dist, budget, seed, config),
        AttackerTrainerMode::Auto => match exact_attacker(dist) {
            Err(Error::GuardExceeded { .. }) | Err(Error::InvalidConfig(_)) => {
                heuristic_attacker(policy, dist, budget, seed, config)
            }
            other => other,
        },
    }
}

fn exact_attacker(dist: &LatentDistribution) -> Result<AttackerSpec> {
    let board = dist.board();
    let universe = LayoutSet::shared(board, DP_LAYOUT_GUARD).ok_or(Error::GuardExceeded {
        what: "layouts for the exact best response",
        count: DP_LAYOUT_GUARD + 1,
        limit: DP_LAYOUT_GUARD,
    })?;
    let rho = dist.to_explicit(&universe)?;
    let (table, _) = attacker_best_response(&rho)?;
    Ok(AttackerSpec::Table(Arc::new(table)))
}

fn heuristic_attacker(
    policy: &AttackerSpec,
    dist: &LatentDistribution,
    budget: usize,
    seed: u64,
    config: &ReferenceAttackerConfig,
) -> Result<AttackerSpec> {
    if budget == 0 {
        return Ok(policy.clone());
    }
    let mut candidates = vec![policy.clone()];
    for c in [
        AttackerSpec::ProbMap(config.probmap),
        AttackerSpec::Particle(config.particle),
    ] {
        if candidates.iter().all(|k| k.id() != c.id()) {
            candidates.push(c);
        }
    }
    // common random numbers: every candidate sees the same layouts
    let mut best: Option<(f64, AttackerSpec)> = None;
    for c in candidates {
        let mean = evaluate(&c, dist, budget, seed)?.mean;
        if best.as_ref().is_none_or(|(b, _)| mean < *b) {
            best = Some((mean, c));
        }
    }
    Ok(best.expect("at least the incumbent").1)
}

/// Heuristic trainer as a trait object.
#[derive(Debug, Clone, Copy, Default)]
pub struct ReferenceAttacker(pub ReferenceAttackerConfig);

impl AttackerTrainer for ReferenceAttacker {
    fn id(&self) -> String {
        let mode = match self.0.mode {
            AttackerTrainerMode::Exact => "exact",
            AttackerTrainerMode::Heuristic => "heuristic",
            AttackerTrainerMode::Auto => "auto",
        };
        format!("reference-attacker-{mode}")
    }

    fn improve(
        &self,
        policy: &AttackerSpec,
        dist: &LatentDistribution,
        budget: usize,
        seed: u64,
    ) -> Result<AttackerSpec> {
        reference_attacker_trainer(policy, dist, budget, seed, &self.0)
    }
}

/// Box over the three family feature weights searched by the hill-climb.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FamilyBox {
    /// Lower corner as `[edge, spread, parity]`.
    pub lower: [f64; 3],
    pub upper: [f64; 3],
    /// Initial step; halved after every sweep without improvement.
    pub step: f64,
    pub min_step: f64,
    /// Episodes per candidate evaluation.
    pub episodes: usize,
}

impl Default for FamilyBox {
    fn default() -> Self {
        FamilyBox {
            lower: [-4.0, -4.0, -4.0],
            upper: [4.0, 4.0, 4.0],
            step: 2.0,
            min_step: 0.25,
            episodes: 100,
        }
    }
}

impl FamilyBox {
    fn validate(&self) -> Result<()> {
        let ordered = self
            .lower
            .iter()
            .zip(&self.upper)
            .all(|(l, u)| l.is_finite() && u.is_finite() && l <= u);
        if !ordered || !(self.step > 0.0) || !(self.min_step > 0.0) || self.episodes == 0 {
            return Err(Error::InvalidConfig(
                "family box needs lower <= upper, positive steps and episodes".into(),
            ));
        }
        Ok(())
    }

    fn clamp(&self, x: [f64; 3]) -> [f64; 3] {
        let mut out = x;
        for c in 0..3 {
            out[c] = x[c].clamp(self.lower[c], self.upper[c]);
        }
        out
    }
}

/// Where a defender trainer searches.
#[derive(Debug, Clone)]
pub enum DefenderSpace {
    Polytope(DefenderPolytope),
    Family { board: Arc<Board>, bounds: FamilyBox },
}

/// Outcome of a defender search.
#[derive(Debug, Clone)]
pub struct DefenderResponse {
    pub distribution: LatentDistribution,
    /// Expected loss of the attacker under `distribution`: exact in polytope
    /// mode with a deterministic attacker, a Monte Carlo estimate otherwise.
    pub value: f64,
    /// Loss evaluations spent.
    pub evaluations: usize,
}

/// The reference defender trainer.
///
/// Polytope mode returns the best generator against the attacker's
/// per-layout losses; those are exact for deterministic attackers and
/// averaged over `max(budget, 1)` rollouts per layout otherwise. Family mode
/// runs a coordinate hill-climb over the feature weights, spending one unit
/// of `budget` per candidate and scoring every candidate on the same
/// episodes; the incumbent is replaced only by a strictly better candidate.
pub fn reference_defender_trainer(
    attacker: &AttackerSpec,
    space: &DefenderSpace,
    budget: usize,
    seed: u64,
) -> Result<DefenderResponse> {
    match space {
        DefenderSpace::Polytope(polytope) => polytope_response(attacker, polytope, budget, seed),
        DefenderSpace::Family { board, bounds } => family_response(attacker, board, bounds, budget, seed),
    }
}

fn polytope_response(
    attacker: &AttackerSpec,
    polytope: &DefenderPolytope,
    budget: usize,
    seed: u64,
) -> Result<DefenderResponse> {
    if polytope.is_empty() {
        return Err(Error::EmptySupport);
    }
    let universe = polytope.universe();
    let board = universe.board();
    let losses = if attacker.is_deterministic() {
        layout_losses(attacker.build(board)?.as_mut(), universe)?
    } else {
        let reps = budget.max(1);
        universe
            .layouts()
            .iter()
            .enumerate()
            .map(|(i, layout)| {
                let mut total = 0usize;
                for r in 0..reps {
                    let mut policy = attacker.build(board)?;
                    let s = stream_seed(derive_seed(seed, i as u64), Stream::Policy, r as u64);
                    total += rollout(policy.as_mut(), layout, board, s)?.tau;
                }
                Ok(total as f64 / reps as f64)
            })
            .collect::<Result<Vec<_>>>()?
    };
    let (j, value) = defender_best_response(&losses, polytope)?;
    Ok(DefenderResponse {
        distribution: LatentDistribution::Explicit(polytope.extreme_points()[j].clone()),
        value,
        evaluations: polytope.len(),
    })
}

fn family_response(
    attacker: &AttackerSpec,
    board: &Arc<Board>,
    bounds: &FamilyBox,
    budget: usize,
    seed: u64,
) -> Result<DefenderResponse> {
    bounds.validate()?;
    let dist = |x: [f64; 3]| {
        let weights = ScoreWeights::from_array(x);
        let family = if weights.is_zero() {
            DefenderFamily::uniform()
        } else {
            DefenderFamily::custom(weights)
        };
        LatentDistribution::family(Arc::clone(board), family)
    };
    let mut x = bounds.clamp([0.0; 3]);
    if budget == 0 {
        return Ok(DefenderResponse {
            distribution: dist(x),
            value: f64::NAN,
            evaluations: 0,
        });
    }
    let score = |x: [f64; 3]| -> Result<f64> { Ok(evaluate(attacker, &dist(x), bounds.episodes, seed)?.mean) };
    let mut best = score(x)?;
    let mut used = 1;
    let mut step = bounds.step;
    'search: while step >= bounds.min_step {
        let mut improved = false;
        for c in 0..3 {
            for dir in [1.0, -1.0] {
                let mut y = x;
                y[c] += dir * step;
                let y = bounds.clamp(y);
                if y == x {
                    continue;
                }
                if used == budget {
                    break 'search;
                }
                let v = score(y)?;
                used += 1;
                if v > best {
                    best = v;
                    x = y;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    Ok(DefenderResponse {
        distribution: dist(x),
        value: best,
        evaluations: used,
    })
}

/// [`reference_defender_trainer`] as a trait object.
#[derive(Debug, Clone)]
pub struct ReferenceDefender(pub DefenderSpace);

impl DefenderTrainer for ReferenceDefender {
    fn id(&self) -> String {
        match &self.0 {
            DefenderSpace::Polytope(p) => format!("reference-defender-polytope[{}]", p.len()),
            DefenderSpace::Family { .. } => "reference-defender-family".into(),
        }
    }

    fn train(&self, attacker: &AttackerSpec, budget: usize, seed: u64) -> Result<LatentDistribution> {
        Ok(reference_defender_trainer(attacker, &self.0, budget, seed)?.distribution)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::BoardConfig;
    use crate::defenders::ExplicitDistribution;

    fn universe(h: usize, w: usize, ships: &[usize]) -> Arc<LayoutSet> {
        LayoutSet::enumerate(&Board::new(BoardConfig::new(h, w, ships)).unwrap()).unwrap()
    }

    #[test]
    fn single_generator_polytope() {
        let u = universe(1, 3, &[2]);
        let g = ExplicitDistribution::from_masses(Arc::clone(&u), vec![0.3, 0.7]).unwrap();
        let p = DefenderPolytope::new(vec![g.clone()]).unwrap();
        let r = reference_defender_trainer(&AttackerSpec::Random, &DefenderSpace::Polytope(p), 3, 1).unwrap();
        assert_eq!(r.distribution.as_explicit(), Some(&g));
    }

    #[test]
    fn fixed_order_prefers_right_ship() {
        let u = universe(1, 3, &[2]);
        let p = DefenderPolytope::simplex(&u);
        let r =
            reference_defender_trainer(&AttackerSpec::Fixed(vec![0, 1, 2]), &DefenderSpace::Polytope(p), 0, 0).unwrap();
        let rho = r.distribution.as_explicit().unwrap();
        // layout {1,2} is index 1 in canonical order
        assert_eq!(rho.weights(), &[0.0, 1.0]);
        assert_eq!(r.value, 3.0);
    }

    #[test]
    fn exact_mode_matches_dp_value() {
        let u = universe(1, 3, &[2]);
        let rho = LatentDistribution::Explicit(ExplicitDistribution::uniform(Arc::clone(&u)));
        let cfg = ReferenceAttackerConfig {
            mode: AttackerTrainerMode::Exact,
            ..Default::default()
        };
        let spec = reference_attacker_trainer(&AttackerSpec::Random, &rho, 0, 0, &cfg).unwrap();
        let losses = layout_losses(spec.build(u.board()).unwrap().as_mut(), &u).unwrap();
        assert_eq!(losses.iter().sum::<f64>() / 2.0, 2.5);
    }

    #[test]
    fn heuristic_budget_zero_keeps_incumbent() {
        let b = Board::new(BoardConfig::new(3, 3, &[2])).unwrap();
        let d = LatentDistribution::family(b, DefenderFamily::uniform());
        let spec = reference_attacker_trainer(&AttackerSpec::Random, &d, 0, 0, &Default::default()).unwrap();
        assert_eq!(spec.id(), "random");
    }

    #[test]
    fn heuristic_never_worse_than_incumbent() {
        let b = Board::new(BoardConfig::new(4, 4, &[3, 2])).unwrap();
        let d = LatentDistribution::family(b, DefenderFamily::spread(1.5));
        let incumbent = AttackerSpec::Fixed((0..16).collect());
        let before = evaluate(&incumbent, &d, 40, 9).unwrap().mean;
        let spec = reference_attacker_trainer(&incumbent, &d, 40, 9, &Default::default()).unwrap();
        assert!(evaluate(&spec, &d, 40, 9).unwrap().mean <= before);
    }

    #[test]
    fn auto_mode_falls_back_on_large_boards() {
        let b = Board::new(BoardConfig::new(5, 5, &[3, 2])).unwrap();
        let d = LatentDistribution::family(b, DefenderFamily::uniform());
        let cfg = ReferenceAttackerConfig {
            mode: AttackerTrainerMode::Auto,
            ..Default::default()
        };
        let spec = reference_attacker_trainer(&AttackerSpec::Random, &d, 10, 0, &cfg).unwrap();
        assert_ne!(spec.id(), "random");
    }

    #[test]
    fn family_climb_is_monotone_in_budget() {
        let board = Board::new(BoardConfig::new(4, 4, &[2, 2])).unwrap();
        let bounds = FamilyBox {
            episodes: 30,
            ..Default::default()
        };
        let space = DefenderSpace::Family { board, bounds };
        let attacker = AttackerSpec::ProbMap(ProbMapSettings::default());
        let mut last = f64::NEG_INFINITY;
        for budget in 1..8 {
            let r = reference_defender_trainer(&attacker, &space, budget, 5).unwrap();
            assert!(r.evaluations <= budget);
            assert!(r.value >= last);
            last = r.value;
        }
    }
}
