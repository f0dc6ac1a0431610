use std::io::Write;

use serde::{Deserialize, Serialize};

use super::AttackerTrainer;
use crate::attackers::AttackerSpec;
use crate::defenders::{mixture, LatentDistribution};
use crate::evaluation::{csv_field, evaluate, EvalReport};
use crate::seed::{stream_seed, Stream};
use crate::{Error, Result};

/// Which latent distribution the attacker trains against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// Nominal only.
    A,
    /// Fixed nominal/stress mixture.
    B,
    /// Block schedule alternating nominal and stress.
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Block {
    Nominal,
    Stress,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Stage1Config {
    pub regime: Regime,
    pub generations: usize,
    /// Trainer budget per generation; a single entry applies to all.
    pub budgets: Vec<usize>,
    /// Generation counts `g + 1` after which the attacker is evaluated.
    /// Empty means every generation.
    pub eval_at: Vec<usize>,
    pub eval_episodes: usize,
    /// Stress weight of the regime-B mixture.
    pub stress_weight: Option<f64>,
    /// Regime-C blocks, cycled when shorter than `generations`.
    pub schedule: Vec<Block>,
    pub seed: u64,
}

impl Default for Stage1Config {
    fn default() -> Self {
        Stage1Config {
            regime: Regime::A,
            generations: 4,
            budgets: vec![100],
            eval_at: Vec::new(),
            eval_episodes: 100,
            stress_weight: None,
            schedule: Vec::new(),
            seed: 0,
        }
    }
}

impl Stage1Config {
    pub fn validate(&self) -> Result<()> {
        if self.generations == 0 || self.eval_episodes == 0 {
            return Err(Error::InvalidConfig(
                "generations and eval_episodes must be at least 1".into(),
            ));
        }
        if self.budgets.len() != 1 && self.budgets.len() != self.generations {
            return Err(Error::InvalidConfig(format!(
                "budgets: expected 1 or {} entries, got {}",
                self.generations,
                self.budgets.len()
            )));
        }
        if let Some(&g) = self.eval_at.iter().find(|&&g| g == 0 || g > self.generations) {
            return Err(Error::InvalidConfig(format!(
                "eval_at: {g} is outside 1..={}",
                self.generations
            )));
        }
        match self.regime {
            Regime::B => match self.stress_weight {
                Some(w) if w > 0.0 && w < 1.0 => {}
                _ => {
                    return Err(Error::InvalidConfig(
                        "stress_weight: regime B needs a weight in (0, 1)".into(),
                    ))
                }
            },
            Regime::C => {
                let has = |b| self.schedule.contains(&b);
                if !(has(Block::Nominal) && has(Block::Stress)) {
                    return Err(Error::InvalidConfig(
                        "schedule: regime C needs both nominal and stress blocks".into(),
                    ));
                }
            }
            Regime::A => {}
        }
        Ok(())
    }

    pub fn budget(&self, g: usize) -> usize {
        if self.budgets.len() == 1 {
            self.budgets[0]
        } else {
            self.budgets[g]
        }
    }

    fn evaluates_after(&self, g: usize) -> bool {
        self.eval_at.is_empty() || self.eval_at.contains(&(g + 1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage1Row {
    /// Number of completed updates.
    pub generation: usize,
    pub policy_id: String,
    pub train_distribution: String,
    pub nominal: EvalReport,
    pub stress: EvalReport,
}

#[derive(Debug, Clone)]
pub struct Stage1Outcome {
    pub policy: AttackerSpec,
    pub trace: Vec<Stage1Row>,
}

pub const STAGE1_CSV_HEADER: &str =
    "generation,policy,train,nominal_mean,nominal_p95,nominal_cvar10,stress_mean,stress_p95,stress_cvar10,gap";

impl Stage1Outcome {
    pub fn write_trace_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{STAGE1_CSV_HEADER}")?;
        for r in &self.trace {
            writeln!(
                out,
                "{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
                r.generation,
                csv_field(&r.policy_id),
                csv_field(&r.train_distribution),
                r.nominal.mean,
                r.nominal.p95,
                r.nominal.cvar10,
                r.stress.mean,
                r.stress.p95,
                r.stress.cvar10,
                r.stress.mean - r.nominal.mean
            )?;
        }
        Ok(())
    }
}

/// Single-attacker training under a fixed regime.
///
/// Generation `g` trains on the regime's distribution with seed
/// `stream_seed(seed, Trainer, g)`. Evaluations reuse the same two seeds in
/// every generation, so an unchanged policy yields identical rows.
pub fn run_stage1(
    cfg: &Stage1Config,
    trainer: &dyn AttackerTrainer,
    initial: AttackerSpec,
    nominal: &LatentDistribution,
    stress: &LatentDistribution,
) -> Result<Stage1Outcome> {
    cfg.validate()?;
    let mix = match cfg.stress_weight {
        Some(w) if cfg.regime == Regime::B => Some(mixture(&[nominal.clone(), stress.clone()], &[1.0 - w, w])?),
        _ => None,
    };
    let nominal_seed = stream_seed(cfg.seed, Stream::Estimate, 0);
    let stress_seed = stream_seed(cfg.seed, Stream::Estimate, 1);
    let mut policy = initial;
    let mut trace = Vec::new();
    for g in 0..cfg.generations {
        let train = match cfg.regime {
            Regime::A => nominal,
            Regime::B => mix.as_ref().expect("validated"),
            Regime::C => match cfg.schedule[g % cfg.schedule.len()] {
                Block::Nominal => nominal,
                Block::Stress => stress,
            },
        };
        let train_seed = stream_seed(cfg.seed, Stream::Trainer, g as u64);
        let stepped = trainer
            .improve(&policy, train, cfg.budget(g), train_seed)
            .and_then(|next| {
                if !cfg.evaluates_after(g) {
                    return Ok((next, None));
                }
                let row = Stage1Row {
                    generation: g + 1,
                    policy_id: next.id(),
                    train_distribution: train.to_string(),
                    nominal: evaluate(&next, nominal, cfg.eval_episodes, nominal_seed)?,
                    stress: evaluate(&next, stress, cfg.eval_episodes, stress_seed)?,
                };
                Ok((next, Some(row)))
            });
        let (next, row) = stepped.map_err(|e| e.at_generation(g))?;
        policy = next;
        trace.extend(row);
    }
    Ok(Stage1Outcome { policy, trace })
}
