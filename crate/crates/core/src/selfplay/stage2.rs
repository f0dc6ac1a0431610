use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{AttackerTrainer, DefenderTrainer};
use crate::attackers::AttackerSpec;
use crate::board::LayoutSet;
use crate::defenders::{mixture, LatentDistribution};
use crate::evaluation::{certify_sign, csv_field, evaluate, hoeffding_radius, CertificateReport, RadiusTerm};
use crate::game::layout_losses;
use crate::seed::{derive_seed, stream_seed, Stream};
use crate::{Error, Result};

/// Largest layout set on which population diagnostics are computed.
pub const POPULATION_LAYOUT_LIMIT: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Stage2Config {
    pub generations: usize,
    /// Weight of the learned defender in the attacker's training mixture.
    pub lambda: f64,
    pub defender_budget: usize,
    pub attacker_budget: usize,
    /// Episodes for each scripted-distribution estimate.
    pub scripted_episodes: usize,
    /// Episodes for the pre-update estimate on the learned defender.
    pub pre_episodes: usize,
    /// Episodes for the post-update estimate on the learned defender.
    pub post_episodes: usize,
    /// Confidence level of the sign certificates.
    pub delta: f64,
    pub seed: u64,
}

impl Default for Stage2Config {
    fn default() -> Self {
        Stage2Config {
            generations: 3,
            lambda: 0.5,
            defender_budget: 20,
            attacker_budget: 100,
            scripted_episodes: 100,
            pre_episodes: 50,
            post_episodes: 100,
            delta: 0.05,
            seed: 0,
        }
    }
}

impl Stage2Config {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "lambda: {} is outside (0, 1)",
                self.lambda
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidConfig(format!("delta: {} is outside (0, 1)", self.delta)));
        }
        for (key, n) in [
            ("scripted_episodes", self.scripted_episodes),
            ("pre_episodes", self.pre_episodes),
            ("post_episodes", self.post_episodes),
        ] {
            if n == 0 {
                return Err(Error::InvalidConfig(format!("{key}: must be at least 1")));
            }
        }
        Ok(())
    }
}

/// Exact expected losses, available on enumerable boards when both
/// attackers are deterministic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationDiagnostics {
    pub j_uniform_pre: f64,
    pub j_defender_pre: f64,
    pub j_uniform_post: f64,
    pub j_defender_post: f64,
    pub defender_adversarial: f64,
    pub attacker_adaptation: f64,
    pub uniform_drift: f64,
    pub weighted_residual: f64,
}

impl PopulationDiagnostics {
    fn from_losses(lambda: f64, j_u_pre: f64, j_d_pre: f64, j_u_post: f64, j_d_post: f64) -> Self {
        let adaptation = j_d_post - j_d_pre;
        let drift = j_u_post - j_u_pre;
        PopulationDiagnostics {
            j_uniform_pre: j_u_pre,
            j_defender_pre: j_d_pre,
            j_uniform_post: j_u_post,
            j_defender_post: j_d_post,
            defender_adversarial: j_d_pre - j_u_pre,
            attacker_adaptation: adaptation,
            uniform_drift: drift,
            weighted_residual: lambda * adaptation + (1.0 - lambda) * drift,
        }
    }
}

/// Everything logged for generation `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationLog {
    pub seed: u64,
    pub k: usize,
    pub lambda: f64,
    /// Nominal loss of the previous attacker.
    pub j_uniform_pre: f64,
    /// Learned-defender loss of the previous attacker.
    pub j_defender_pre: f64,
    pub j_uniform_post: f64,
    pub j_defender_post: f64,
    pub j_stress_post: f64,
    pub defender_adversarial: f64,
    pub attacker_adaptation: f64,
    pub uniform_drift: f64,
    pub weighted_residual: f64,
    /// Certificate for `defender_adversarial` (two estimates).
    pub defender_certificate: CertificateReport,
    /// Certificate for `weighted_residual` (four estimates).
    pub residual_certificate: CertificateReport,
    pub defender_id: String,
    pub attacker_id: String,
    pub population: Option<PopulationDiagnostics>,
}

impl GenerationLog {
    /// The four defining identities, checked with exact float equality.
    pub fn identities_hold(&self) -> bool {
        self.defender_adversarial == self.j_defender_pre - self.j_uniform_pre
            && self.attacker_adaptation == self.j_defender_post - self.j_defender_pre
            && self.uniform_drift == self.j_uniform_post - self.j_uniform_pre
            && self.weighted_residual
                == self.lambda * self.attacker_adaptation + (1.0 - self.lambda) * self.uniform_drift
    }
}

pub const GENERATION_CSV_HEADER: &str = "seed,k,uniform_post,stress_post,defender_post,defender_adversarial,\
attacker_adaptation,uniform_drift,weighted_residual,uniform_pre,defender_pre,defender_radius,defender_certified,\
residual_radius,residual_certified,pop_defender_adversarial,pop_weighted_residual,defender,attacker";

pub fn write_generation_csv<W: Write>(logs: &[GenerationLog], mut out: W) -> Result<()> {
    writeln!(out, "{GENERATION_CSV_HEADER}")?;
    let opt = |v: Option<f64>| v.map(|v| format!("{v:.6}")).unwrap_or_default();
    for g in logs {
        writeln!(
            out,
            "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{},{:.6},{},{},{},{},{}",
            g.seed,
            g.k,
            g.j_uniform_post,
            g.j_stress_post,
            g.j_defender_post,
            g.defender_adversarial,
            g.attacker_adaptation,
            g.uniform_drift,
            g.weighted_residual,
            g.j_uniform_pre,
            g.j_defender_pre,
            g.defender_certificate.radius,
            g.defender_certificate.sign_certified,
            g.residual_certificate.radius,
            g.residual_certificate.sign_certified,
            opt(g.population.map(|p| p.defender_adversarial)),
            opt(g.population.map(|p| p.weighted_residual)),
            csv_field(&g.defender_id),
            csv_field(&g.attacker_id),
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Stage2Outcome {
    pub logs: Vec<GenerationLog>,
    /// `pi_{A,0}, ..., pi_{A,G}`.
    pub attackers: Vec<AttackerSpec>,
    /// `rho_1, ..., rho_G`.
    pub defenders: Vec<LatentDistribution>,
}

/// Restricted iterative best response.
///
/// Generation `k` trains a defender against the frozen attacker, forms
/// `nu_k = lambda * rho_k + (1 - lambda) * rho_U`, trains the attacker on
/// `nu_k`, then runs five estimates. Each estimate uses its own seed stream,
/// as the concentration argument behind the certificates requires
/// independent samples.
pub fn run_stage2(
    cfg: &Stage2Config,
    attacker_trainer: &dyn AttackerTrainer,
    defender_trainer: &dyn DefenderTrainer,
    initial: AttackerSpec,
    nominal: &LatentDistribution,
    stress: &LatentDistribution,
) -> Result<Stage2Outcome> {
    cfg.validate()?;
    let mut attackers = vec![initial];
    let mut defenders = Vec::new();
    let mut logs = Vec::new();
    for k in 1..=cfg.generations {
        let prev = attackers.last().expect("initial attacker").clone();
        let (log, next, rho) = generation(cfg, k, attacker_trainer, defender_trainer, &prev, nominal, stress)
            .map_err(|e| e.at_generation(k))?;
        logs.push(log);
        attackers.push(next);
        defenders.push(rho);
    }
    Ok(Stage2Outcome {
        logs,
        attackers,
        defenders,
    })
}

fn generation(
    cfg: &Stage2Config,
    k: usize,
    attacker_trainer: &dyn AttackerTrainer,
    defender_trainer: &dyn DefenderTrainer,
    prev: &AttackerSpec,
    nominal: &LatentDistribution,
    stress: &LatentDistribution,
) -> Result<(GenerationLog, AttackerSpec, LatentDistribution)> {
    let kseed = derive_seed(cfg.seed, k as u64);
    let rho = defender_trainer.train(prev, cfg.defender_budget, stream_seed(kseed, Stream::Trainer, 0))?;
    let nu = mixture(&[rho.clone(), nominal.clone()], &[cfg.lambda, 1.0 - cfg.lambda])?;
    let next = attacker_trainer.improve(prev, &nu, cfg.attacker_budget, stream_seed(kseed, Stream::Trainer, 1))?;

    let est = |i: u64| stream_seed(kseed, Stream::Estimate, i);
    let j_u_pre = evaluate(prev, nominal, cfg.scripted_episodes, est(0))?.mean;
    let j_d_pre = evaluate(prev, &rho, cfg.pre_episodes, est(1))?.mean;
    let j_u_post = evaluate(&next, nominal, cfg.scripted_episodes, est(2))?.mean;
    let j_d_post = evaluate(&next, &rho, cfg.post_episodes, est(3))?.mean;
    let j_s_post = evaluate(&next, stress, cfg.scripted_episodes, est(4))?.mean;

    let lambda = cfg.lambda;
    let defender_adversarial = j_d_pre - j_u_pre;
    let attacker_adaptation = j_d_post - j_d_pre;
    let uniform_drift = j_u_post - j_u_pre;
    let weighted_residual = lambda * attacker_adaptation + (1.0 - lambda) * uniform_drift;

    let t_max = nominal.board().t_max();
    let two = [
        RadiusTerm::new(cfg.pre_episodes, 1.0),
        RadiusTerm::new(cfg.scripted_episodes, 1.0),
    ];
    let four = [
        RadiusTerm::new(cfg.post_episodes, lambda),
        RadiusTerm::new(cfg.pre_episodes, lambda),
        RadiusTerm::new(cfg.scripted_episodes, 1.0 - lambda),
        RadiusTerm::new(cfg.scripted_episodes, 1.0 - lambda),
    ];
    let sizes = |terms: &[RadiusTerm]| terms.iter().map(|t| (t.n, t_max)).collect::<Vec<_>>();
    let defender_certificate = certify_sign(
        defender_adversarial,
        hoeffding_radius(&two, t_max, cfg.delta)?,
        cfg.delta,
        sizes(&two),
    );
    let residual_certificate = certify_sign(
        weighted_residual,
        hoeffding_radius(&four, t_max, cfg.delta)?,
        cfg.delta,
        sizes(&four),
    );

    let log = GenerationLog {
        seed: cfg.seed,
        k,
        lambda,
        j_uniform_pre: j_u_pre,
        j_defender_pre: j_d_pre,
        j_uniform_post: j_u_post,
        j_defender_post: j_d_post,
        j_stress_post: j_s_post,
        defender_adversarial,
        attacker_adaptation,
        uniform_drift,
        weighted_residual,
        defender_certificate,
        residual_certificate,
        defender_id: rho.to_string(),
        attacker_id: next.id(),
        population: population(lambda, prev, &next, nominal, &rho)?,
    };
    Ok((log, next, rho))
}

/// Exact diagnostics by enumeration, or `None` when the board is too large
/// or an attacker is stochastic.
pub fn population(
    lambda: f64,
    prev: &AttackerSpec,
    next: &AttackerSpec,
    nominal: &LatentDistribution,
    rho: &LatentDistribution,
) -> Result<Option<PopulationDiagnostics>> {
    if !(prev.is_deterministic() && next.is_deterministic()) {
        return Ok(None);
    }
    let board = nominal.board();
    let Some(universe) = LayoutSet::shared(board, POPULATION_LAYOUT_LIMIT) else {
        return Ok(None);
    };
    let u = nominal.to_explicit(&universe)?;
    let d = rho.to_explicit(&universe)?;
    let before = layout_losses(prev.build(board)?.as_mut(), &universe)?;
    let after = layout_losses(next.build(board)?.as_mut(), &universe)?;
    Ok(Some(PopulationDiagnostics::from_losses(
        lambda,
        u.expectation(&before)?,
        d.expectation(&before)?,
        u.expectation(&after)?,
        d.expectation(&after)?,
    )))
}
