use serde::{Deserialize, Serialize};

use super::report::EvalReport;
use crate::board::{EpisodeResult, Observation};
use crate::{Error, Result};

/// Discounted return of one episode with `-1` per shot:
/// `-(1 - gamma^tau) / (1 - gamma)`.
pub fn discounted_return(tau: usize, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::GammaOutOfRange(gamma));
    }
    Ok(-(1.0 - gamma.powi(tau as i32)) / (1.0 - gamma))
}

/// Whether the undiscounted rewards (`-1` for each shot fired) of a finished
/// episode sum to `-tau`. Always true for a well-formed untruncated episode.
pub fn undiscounted_identity_check(episode: &EpisodeResult) -> bool {
    if episode.truncated || episode.shot_log.len() != episode.tau {
        return false;
    }
    if episode.tau > 0 && !matches!(episode.shot_log.last().map(|s| s.outcome), Some(Observation::Sunk(_))) {
        return false;
    }
    let total: i64 = episode.shot_log.iter().map(|_| -1i64).sum();
    total == -(episode.tau as i64)
}

/// Stress-minus-nominal differences of the headline statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub mean_gap: f64,
    pub p95_gap: f64,
    pub cvar_gap: f64,
}

pub fn robustness_gaps(nominal: &EvalReport, stress: &EvalReport) -> Result<GapReport> {
    if nominal.policy_id != stress.policy_id {
        return Err(Error::PolicyMismatch {
            nominal: nominal.policy_id.clone(),
            stress: stress.policy_id.clone(),
        });
    }
    Ok(GapReport {
        mean_gap: stress.mean - nominal.mean,
        p95_gap: stress.p95 - nominal.p95,
        cvar_gap: stress.cvar10 - nominal.cvar10,
    })
}

/// One averaged estimate entering a Hoeffding radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusTerm {
    pub n: usize,
    pub weight: f64,
}

impl RadiusTerm {
    pub fn new(n: usize, weight: f64) -> Self {
        RadiusTerm { n, weight }
    }
}

/// Union-bound Hoeffding radius for a weighted sum of `k` independent sample
/// means of `[0, T_max]` variables:
/// `sum_i w_i * T_max * sqrt(ln(2k / delta) / (2 n_i))`.
pub fn hoeffding_radius(terms: &[RadiusTerm], t_max: usize, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::BadDelta(delta));
    }
    if terms.is_empty() || terms.iter().any(|t| t.n == 0 || !(t.weight > 0.0)) {
        return Err(Error::InvalidConfig(
            "radius terms need n >= 1 and positive weights".into(),
        ));
    }
    let log_term = (2.0 * terms.len() as f64 / delta).ln();
    Ok(terms
        .iter()
        .map(|t| t.weight * t_max as f64 * (log_term / (2.0 * t.n as f64)).sqrt())
        .sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub delta_hat: f64,
    pub radius: f64,
    pub sign_certified: bool,
    pub delta_level: f64,
    /// `(n, T_max)` for each averaged estimate in the radius.
    pub term_sizes: Vec<(usize, usize)>,
}

/// The sign of `delta_hat` is certified at level `delta_level` iff
/// `|delta_hat| > radius`.
pub fn certify_sign(
    delta_hat: f64,
    radius: f64,
    delta_level: f64,
    term_sizes: Vec<(usize, usize)>,
) -> CertificateReport {
    CertificateReport {
        delta_hat,
        radius,
        sign_certified: delta_hat.abs() > radius,
        delta_level,
        term_sizes,
    }
}

/// The two-bit counterexample: identical one-coordinate marginals, different
/// losses for the fixed policy that guesses `z2 = z1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalDemo {
    pub loss_plus: f64,
    pub loss_minus: f64,
    pub marginals_plus: (f64, f64),
    pub marginals_minus: (f64, f64),
}

pub fn marginal_insufficiency_demo() -> MarginalDemo {
    type Latent = (u8, u8);
    let rho_plus: [(Latent, f64); 2] = [((0, 0), 0.5), ((1, 1), 0.5)];
    let rho_minus: [(Latent, f64); 2] = [((0, 1), 0.5), ((1, 0), 0.5)];
    // observe z1, then guess z2; tau = 0 if right, 1 if wrong
    let same = |z1: u8| z1;
    let tau = |(z1, z2): Latent| if same(z1) == z2 { 0.0 } else { 1.0 };
    let loss = |rho: &[(Latent, f64)]| rho.iter().map(|&(z, p)| p * tau(z)).sum::<f64>();
    let marginals = |rho: &[(Latent, f64)]| {
        (
            rho.iter().filter(|(z, _)| z.0 == 1).map(|(_, p)| p).sum::<f64>(),
            rho.iter().filter(|(z, _)| z.1 == 1).map(|(_, p)| p).sum::<f64>(),
        )
    };
    MarginalDemo {
        loss_plus: loss(&rho_plus),
        loss_minus: loss(&rho_minus),
        marginals_plus: marginals(&rho_plus),
        marginals_minus: marginals(&rho_minus),
    }
}
