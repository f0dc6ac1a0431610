use std::sync::Arc;

use super::best_response::attacker_best_response;
use super::matrix::layout_losses;
use crate::attackers::{DeterministicPolicyTable, TablePolicy};
use crate::defenders::ExplicitDistribution;
use crate::{Error, Result};

/// Exact minimizer of `lambda * E_D[tau] + (1 - lambda) * E_U[tau]`.
#[derive(Debug, Clone)]
pub struct ParetoPoint {
    pub lambda: f64,
    /// `E_{rho_U}[tau]`.
    pub nominal_loss: f64,
    /// `E_{rho_D}[tau]`.
    pub adversarial_loss: f64,
    pub policy: Arc<DeterministicPolicyTable>,
}

impl ParetoPoint {
    pub fn policy_id(&self) -> String {
        format!("{}#{:016x}", self.policy.name(), self.policy.fingerprint())
    }
}

/// True when `b` is no worse than `a` in both losses and better in one.
pub fn dominates(b: (f64, f64), a: (f64, f64)) -> bool {
    b.0 <= a.0 && b.1 <= a.1 && (b.0 < a.0 || b.1 < a.1)
}

/// True when `b` is better than `a` in both losses.
pub fn strictly_dominates(b: (f64, f64), a: (f64, f64)) -> bool {
    b.0 < a.0 && b.1 < a.1
}

/// One exact best response per `lambda`, each against the mixture
/// `lambda * rho_d + (1 - lambda) * rho_u`.
pub fn scalarization_sweep(
    rho_d: &ExplicitDistribution,
    rho_u: &ExplicitDistribution,
    lambdas: &[f64],
) -> Result<Vec<ParetoPoint>> {
    if !rho_d.same_universe(rho_u) {
        return Err(Error::WeightMismatch(
            "defender distributions use different layout sets".into(),
        ));
    }
    lambdas
        .iter()
        .map(|&lambda| {
            if !(0.0..=1.0).contains(&lambda) {
                return Err(Error::InvalidConfig(format!("lambda {lambda} is outside [0, 1]")));
            }
            let nu = ExplicitDistribution::blend(&[(rho_d, lambda), (rho_u, 1.0 - lambda)])?;
            let (table, _) = attacker_best_response(&nu)?;
            let table = Arc::new(table.with_name(format!("pareto{lambda}")));
            let losses = layout_losses(&mut TablePolicy::new(Arc::clone(&table)), rho_u.universe())?;
            Ok(ParetoPoint {
                lambda,
                nominal_loss: rho_u.expectation(&losses)?,
                adversarial_loss: rho_d.expectation(&losses)?,
                policy: table,
            })
        })
        .collect()
}

/// Whether any sweep point is strictly dominated by another sweep point or
/// by one of the `audit` loss pairs `(nominal, adversarial)`. Weakly
/// Pareto-optimal points never are.
pub fn any_dominated(points: &[ParetoPoint], audit: &[(f64, f64)]) -> bool {
    let pairs: Vec<(f64, f64)> = points.iter().map(|p| (p.nominal_loss, p.adversarial_loss)).collect();
    pairs
        .iter()
        .any(|&a| pairs.iter().chain(audit).any(|&b| strictly_dominates(b, a)))
}
