use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::best_response::{attacker_best_response, defender_best_response};
use super::lp::solve_zero_sum;
use super::matrix::{AttackerMixture, LossMatrix};
use crate::attackers::DeterministicPolicyTable;
use crate::defenders::{DefenderPolytope, ExplicitDistribution};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub gap_tol: f64,
    pub max_iters: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            gap_tol: 1e-9,
            max_iters: 200,
        }
    }
}

/// One double-oracle pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Attacker policies in the restricted game.
    pub rows: usize,
    /// Polytope generators in the restricted game.
    pub cols: usize,
    /// Restricted-game value.
    pub value: f64,
    /// Exact attacker best-response value against the restricted defender.
    pub lower: f64,
    /// Best generator's value against the restricted attacker mixture.
    pub upper: f64,
}

/// Minimax solution of the latent game over a defender polytope.
#[derive(Debug, Clone)]
pub struct GameSolution {
    pub mu: AttackerMixture,
    pub matrix: LossMatrix,
    pub rho: ExplicitDistribution,
    /// Weight of each polytope generator in `rho`.
    pub generator_weights: Vec<f64>,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub duality_gap: f64,
    pub iterations: usize,
    pub trace: Vec<IterationRecord>,
}

impl GameSolution {
    pub fn policies(&self) -> &[Arc<DeterministicPolicyTable>] {
        self.matrix.policies()
    }

    /// Key-value summary followed by the iteration trace.
    pub fn write_summary<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "value = {:.12}", self.value)?;
        writeln!(out, "duality_gap = {:.6e}", self.duality_gap)?;
        writeln!(out, "lower = {:.12}", self.lower)?;
        writeln!(out, "upper = {:.12}", self.upper)?;
        writeln!(out, "iterations = {}", self.iterations)?;
        let mu: Vec<String> = self.mu.weights.iter().map(|w| format!("{w:.12}")).collect();
        writeln!(out, "mu = [{}]", mu.join(", "))?;
        let rho: Vec<String> = self.rho.weights().iter().map(|w| format!("{w:.12}")).collect();
        writeln!(out, "rho = [{}]", rho.join(", "))?;
        Ok(())
    }

    pub fn write_trace_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "iteration,rows,cols,value,lower,upper,gap")?;
        for r in &self.trace {
            writeln!(
                out,
                "{},{},{},{:.12},{:.12},{:.12},{:.6e}",
                r.iteration,
                r.rows,
                r.cols,
                r.value,
                r.lower,
                r.upper,
                (r.upper - r.lower).max(0.0)
            )?;
        }
        Ok(())
    }
}

/// Double oracle over deterministic attacker policies and the generators of
/// `polytope`.
///
/// Each pass solves the restricted matrix game by LP, then computes the
/// exact attacker best response to the restricted defender mixture (lower
/// bound) and the best generator against the restricted attacker mixture
/// (upper bound). Stops once `upper - lower <= gap_tol`; otherwise both best
/// responses join the restricted game. Fails with
/// [`Error::NotConverged`] carrying the tightest iterate.
pub fn double_oracle_solve(polytope: &DefenderPolytope, settings: SolverSettings) -> Result<GameSolution> {
    let universe = Arc::clone(polytope.universe());
    let gens = polytope.extreme_points();
    let mut matrix = LossMatrix::new(Arc::clone(&universe));

    let share = 1.0 / gens.len() as f64;
    let parts: Vec<(&ExplicitDistribution, f64)> = gens.iter().map(|g| (g, share)).collect();
    let (first, _) = attacker_best_response(&ExplicitDistribution::blend(&parts)?)?;
    matrix.push(Arc::new(first.with_name("br0")))?;
    let first_losses: Vec<f64> = matrix.row(0).iter().map(|&v| v as f64).collect();
    let mut cols = vec![defender_best_response(&first_losses, polytope)?.0];

    let mut trace = Vec::new();
    let mut best: Option<GameSolution> = None;
    for iteration in 1..=settings.max_iters {
        let payoff: Vec<Vec<f64>> = (0..matrix.rows())
            .map(|r| cols.iter().map(|&j| matrix.row_value(r, &gens[j])).collect())
            .collect();
        let game = solve_zero_sum(&payoff);

        let mut generator_weights = vec![0.0; gens.len()];
        for (&j, &w) in cols.iter().zip(&game.col) {
            generator_weights[j] += w;
        }
        let parts: Vec<(&ExplicitDistribution, f64)> =
            cols.iter().map(|&j| &gens[j]).zip(game.col.iter().copied()).collect();
        let rho = ExplicitDistribution::blend(&parts)?;
        let (response, lower) = attacker_best_response(&rho)?;

        let mu = AttackerMixture {
            weights: game.row.clone(),
        };
        let mixed = matrix.mixed_losses(&mu)?;
        let (j_star, upper) = defender_best_response(&mixed, polytope)?;
        let gap = (upper - lower).max(0.0);

        let record = IterationRecord {
            iteration,
            rows: matrix.rows(),
            cols: cols.len(),
            value: game.value,
            lower,
            upper,
        };
        trace.push(record);
        let candidate = GameSolution {
            mu,
            matrix: matrix.clone(),
            rho,
            generator_weights,
            value: game.value,
            lower,
            upper,
            duality_gap: gap,
            iterations: iteration,
            trace: trace.clone(),
        };
        if best.as_ref().is_none_or(|b| gap <= b.duality_gap) {
            best = Some(candidate);
        }
        if gap <= settings.gap_tol {
            let mut done = best.expect("just set");
            done.trace = trace;
            return Ok(done);
        }

        let mut grew = false;
        let response = Arc::new(response.with_name(format!("br{}", matrix.rows())));
        let mut probe = LossMatrix::new(Arc::clone(&universe));
        probe.push(Arc::clone(&response))?;
        if matrix.find_row(probe.row(0)).is_none() {
            matrix.push(response)?;
            grew = true;
        }
        if !cols.contains(&j_star) {
            cols.push(j_star);
            grew = true;
        }
        if !grew {
            break;
        }
    }
    let mut last = best.expect("at least one iteration");
    last.trace = trace;
    Err(Error::NotConverged(Box::new(last)))
}
