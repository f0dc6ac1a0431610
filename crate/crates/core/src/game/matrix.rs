use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;

use crate::attackers::{AttackerPolicy, DeterministicPolicyTable, TablePolicy};
use crate::board::{rollout, LayoutSet};
use crate::defenders::ExplicitDistribution;
use crate::{Error, Result};

/// Shots-to-win of `policy` on every layout of `universe`, by one rollout
/// each (seed 0). Exact for deterministic policies.
pub fn layout_losses(policy: &mut dyn AttackerPolicy, universe: &LayoutSet) -> Result<Vec<f64>> {
    universe
        .layouts()
        .iter()
        .map(|l| Ok(rollout(policy, l, universe.board(), 0)?.tau as f64))
        .collect()
}

/// `L(pi, z)`: rows are deterministic attacker policies, columns layouts.
#[derive(Debug, Clone)]
pub struct LossMatrix {
    universe: Arc<LayoutSet>,
    policies: Vec<Arc<DeterministicPolicyTable>>,
    entries: Vec<Vec<u32>>,
}

impl LossMatrix {
    pub fn new(universe: Arc<LayoutSet>) -> Self {
        LossMatrix {
            universe,
            policies: Vec::new(),
            entries: Vec::new(),
        }
    }

    /// Rolls out every policy on every layout.
    pub fn build(universe: Arc<LayoutSet>, policies: Vec<Arc<DeterministicPolicyTable>>) -> Result<Self> {
        let entries = policies
            .par_iter()
            .map(|p| row_for(p, &universe))
            .collect::<Result<Vec<_>>>()?;
        Ok(LossMatrix {
            universe,
            policies,
            entries,
        })
    }

    /// Appends a row; returns its index.
    pub fn push(&mut self, policy: Arc<DeterministicPolicyTable>) -> Result<usize> {
        let row = row_for(&policy, &self.universe)?;
        self.policies.push(policy);
        self.entries.push(row);
        Ok(self.entries.len() - 1)
    }

    pub fn universe(&self) -> &Arc<LayoutSet> {
        &self.universe
    }

    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.universe.len()
    }

    pub fn policy(&self, row: usize) -> &Arc<DeterministicPolicyTable> {
        &self.policies[row]
    }

    pub fn policies(&self) -> &[Arc<DeterministicPolicyTable>] {
        &self.policies
    }

    pub fn entry(&self, row: usize, col: usize) -> u32 {
        self.entries[row][col]
    }

    pub fn row(&self, row: usize) -> &[u32] {
        &self.entries[row]
    }

    pub fn find_row(&self, losses: &[u32]) -> Option<usize> {
        self.entries.iter().position(|r| r == losses)
    }

    /// `E_rho[tau]` for one row.
    pub fn row_value(&self, row: usize, rho: &ExplicitDistribution) -> f64 {
        self.entries[row]
            .iter()
            .zip(rho.weights())
            .map(|(&l, w)| l as f64 * w)
            .sum()
    }

    /// Per-layout expected loss of an attacker mixture.
    pub fn mixed_losses(&self, mu: &AttackerMixture) -> Result<Vec<f64>> {
        if mu.weights.len() != self.rows() {
            return Err(Error::DimensionMismatch {
                expected: self.rows(),
                got: mu.weights.len(),
            });
        }
        let mut out = vec![0.0; self.cols()];
        for (row, &w) in self.entries.iter().zip(&mu.weights) {
            if w != 0.0 {
                for (o, &l) in out.iter_mut().zip(row) {
                    *o += w * l as f64;
                }
            }
        }
        Ok(out)
    }

    /// Matrix as CSV: `policy,<layout ids...>`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        write!(out, "policy")?;
        for l in self.universe.layouts() {
            write!(out, ",\"{}\"", l.id())?;
        }
        writeln!(out)?;
        for (p, row) in self.policies.iter().zip(&self.entries) {
            write!(out, "{}", p.name())?;
            for v in row {
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

fn row_for(policy: &Arc<DeterministicPolicyTable>, universe: &LayoutSet) -> Result<Vec<u32>> {
    let mut player = TablePolicy::new(Arc::clone(policy));
    Ok(layout_losses(&mut player, universe)?
        .into_iter()
        .map(|t| t as u32)
        .collect())
}

/// Weights over the rows of a [`LossMatrix`].
#[derive(Debug, Clone, PartialEq)]
pub struct AttackerMixture {
    pub weights: Vec<f64>,
}

impl AttackerMixture {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::WeightMismatch(
                "attacker mixture weights must be nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::WeightMismatch(format!("attacker mixture sums to {total}")));
        }
        Ok(AttackerMixture { weights })
    }

    pub fn pure(rows: usize, row: usize) -> Self {
        let mut weights = vec![0.0; rows];
        weights[row] = 1.0;
        AttackerMixture { weights }
    }
}

/// `V(mu, rho) = sum_pi sum_z mu(pi) rho(z) L(pi, z)`.
pub fn value_bilinear(mu: &AttackerMixture, rho: &ExplicitDistribution, m: &LossMatrix) -> Result<f64> {
    if rho.weights().len() != m.cols() {
        return Err(Error::DimensionMismatch {
            expected: m.cols(),
            got: rho.weights().len(),
        });
    }
    let losses = m.mixed_losses(mu)?;
    rho.expectation(&losses)
}
