use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attackers::AttackerSpec;
use crate::board::rollout;
use crate::defenders::LatentDistribution;
use crate::seed::{stream_seed, Stream};
use crate::{Error, Result};

/// Summary of `n` evaluation episodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (`n - 1` denominator; 0 for one episode).
    pub std: f64,
    pub p95: f64,
    pub cvar10: f64,
    pub lengths: Vec<usize>,
    pub truncated: usize,
    pub seed: u64,
    pub distribution_id: String,
    pub policy_id: String,
}

/// Lowest sample value whose empirical CDF reaches 0.95.
pub fn empirical_p95(lengths: &[usize]) -> f64 {
    let mut sorted = lengths.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    // smallest k with k / n >= 0.95, as a 0-based index
    let k = (95 * n).div_ceil(100).max(1);
    sorted[k - 1] as f64
}

/// Mean of the largest `ceil(0.10 n)` values.
pub fn empirical_cvar10(lengths: &[usize]) -> f64 {
    let mut sorted = lengths.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let k = sorted.len().div_ceil(10).max(1);
    sorted[..k].iter().sum::<usize>() as f64 / k as f64
}

impl EvalReport {
    pub fn from_lengths(
        lengths: Vec<usize>,
        truncated: usize,
        seed: u64,
        distribution_id: impl Into<String>,
        policy_id: impl Into<String>,
    ) -> Result<Self> {
        let n = lengths.len();
        if n == 0 {
            return Err(Error::InvalidConfig("evaluation needs at least one episode".into()));
        }
        let mean = lengths.iter().sum::<usize>() as f64 / n as f64;
        let std = if n > 1 {
            let ss: f64 = lengths.iter().map(|&l| (l as f64 - mean).powi(2)).sum();
            (ss / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Ok(EvalReport {
            n,
            mean,
            std,
            p95: empirical_p95(&lengths),
            cvar10: empirical_cvar10(&lengths),
            lengths,
            truncated,
            seed,
            distribution_id: distribution_id.into(),
            policy_id: policy_id.into(),
        })
    }

    pub const CSV_HEADER: &'static str = "policy,distribution,seed,n,mean,std,p95,cvar10,truncated";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.6},{:.6},{:.6},{:.6},{}",
            csv_field(&self.policy_id),
            csv_field(&self.distribution_id),
            self.seed,
            self.n,
            self.mean,
            self.std,
            self.p95,
            self.cvar10,
            self.truncated
        )
    }

    /// `episode,tau` rows.
    pub fn write_lengths_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "episode,tau")?;
        for (i, l) in self.lengths.iter().enumerate() {
            writeln!(out, "{i},{l}")?;
        }
        Ok(())
    }
}

/// Quotes a CSV field when it contains a delimiter or quote.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Plays `n` episodes of fresh `attacker` instances against layouts drawn
/// from `dist`.
///
/// Episode `i` draws its layout and policy randomness from seeds derived from
/// `(master_seed, i)`, so the first `n` lengths do not change when `n` grows
/// and results do not depend on the worker count. Truncated episodes count
/// as `T_max`.
pub fn evaluate(attacker: &AttackerSpec, dist: &LatentDistribution, n: usize, master_seed: u64) -> Result<EvalReport> {
    if n == 0 {
        return Err(Error::InvalidConfig("evaluation needs at least one episode".into()));
    }
    let board = dist.board();
    let episodes: Vec<(usize, bool)> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let layout = dist.sample(stream_seed(master_seed, Stream::Layout, i))?;
            let mut policy = attacker.build(board)?;
            let ep = rollout(
                policy.as_mut(),
                &layout,
                board,
                stream_seed(master_seed, Stream::Policy, i),
            )?;
            Ok((ep.tau, ep.truncated))
        })
        .collect::<Result<_>>()?;
    let truncated = episodes.iter().filter(|e| e.1).count();
    EvalReport::from_lengths(
        episodes.into_iter().map(|e| e.0).collect(),
        truncated,
        master_seed,
        dist.to_string(),
        attacker.id(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::{Board, BoardConfig, LayoutSet};
    use crate::defenders::{DefenderFamily, ExplicitDistribution};
    use rand::Rng;

    #[test]
    fn constant_lengths() {
        let b = Board::new(BoardConfig::new(1, 2, &[2])).unwrap();
        let d = LatentDistribution::family(b, DefenderFamily::uniform());
        let r = evaluate(&AttackerSpec::Random, &d, 30, 1).unwrap();
        assert_eq!((r.mean, r.p95, r.cvar10, r.std), (2.0, 2.0, 2.0, 0.0));
    }

    #[test]
    fn one_to_ten() {
        let lengths: Vec<usize> = (1..=10).collect();
        assert_eq!(empirical_p95(&lengths), 10.0);
        assert_eq!(empirical_cvar10(&lengths), 10.0);
    }

    /// Brute-force definitions over the sorted sample.
    fn oracle(lengths: &[usize]) -> (f64, f64) {
        let mut s = lengths.to_vec();
        s.sort();
        let n = s.len() as f64;
        let p95 = *s
            .iter()
            .find(|&&x| s.iter().filter(|&&y| y <= x).count() as f64 / n >= 0.95)
            .unwrap();
        let k = (0.10 * n).ceil() as usize;
        let tail: Vec<usize> = s.iter().rev().take(k).copied().collect();
        (p95 as f64, tail.iter().sum::<usize>() as f64 / k as f64)
    }

    #[test]
    fn estimators_match_order_statistics() {
        let mut rng = crate::seed::rng_from(4);
        for _ in 0..1000 {
            let n = rng.gen_range(1..300);
            let lengths: Vec<usize> = (0..n).map(|_| rng.gen_range(1..101)).collect();
            let (p95, cvar) = oracle(&lengths);
            assert_eq!(empirical_p95(&lengths), p95);
            assert_eq!(empirical_cvar10(&lengths), cvar);
        }
    }

    #[test]
    fn prefix_stable() {
        let b = Board::new(BoardConfig::new(3, 3, &[2])).unwrap();
        let d = LatentDistribution::Explicit(ExplicitDistribution::uniform(LayoutSet::enumerate(&b).unwrap()));
        let short = evaluate(&AttackerSpec::Random, &d, 40, 9).unwrap();
        let long = evaluate(&AttackerSpec::Random, &d, 80, 9).unwrap();
        assert_eq!(short.lengths[..], long.lengths[..40]);
    }

    #[test]
    fn report_invariants() {
        let b = Board::new(BoardConfig::new(4, 4, &[3, 2])).unwrap();
        let d = LatentDistribution::family(b, DefenderFamily::edge(2.0));
        let r = evaluate(&AttackerSpec::Random, &d, 200, 5).unwrap();
        let max = *r.lengths.iter().max().unwrap() as f64;
        assert!(r.mean <= r.p95 && r.p95 <= max && r.cvar10 >= r.mean);
    }
}
