//! Independent oracles for single-ship boards. Nothing here calls into the
//! crate: layouts, observations and best responses are rebuilt by hand.
#![allow(dead_code)]

use std::collections::HashMap;

/// A board with one ship of length `len`; layouts are cell bitmasks.
pub struct OneShip {
    pub cells: usize,
    pub layouts: Vec<u64>,
}

impl OneShip {
    pub fn new(h: usize, w: usize, len: usize) -> Self {
        let mut layouts = Vec::new();
        for r in 0..h {
            for c in 0..w {
                if c + len <= w {
                    layouts.push((0..len).fold(0u64, |m, k| m | 1 << (r * w + c + k)));
                }
                if len > 1 && r + len <= h {
                    layouts.push((0..len).fold(0u64, |m, k| m | 1 << ((r + k) * w + c)));
                }
            }
        }
        OneShip { cells: h * w, layouts }
    }

    /// Splits `alive` by the outcome of firing `cell` after `fired`:
    /// (miss, hit, sunk) layout masks.
    fn split(&self, alive: u32, fired: u64, cell: usize) -> (u32, u32, u32) {
        let (mut miss, mut hit, mut sunk) = (0, 0, 0);
        for (i, &l) in self.layouts.iter().enumerate() {
            if alive >> i & 1 == 0 {
                continue;
            }
            if l >> cell & 1 == 0 {
                miss |= 1 << i;
            } else if l & !(fired | 1 << cell) == 0 {
                sunk |= 1 << i;
            } else {
                hit |= 1 << i;
            }
        }
        (miss, hit, sunk)
    }

    /// Loss vectors of every deterministic decision tree, wasteful shots
    /// included. Only feasible on strips of a few cells.
    pub fn all_policy_losses(&self) -> Vec<Vec<f64>> {
        let all = (1u32 << self.layouts.len()) - 1;
        self.trees(all, 0)
            .into_iter()
            .map(|v| v.into_iter().map(|x| x as f64).collect())
            .collect()
    }

    fn trees(&self, alive: u32, fired: u64) -> Vec<Vec<u32>> {
        let n = self.layouts.len();
        let mut out = Vec::new();
        for cell in (0..self.cells).filter(|c| fired >> c & 1 == 0) {
            let f = fired | 1 << cell;
            let (miss, hit, sunk) = self.split(alive, fired, cell);
            let branch = |m: u32| if m == 0 { vec![vec![0; n]] } else { self.trees(m, f) };
            for a in branch(miss) {
                for b in branch(hit) {
                    let mut v = vec![0; n];
                    for i in 0..n {
                        v[i] = if sunk >> i & 1 == 1 {
                            1
                        } else if miss >> i & 1 == 1 {
                            1 + a[i]
                        } else if hit >> i & 1 == 1 {
                            1 + b[i]
                        } else {
                            0
                        };
                    }
                    out.push(v);
                }
            }
        }
        out
    }

    /// Bayes-optimal attacker against `weights`: its weighted loss and its
    /// loss on every layout. Only cells some live layout covers are tried;
    /// ties go to the lowest cell.
    pub fn best_response(&self, weights: &[f64]) -> (f64, Vec<f64>) {
        let mut memo = HashMap::new();
        let all = (1u32 << self.layouts.len()) - 1;
        let obj = self.dp(weights, all, 0, &mut memo);
        let losses = (0..self.layouts.len())
            .map(|i| {
                let (mut alive, mut fired, mut shots) = (all, 0u64, 0.0);
                loop {
                    let cell = memo[&(alive, fired & self.cover(alive))].1;
                    let (miss, hit, _) = self.split(alive, fired, cell);
                    fired |= 1 << cell;
                    shots += 1.0;
                    alive = if miss >> i & 1 == 1 {
                        miss
                    } else if hit >> i & 1 == 1 {
                        hit
                    } else {
                        break shots;
                    };
                }
            })
            .collect();
        (obj / weights.iter().sum::<f64>(), losses)
    }

    /// Cells some layout in `alive` occupies.
    fn cover(&self, alive: u32) -> u64 {
        (0..self.layouts.len())
            .filter(|i| alive >> i & 1 == 1)
            .fold(0, |m, i| m | self.layouts[i])
    }

    fn dp(&self, w: &[f64], alive: u32, fired: u64, memo: &mut HashMap<(u32, u64), (f64, usize)>) -> f64 {
        // shots outside every live layout no longer matter
        let fired = fired & self.cover(alive);
        if let Some(&(obj, _)) = memo.get(&(alive, fired)) {
            return obj;
        }
        let cover = self.cover(alive) & !fired;
        let mass: f64 = (0..self.layouts.len())
            .filter(|i| alive >> i & 1 == 1)
            .map(|i| w[i])
            .sum();
        let mut best = (f64::INFINITY, usize::MAX);
        for cell in (0..self.cells).filter(|c| cover >> c & 1 == 1) {
            let f = fired | 1 << cell;
            let (miss, hit, _) = self.split(alive, fired, cell);
            let mut obj = mass;
            for sub in [miss, hit].into_iter().filter(|&m| m != 0) {
                obj += self.dp(w, sub, f, memo);
            }
            if obj < best.0 - 1e-12 {
                best = (obj, cell);
            }
        }
        memo.insert((alive, fired), best);
        best.0
    }
}

/// `max_p min_v p . v` over the two-layout simplex, evaluated at the
/// endpoints and every pairwise crossing.
pub fn two_column_value(vectors: &[Vec<f64>]) -> f64 {
    let inner = |p: f64| {
        vectors
            .iter()
            .map(|v| p * v[0] + (1.0 - p) * v[1])
            .fold(f64::INFINITY, f64::min)
    };
    let mut candidates = vec![0.0, 1.0];
    for a in vectors {
        for b in vectors {
            let denom = (a[0] - a[1]) - (b[0] - b[1]);
            if denom.abs() > 1e-15 {
                let p = (b[1] - a[1]) / denom;
                if (0.0..=1.0).contains(&p) {
                    candidates.push(p);
                }
            }
        }
    }
    candidates.into_iter().map(inner).fold(f64::NEG_INFINITY, f64::max)
}

/// Fictitious play with exact best responses on both sides. Returns the
/// tightest (lower, upper) bracket on the game value seen.
pub fn fictitious_play(game: &OneShip, tol: f64, max_iters: usize) -> (f64, f64) {
    let n = game.layouts.len();
    let mut counts = vec![1.0; n];
    let mut attacker_sum = vec![0.0; n];
    let (mut lower, mut upper) = (f64::NEG_INFINITY, f64::INFINITY);
    for t in 1..=max_iters {
        let (value, losses) = game.best_response(&counts);
        lower = lower.max(value);
        for (s, l) in attacker_sum.iter_mut().zip(&losses) {
            *s += l;
        }
        let (worst, &top) = attacker_sum
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
            .unwrap();
        upper = upper.min(top / t as f64);
        counts[worst] += 1.0;
        if upper - lower < tol {
            break;
        }
    }
    (lower, upper)
}
