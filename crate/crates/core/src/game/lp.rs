//! Zero-sum matrix games by linear programming.

const EPS: f64 = 1e-12;

/// Optimal mixed strategies of a finite zero-sum game.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixGameSolution {
    /// Minimizing row player's mixture.
    pub row: Vec<f64>,
    /// Maximizing column player's mixture.
    pub col: Vec<f64>,
    pub value: f64,
}

/// Solves `min_x max_y x^T M y` for a nonempty matrix with positive entries.
///
/// The row player's problem `max 1^T u s.t. M^T u <= 1, u >= 0` is solved by
/// a dense tableau simplex with Bland's rule; `value = 1 / sum(u)`, the row
/// mixture is `u * value`, and the column mixture comes from the duals.
pub fn solve_zero_sum(m: &[Vec<f64>]) -> MatrixGameSolution {
    let rows = m.len();
    let cols = m[0].len();
    debug_assert!(m.iter().all(|r| r.len() == cols && r.iter().all(|&v| v > 0.0)));
    // one constraint per column, one variable per row, one slack per column
    let width = rows + cols + 1;
    let mut t = vec![vec![0.0; width]; cols + 1];
    for (j, constraint) in t.iter_mut().take(cols).enumerate() {
        for (i, row) in m.iter().enumerate() {
            constraint[i] = row[j];
        }
        constraint[rows + j] = 1.0;
        constraint[width - 1] = 1.0;
    }
    for i in 0..rows {
        t[cols][i] = -1.0;
    }
    let mut basis: Vec<usize> = (rows..rows + cols).collect();

    loop {
        let Some(enter) = (0..width - 1).find(|&k| t[cols][k] < -EPS) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..cols {
            let a = t[r][enter];
            if a > EPS {
                let ratio = t[r][width - 1] / a;
                let better = match leave {
                    None => true,
                    Some((l, best)) => ratio < best - EPS || (ratio <= best + EPS && basis[r] < basis[l]),
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        // bounded: every variable has a positive constraint coefficient
        let (pivot_row, _) = leave.expect("zero-sum LP is bounded");
        pivot(&mut t, pivot_row, enter);
        basis[pivot_row] = enter;
    }

    let mut u = vec![0.0; rows];
    for (r, &b) in basis.iter().enumerate() {
        if b < rows {
            u[b] = t[r][width - 1];
        }
    }
    let value = 1.0 / t[cols][width - 1];
    let row = normalize(u.iter().map(|x| x.max(0.0)).collect());
    let col = normalize((0..cols).map(|j| t[cols][rows + j].max(0.0)).collect());
    MatrixGameSolution { row, col, value }
}

fn pivot(t: &mut [Vec<f64>], r: usize, c: usize) {
    let p = t[r][c];
    t[r].iter_mut().for_each(|v| *v /= p);
    let pivot_row = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i != r {
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
    }
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}
