//! Exact minimax analysis at desk scale: loss matrices, best responses,
//! double oracle, and scalarization sweeps.

mod best_response;
mod double_oracle;
mod lp;
mod matrix;
mod pareto;

pub use best_response::{
    attacker_best_response, defender_best_response, defender_best_response_distribution, DP_CELL_GUARD, DP_LAYOUT_GUARD,
};
pub use double_oracle::{double_oracle_solve, GameSolution, IterationRecord, SolverSettings};
pub use lp::{solve_zero_sum, MatrixGameSolution};
pub use matrix::{layout_losses, value_bilinear, AttackerMixture, LossMatrix};
pub use pareto::{any_dominated, dominates, scalarization_sweep, strictly_dominates, ParetoPoint};
