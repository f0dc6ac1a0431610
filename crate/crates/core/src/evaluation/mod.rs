//! Evaluation statistics and finite-sample diagnostics.

mod diagnostics;
mod report;

pub use diagnostics::{
    certify_sign, discounted_return, hoeffding_radius, marginal_insufficiency_demo, robustness_gaps,
    undiscounted_identity_check, CertificateReport, GapReport, MarginalDemo, RadiusTerm,
};
pub use report::{csv_field, empirical_cvar10, empirical_p95, evaluate, EvalReport};
