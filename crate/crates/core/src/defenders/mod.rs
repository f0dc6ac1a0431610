//! Defender strategies: scripted families, explicit and mixed distributions,
//! polytopes, and geometric shift metrics.

mod distribution;
mod family;
mod metrics;
mod polytope;
mod sampler;

pub use distribution::{mixture, ExplicitDistribution, LatentDistribution, SamplerSettings, ScoredDistribution};
pub use family::{
    DefenderFamily, FamilyTag, LayoutFeatures, ScoreWeights, DEFAULT_CLUSTER_STRENGTH, DEFAULT_EDGE_STRENGTH,
    DEFAULT_PARITY_STRENGTH, DEFAULT_SPREAD_STRENGTH,
};
pub use metrics::{
    shift_metrics, shift_metrics_against, ShiftMetrics, UniformReference, REFERENCE_SAMPLES, REFERENCE_SEED,
};
pub use polytope::DefenderPolytope;
