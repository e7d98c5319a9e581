//! Exact samplers for the crossing primitives of the walk.

pub mod conditioned;
pub mod plain;
pub mod rng;

pub use conditioned::{
    overshoot_first_coord_conditioned, overshoot_point_conditioned, ConditionedMarginal, ConditionedOvershoot,
    ConditionedSamplerCache, DEFAULT_LOG_STEP,
};
pub use plain::{
    beta_sample, mv_cauchy, overshoot_first_coord, overshoot_first_coord_from_u, overshoot_point, GammaLogRatio,
    OvershootSampler,
};
pub use rng::{Lane, RngStream};
