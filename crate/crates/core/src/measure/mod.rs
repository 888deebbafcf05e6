//! Finite words, approximate cubes and the Bernoulli measures evaluated on them.

mod cube;
mod ratio;
mod weights;
mod word;

pub use cube::{
    approximate_cube, depths_bm, depths_lg, word_depths, ApproximateCube, DepthError, Depths,
    Interval,
};
pub use ratio::{
    ratio_bound_check, trial_rng, RatioConstants, RatioReport, RatioRow, RATIO_LOG_SLACK,
};
pub use weights::{
    cube_measure, lg_weights, ln_cube_measure, pcu_weights, BernoulliWeights, Probability,
};
pub use word::{Word, WordError};
