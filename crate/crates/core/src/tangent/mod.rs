//! Weak-tangent apparatus: maximizing digits, the word `omega(R)`, the zoom
//! `T^Q`, grid pre-fractals and Hausdorff-distance diagnostics.

mod boxes;
mod construct;
mod hausdorff;
mod select;
mod zoom;

pub use boxes::{cluster_prefractal, prefractal, prefractal_rectangles, Aabb, Axis, BoxSet};
pub use construct::{
    containment_check, containment_target, convergence_sweep, is_nonincreasing, tangent_product,
    zoomed_set, ContainmentReport, SweepOptions, SweepRow, ZoomPlan, DEFAULT_EXTRA_DEPTH,
};
pub use hausdorff::{directed_hausdorff, hausdorff_distance, HausdorffBounds, HausdorffOptions};
pub use select::{
    omega_r_bm, omega_r_lg, select_maximizers, select_maximizers_lg, select_twists, OmegaWord,
};
pub use zoom::{zoom_map, AffineZoom};

use crate::measure::{DepthError, WordError};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TangentError {
    #[error("scale R = {0} is outside the admissible range")]
    RTooLarge(String),
    #[error("no digit drops its contraction across cluster boundary {boundary}")]
    NoTwistAvailable { boundary: usize },
    #[error("no symbol keeps the depths of omega(R) consistent at position {position}")]
    NoConsistentWord { position: usize },
    #[error("{needed} boxes exceed the budget of {budget}")]
    BudgetExceeded { needed: f64, budget: u64 },
    #[error("grid {0:?} has more cells than fit in 64 bits")]
    ResolutionOverflow(Axis),
    #[error("box {0:?} lies outside its grid")]
    CellOutOfRange(Vec<u64>),
    #[error("box sets live on incompatible grids")]
    AxisMismatch,
    #[error("prefix {0:?} does not occur in the digit tree")]
    UnknownPrefix(Vec<u32>),
    #[error("malformed voxel line `{0}`")]
    MalformedVoxels(String),
    #[error("Hausdorff distance needs two nonempty sets")]
    EmptySet,
    #[error(transparent)]
    Depth(#[from] DepthError),
}

impl From<WordError> for TangentError {
    fn from(err: WordError) -> Self {
        TangentError::Depth(DepthError::WordTooShort(err))
    }
}
