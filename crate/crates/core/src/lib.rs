//! Assouad and lower dimensions of Bedford–McMullen and Lalley–Gatzouras
//! sponges whose coordinates are only weakly ordered, together with the
//! finite-scale machinery used to check them: approximate cubes, Bernoulli
//! measures, weak-tangent zooms and a brute-force covering oracle.

pub mod catalog;
pub mod dimension;
pub mod measure;
pub mod oracle;
pub mod rational;
pub mod sponge;
pub mod tangent;

pub use dimension::{
    assouad_lower_bm, assouad_lower_lg, assouad_lower_old, dimension_drop, moran_solve,
    DimensionReport, MoranSolution,
};
pub use rational::Rational;
pub use sponge::{LgSponge, SpongeSpec, SymbolicSponge};
