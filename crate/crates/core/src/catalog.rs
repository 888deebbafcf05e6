//! Reference sponges used throughout the test suites and the CLI.

use crate::sponge::SpongeSpec;

/// Bases `(2, 3, 3)` with `D = {(0,0,0), (0,1,1), (0,2,2), (1,0,1)}`.
pub fn diagonal() -> SpongeSpec {
    SpongeSpec::from_parts(
        &[2, 3, 3],
        &[&[0, 0, 0], &[0, 1, 1], &[0, 2, 2], &[1, 0, 1]],
    )
    .expect("valid sponge")
}

/// [`diagonal`] with the extra digit `(0,2,1)`; its per-coordinate formula
/// overestimates the Assouad dimension.
pub fn augmented() -> SpongeSpec {
    SpongeSpec::from_parts(
        &[2, 3, 3],
        &[&[0, 0, 0], &[0, 1, 1], &[0, 2, 1], &[0, 2, 2], &[1, 0, 1]],
    )
    .expect("valid sponge")
}

/// Self-similar sponge: four corners of the unit square subdivided by 2.
pub fn four_corners() -> SpongeSpec {
    SpongeSpec::from_parts(
        &[2, 2, 2],
        &[&[0, 0, 0], &[0, 1, 1], &[1, 0, 1], &[1, 1, 0]],
    )
    .expect("valid sponge")
}
