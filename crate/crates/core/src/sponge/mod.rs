//! Sponge definitions: Bedford–McMullen and Lalley–Gatzouras digit systems,
//! their validation, coordinate clustering and digit trees.

mod bm;
mod cluster;
mod file;
mod lg;
mod tree;

pub use bm::{validate_bm, BmInput, BmViolation, SpongeSpec};
pub use cluster::ClusterStructure;
pub use file::{FileError, LgNodeFile, SpongeFile, SpongeInput};
pub use lg::{uniform_grid_encoding, validate_lg, LgInput, LgNode, LgSponge, LgViolation};
pub use tree::{DigitTree, DigitTreeNode, Extremes, PerCoordinateCounts};

use crate::rational::Rational;
use serde::{Deserialize, Serialize};
use std::fmt;

/// A digit tuple `(i_1, ..., i_d)`.
pub type Digit = Vec<u32>;

/// Non-fatal observations attached to a validation report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Warning {
    /// Every digit shares `value` in `coordinate`, so the attractor lies in a hyperplane.
    Hyperplane { coordinate: usize, value: u32 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::Hyperplane { coordinate, value } => write!(
                f,
                "coordinate {coordinate} takes the single value {value}; the sponge lies in a hyperplane"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport<V> {
    pub violations: Vec<V>,
    pub warnings: Vec<Warning>,
}

impl<V> ValidationReport<V> {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl<V: fmt::Display> fmt::Display for ValidationReport<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            writeln!(f, "ok")?;
        } else {
            writeln!(f, "invalid: {} violation(s)", self.violations.len())?;
            for violation in &self.violations {
                writeln!(f, "  error: {violation}")?;
            }
        }
        for warning in &self.warnings {
            writeln!(f, "  warning: {warning}")?;
        }
        Ok(())
    }
}

pub(crate) fn hyperplane_warnings(dims: usize, digits: &[Digit]) -> Vec<Warning> {
    (0..dims)
        .filter_map(|coordinate| {
            let first = digits.first()?.get(coordinate).copied()?;
            digits
                .iter()
                .all(|digit| digit.get(coordinate) == Some(&first))
                .then_some(Warning::Hyperplane {
                    coordinate,
                    value: first,
                })
        })
        .collect()
}

/// Common view of a sponge as a symbolic system over `D^N` with per-coordinate
/// affine maps `x -> c x + t`.
///
/// Symbols are indices into [`SymbolicSponge::digits`], which is sorted
/// lexicographically.
pub trait SymbolicSponge: Sync {
    fn dims(&self) -> usize;

    fn digits(&self) -> &[Digit];

    fn clusters(&self) -> &ClusterStructure;

    fn digit_tree(&self) -> &DigitTree;

    /// Contraction applied to `coordinate` by the map of `symbol`.
    fn contraction(&self, symbol: usize, coordinate: usize) -> &Rational;

    /// Translation applied to `coordinate` by the map of `symbol`.
    fn translation(&self, symbol: usize, coordinate: usize) -> &Rational;

    /// Largest scale accepted when computing approximate-cube depths.
    fn max_scale(&self) -> Rational;

    /// Bound on `b_Q / a_Q` for the zoom of any approximate cube.
    fn distortion_bound(&self) -> Rational;

    /// Largest contraction in the first coordinate.
    fn coarsest_contraction(&self) -> Rational {
        (0..self.digits().len())
            .map(|symbol| self.contraction(symbol, 0).clone())
            .max()
            .expect("sponge has digits")
    }

    fn symbol_of(&self, digit: &[u32]) -> Option<usize> {
        self.digits()
            .binary_search_by(|probe| probe.as_slice().cmp(digit))
            .ok()
    }
}
