use super::{
    hyperplane_warnings, ClusterStructure, Digit, DigitTree, PerCoordinateCounts, SymbolicSponge,
    ValidationReport,
};
use crate::rational::{self, Rational};
use num::One;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

/// Raw Bedford–McMullen definition as read from a file, in input coordinate order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BmInput {
    pub bases: Vec<u32>,
    pub digits: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BmViolation {
    NoCoordinates,
    BaseTooSmall {
        coordinate: usize,
        base: u32,
    },
    TooFewDigits {
        count: usize,
    },
    WrongArity {
        digit: Vec<u32>,
        expected: usize,
    },
    DigitOutOfRange {
        digit: Vec<u32>,
        coordinate: usize,
        value: u32,
        base: u32,
    },
    DuplicateDigit {
        digit: Vec<u32>,
    },
}

impl fmt::Display for BmViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BmViolation::NoCoordinates => write!(f, "at least one coordinate is required"),
            BmViolation::BaseTooSmall { coordinate, base } => {
                write!(f, "base {base} of coordinate {coordinate} is below 2")
            }
            BmViolation::TooFewDigits { count } => {
                write!(
                    f,
                    "digit set has {count} element(s); at least 2 are required"
                )
            }
            BmViolation::WrongArity { digit, expected } => {
                write!(
                    f,
                    "digit {digit:?} has {} entries, expected {expected}",
                    digit.len()
                )
            }
            BmViolation::DigitOutOfRange {
                digit,
                coordinate,
                value,
                base,
            } => write!(
                f,
                "digit {digit:?}: entry {value} in coordinate {coordinate} is not below base {base}"
            ),
            BmViolation::DuplicateDigit { digit } => write!(f, "digit {digit:?} appears twice"),
        }
    }
}

/// Checks a raw definition without aborting on the first problem.
pub fn validate_bm(input: &BmInput) -> ValidationReport<BmViolation> {
    let dims = input.bases.len();
    let mut violations = Vec::new();
    if dims == 0 {
        violations.push(BmViolation::NoCoordinates);
    }
    for (coordinate, &base) in input.bases.iter().enumerate() {
        if base < 2 {
            violations.push(BmViolation::BaseTooSmall { coordinate, base });
        }
    }
    let mut seen = BTreeSet::new();
    for digit in &input.digits {
        if digit.len() != dims {
            violations.push(BmViolation::WrongArity {
                digit: digit.clone(),
                expected: dims,
            });
            continue;
        }
        for (coordinate, (&value, &base)) in digit.iter().zip(&input.bases).enumerate() {
            if value >= base {
                violations.push(BmViolation::DigitOutOfRange {
                    digit: digit.clone(),
                    coordinate,
                    value,
                    base,
                });
            }
        }
        if !seen.insert(digit.clone()) {
            violations.push(BmViolation::DuplicateDigit {
                digit: digit.clone(),
            });
        }
    }
    if input.digits.len() < 2 {
        violations.push(BmViolation::TooFewDigits {
            count: input.digits.len(),
        });
    }
    let warnings = if violations.is_empty() {
        hyperplane_warnings(dims, &input.digits)
    } else {
        Vec::new()
    };
    ValidationReport {
        violations,
        warnings,
    }
}

/// A validated Bedford–McMullen sponge in canonical coordinate order.
///
/// Coordinates are stably sorted so that bases are nondecreasing, and the
/// digit set is sorted lexicographically. `permutation[l]` is the input
/// coordinate that became canonical coordinate `l`.
#[derive(Debug, Clone)]
pub struct SpongeSpec {
    bases: Vec<u32>,
    digits: Vec<Digit>,
    permutation: Vec<usize>,
    clusters: ClusterStructure,
    tree: DigitTree,
    per_coordinate: PerCoordinateCounts,
    contractions: Vec<Rational>,
    translations: Vec<Vec<Rational>>,
}

impl SpongeSpec {
    pub fn new(input: BmInput) -> Result<Self, ValidationReport<BmViolation>> {
        let report = validate_bm(&input);
        if !report.is_ok() {
            return Err(report);
        }
        let mut permutation: Vec<usize> = (0..input.bases.len()).collect();
        permutation.sort_by_key(|&l| input.bases[l]);
        let bases: Vec<u32> = permutation.iter().map(|&l| input.bases[l]).collect();
        let mut digits: Vec<Digit> = input
            .digits
            .iter()
            .map(|digit| permutation.iter().map(|&l| digit[l]).collect())
            .collect();
        digits.sort();

        let clusters = ClusterStructure::from_sorted_bases(&bases);
        let tree = DigitTree::build(&digits, &clusters);
        let per_coordinate = PerCoordinateCounts::build(bases.len(), &digits);
        let contractions = bases
            .iter()
            .map(|&n| rational::ratio(1, n as i64))
            .collect();
        let translations = digits
            .iter()
            .map(|digit| {
                digit
                    .iter()
                    .zip(&bases)
                    .map(|(&i, &n)| rational::ratio(i as i64, n as i64))
                    .collect()
            })
            .collect();
        Ok(Self {
            bases,
            digits,
            permutation,
            clusters,
            tree,
            per_coordinate,
            contractions,
            translations,
        })
    }

    /// Convenience constructor for literal definitions.
    pub fn from_parts(
        bases: &[u32],
        digits: &[&[u32]],
    ) -> Result<Self, ValidationReport<BmViolation>> {
        Self::new(BmInput {
            bases: bases.to_vec(),
            digits: digits.iter().map(|d| d.to_vec()).collect(),
        })
    }

    pub fn bases(&self) -> &[u32] {
        &self.bases
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn per_coordinate_counts(&self) -> &PerCoordinateCounts {
        &self.per_coordinate
    }

    /// The definition in canonical order, suitable for writing back to a file.
    pub fn to_input(&self) -> BmInput {
        BmInput {
            bases: self.bases.clone(),
            digits: self.digits.clone(),
        }
    }

    /// The same sponge with canonical coordinates reordered by `order`
    /// (`order[l]` is the current coordinate placed at position `l`).
    ///
    /// Only reorderings inside clusters keep the canonical form unchanged;
    /// any other order is re-sorted by the constructor.
    pub fn reordered(&self, order: &[usize]) -> Self {
        let input = BmInput {
            bases: order.iter().map(|&l| self.bases[l]).collect(),
            digits: self
                .digits
                .iter()
                .map(|d| order.iter().map(|&l| d[l]).collect())
                .collect(),
        };
        Self::new(input).expect("reordering preserves validity")
    }

    pub fn is_single_cluster(&self) -> bool {
        self.clusters.count() == 1
    }

    pub fn has_weak_ordering(&self) -> bool {
        self.clusters.count() < self.bases.len()
    }
}

impl SymbolicSponge for SpongeSpec {
    fn dims(&self) -> usize {
        self.bases.len()
    }

    fn digits(&self) -> &[Digit] {
        &self.digits
    }

    fn clusters(&self) -> &ClusterStructure {
        &self.clusters
    }

    fn digit_tree(&self) -> &DigitTree {
        &self.tree
    }

    fn contraction(&self, _symbol: usize, coordinate: usize) -> &Rational {
        &self.contractions[coordinate]
    }

    fn translation(&self, symbol: usize, coordinate: usize) -> &Rational {
        &self.translations[symbol][coordinate]
    }

    fn max_scale(&self) -> Rational {
        Rational::one()
    }

    fn distortion_bound(&self) -> Rational {
        rational::integer(*self.bases.last().expect("at least one coordinate") as i64)
    }
}
