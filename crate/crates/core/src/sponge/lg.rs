use super::{
    hyperplane_warnings, ClusterStructure, Digit, DigitTree, SpongeSpec, SymbolicSponge,
    ValidationReport,
};
use crate::rational::{self, format_rational, Rational};
use num::{One, Signed};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Contraction `c` and translation `t` attached to one digit prefix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LgNode {
    pub prefix: Vec<u32>,
    #[serde(with = "rational::serde_rational")]
    pub contraction: Rational,
    #[serde(with = "rational::serde_rational")]
    pub translation: Rational,
}

/// Raw Lalley–Gatzouras definition. The digit set is the set of prefixes of
/// length `dims`; every shorter prefix of a digit must carry its own node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LgInput {
    pub dims: usize,
    pub bases: Option<Vec<u32>>,
    pub nodes: Vec<LgNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LgViolation {
    NoCoordinates,
    PrefixLength {
        prefix: Vec<u32>,
    },
    DuplicatePrefix {
        prefix: Vec<u32>,
    },
    /// Two nodes for the same prefix disagree.
    InconsistentPrefix {
        prefix: Vec<u32>,
    },
    TooFewDigits {
        count: usize,
    },
    MissingPrefix {
        prefix: Vec<u32>,
    },
    DanglingPrefix {
        prefix: Vec<u32>,
    },
    BaseMismatch {
        coordinate: usize,
    },
    /// `0 < c < 1` fails.
    ContractionRange {
        prefix: Vec<u32>,
        contraction: String,
    },
    /// `c(prefix) >= c(prefix, i)` fails.
    NotMonotone {
        prefix: Vec<u32>,
    },
    /// Contractions of the children of `parent` sum above 1.
    SumExceedsOne {
        parent: Vec<u32>,
        sum: String,
    },
    /// `0 <= t < 1` fails.
    TranslationRange {
        prefix: Vec<u32>,
        translation: String,
    },
    /// `t_i + c_i <= t_j` (and `t_i < t_j`) fails for consecutive siblings.
    Overlap {
        left: Vec<u32>,
        right: Vec<u32>,
    },
    /// The last sibling leaves the unit interval: `t + c > 1`.
    ExceedsUnit {
        prefix: Vec<u32>,
    },
}

impl fmt::Display for LgViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use LgViolation::*;
        match self {
            NoCoordinates => write!(f, "dims must be at least 1"),
            PrefixLength { prefix } => write!(f, "prefix {prefix:?} has length outside 1..=dims"),
            DuplicatePrefix { prefix } => write!(f, "prefix {prefix:?} is defined twice"),
            InconsistentPrefix { prefix } => {
                write!(f, "prefix {prefix:?} is defined twice with different maps")
            }
            TooFewDigits { count } => {
                write!(
                    f,
                    "digit set has {count} element(s); at least 2 are required"
                )
            }
            MissingPrefix { prefix } => write!(f, "prefix {prefix:?} of a digit has no node"),
            DanglingPrefix { prefix } => {
                write!(f, "prefix {prefix:?} does not extend to a full digit")
            }
            BaseMismatch { coordinate } => {
                write!(
                    f,
                    "bases do not cover the digits in coordinate {coordinate}"
                )
            }
            ContractionRange {
                prefix,
                contraction,
            } => {
                write!(
                    f,
                    "contraction {contraction} of {prefix:?} is outside (0, 1)"
                )
            }
            NotMonotone { prefix } => write!(
                f,
                "contraction of {prefix:?} exceeds the contraction of its parent prefix"
            ),
            SumExceedsOne { parent, sum } => {
                write!(
                    f,
                    "contractions of the children of {parent:?} sum to {sum} > 1"
                )
            }
            TranslationRange {
                prefix,
                translation,
            } => {
                write!(
                    f,
                    "translation {translation} of {prefix:?} is outside [0, 1)"
                )
            }
            Overlap { left, right } => {
                write!(
                    f,
                    "images of {left:?} and {right:?} overlap: t + c exceeds the next t"
                )
            }
            ExceedsUnit { prefix } => write!(f, "image of {prefix:?} leaves the unit interval"),
        }
    }
}

/// Checks every packing and monotonicity condition, exactly.
pub fn validate_lg(input: &LgInput) -> ValidationReport<LgViolation> {
    let mut violations = Vec::new();
    let dims = input.dims;
    if dims == 0 {
        violations.push(LgViolation::NoCoordinates);
    }
    let mut maps: BTreeMap<Vec<u32>, (Rational, Rational)> = BTreeMap::new();
    for node in &input.nodes {
        if node.prefix.is_empty() || node.prefix.len() > dims {
            violations.push(LgViolation::PrefixLength {
                prefix: node.prefix.clone(),
            });
            continue;
        }
        let value = (node.contraction.clone(), node.translation.clone());
        match maps.get(&node.prefix) {
            Some(existing) if *existing == value => violations.push(LgViolation::DuplicatePrefix {
                prefix: node.prefix.clone(),
            }),
            Some(_) => violations.push(LgViolation::InconsistentPrefix {
                prefix: node.prefix.clone(),
            }),
            None => {
                maps.insert(node.prefix.clone(), value);
            }
        }
    }
    let digits: Vec<Digit> = maps.keys().filter(|p| p.len() == dims).cloned().collect();
    if digits.len() < 2 {
        violations.push(LgViolation::TooFewDigits {
            count: digits.len(),
        });
    }
    let mut required = BTreeSet::new();
    for digit in &digits {
        for len in 1..dims {
            required.insert(digit[..len].to_vec());
        }
    }
    for prefix in &required {
        if !maps.contains_key(prefix) {
            violations.push(LgViolation::MissingPrefix {
                prefix: prefix.clone(),
            });
        }
    }
    for prefix in maps.keys().filter(|p| p.len() < dims) {
        if !required.contains(prefix) {
            violations.push(LgViolation::DanglingPrefix {
                prefix: prefix.clone(),
            });
        }
    }
    if let Some(bases) = &input.bases {
        for coordinate in 0..dims {
            let ok = bases
                .get(coordinate)
                .is_some_and(|&n| n >= 2 && digits.iter().all(|d| d[coordinate] < n));
            if !ok {
                violations.push(LgViolation::BaseMismatch { coordinate });
            }
        }
    }

    for (prefix, (c, t)) in &maps {
        if !c.is_positive() || *c >= Rational::one() {
            violations.push(LgViolation::ContractionRange {
                prefix: prefix.clone(),
                contraction: format_rational(c),
            });
        }
        if t.is_negative() || *t >= Rational::one() {
            violations.push(LgViolation::TranslationRange {
                prefix: prefix.clone(),
                translation: format_rational(t),
            });
        }
        if prefix.len() > 1 {
            if let Some((parent_c, _)) = maps.get(&prefix[..prefix.len() - 1]) {
                if c > parent_c {
                    violations.push(LgViolation::NotMonotone {
                        prefix: prefix.clone(),
                    });
                }
            }
        }
    }

    // sibling groups keyed by parent prefix, siblings sorted by last digit
    type Sibling<'a> = (&'a Vec<u32>, &'a Rational, &'a Rational);
    let mut siblings: BTreeMap<Vec<u32>, Vec<Sibling>> = BTreeMap::new();
    for (prefix, (c, t)) in &maps {
        siblings
            .entry(prefix[..prefix.len() - 1].to_vec())
            .or_default()
            .push((prefix, c, t));
    }
    for (parent, group) in &siblings {
        let sum: Rational = group.iter().map(|(_, c, _)| (*c).clone()).sum();
        if sum > Rational::one() {
            violations.push(LgViolation::SumExceedsOne {
                parent: parent.clone(),
                sum: format_rational(&sum),
            });
        }
        for pair in group.windows(2) {
            let (left, c_left, t_left) = pair[0];
            let (right, _, t_right) = pair[1];
            if t_left >= t_right || &(t_left + c_left) > t_right {
                violations.push(LgViolation::Overlap {
                    left: left.clone(),
                    right: right.clone(),
                });
            }
        }
        if let Some((last, c, t)) = group.last() {
            if *t + *c > Rational::one() {
                violations.push(LgViolation::ExceedsUnit {
                    prefix: (*last).clone(),
                });
            }
        }
    }

    let warnings = if violations.is_empty() {
        hyperplane_warnings(dims, &digits)
    } else {
        Vec::new()
    };
    ValidationReport {
        violations,
        warnings,
    }
}

/// A validated Lalley–Gatzouras sponge.
///
/// Coordinates are clustered by identically equal contractions: coordinate
/// `l` joins the cluster of `l - 1` iff `c(i_1..i_l) == c(i_1..i_{l-1})` for
/// every digit.
#[derive(Debug, Clone)]
pub struct LgSponge {
    dims: usize,
    bases: Vec<u32>,
    digits: Vec<Digit>,
    maps: BTreeMap<Vec<u32>, (Rational, Rational)>,
    clusters: ClusterStructure,
    tree: DigitTree,
    contractions: Vec<Vec<Rational>>,
    translations: Vec<Vec<Rational>>,
}

impl LgSponge {
    pub fn new(input: LgInput) -> Result<Self, ValidationReport<LgViolation>> {
        let report = validate_lg(&input);
        if !report.is_ok() {
            return Err(report);
        }
        let dims = input.dims;
        let maps: BTreeMap<Vec<u32>, (Rational, Rational)> = input
            .nodes
            .into_iter()
            .map(|node| (node.prefix, (node.contraction, node.translation)))
            .collect();
        let digits: Vec<Digit> = maps.keys().filter(|p| p.len() == dims).cloned().collect();
        let bases = input.bases.unwrap_or_else(|| {
            (0..dims)
                .map(|l| digits.iter().map(|d| d[l] + 1).max().unwrap_or(2).max(2))
                .collect()
        });
        let contractions: Vec<Vec<Rational>> = digits
            .iter()
            .map(|d| (1..=dims).map(|len| maps[&d[..len]].0.clone()).collect())
            .collect();
        let translations = digits
            .iter()
            .map(|d| (1..=dims).map(|len| maps[&d[..len]].1.clone()).collect())
            .collect();
        let clusters = lg_cluster(dims, &contractions);
        let tree = DigitTree::build(&digits, &clusters);
        Ok(Self {
            dims,
            bases,
            digits,
            maps,
            clusters,
            tree,
            contractions,
            translations,
        })
    }

    /// Skeleton bases, used only to index digits.
    pub fn bases(&self) -> &[u32] {
        &self.bases
    }

    /// Contraction and translation of a prefix of some digit.
    pub fn map(&self, prefix: &[u32]) -> Option<&(Rational, Rational)> {
        self.maps.get(prefix)
    }

    /// Contraction of the last coordinate of `cluster` for `symbol`; constant
    /// across the cluster.
    pub fn cluster_contraction(&self, symbol: usize, cluster: usize) -> &Rational {
        &self.contractions[symbol][self.clusters.end(cluster) - 1]
    }

    /// Smallest full-depth contraction over `D`.
    pub fn min_contraction(&self) -> Rational {
        self.contractions
            .iter()
            .map(|row| row[self.dims - 1].clone())
            .min()
            .expect("digits")
    }

    pub fn to_input(&self) -> LgInput {
        LgInput {
            dims: self.dims,
            bases: Some(self.bases.clone()),
            nodes: self
                .maps
                .iter()
                .map(|(prefix, (c, t))| LgNode {
                    prefix: prefix.clone(),
                    contraction: c.clone(),
                    translation: t.clone(),
                })
                .collect(),
        }
    }
}

/// Merges consecutive coordinates whose contractions agree for every digit.
fn lg_cluster(dims: usize, contractions: &[Vec<Rational>]) -> ClusterStructure {
    let mut sizes: Vec<usize> = Vec::new();
    for l in 0..dims {
        let merge = l > 0 && contractions.iter().all(|row| row[l] == row[l - 1]);
        if merge {
            *sizes.last_mut().unwrap() += 1;
        } else {
            sizes.push(1);
        }
    }
    ClusterStructure::from_sizes(sizes, None)
}

impl SymbolicSponge for LgSponge {
    fn dims(&self) -> usize {
        self.dims
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

    fn contraction(&self, symbol: usize, coordinate: usize) -> &Rational {
        &self.contractions[symbol][coordinate]
    }

    fn translation(&self, symbol: usize, coordinate: usize) -> &Rational {
        &self.translations[symbol][coordinate]
    }

    fn max_scale(&self) -> Rational {
        self.min_contraction()
    }

    fn distortion_bound(&self) -> Rational {
        Rational::one() / self.min_contraction()
    }
}

/// Encodes a Bedford–McMullen sponge as a Lalley–Gatzouras one with
/// `c = 1/n_l` and `t = i_l/n_l` at every prefix.
pub fn uniform_grid_encoding(spec: &SpongeSpec) -> LgSponge {
    let bases = spec.bases();
    let mut nodes: BTreeMap<Vec<u32>, LgNode> = BTreeMap::new();
    for digit in spec.digits() {
        for len in 1..=digit.len() {
            let prefix = digit[..len].to_vec();
            let n = bases[len - 1] as i64;
            nodes.entry(prefix.clone()).or_insert_with(|| LgNode {
                prefix,
                contraction: rational::ratio(1, n),
                translation: rational::ratio(digit[len - 1] as i64, n),
            });
        }
    }
    LgSponge::new(LgInput {
        dims: bases.len(),
        bases: Some(bases.to_vec()),
        nodes: nodes.into_values().collect(),
    })
    .expect("grid encodings satisfy every packing condition")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::diagonal;
    use crate::rational::ratio;

    fn grid_input() -> LgInput {
        uniform_grid_encoding(&diagonal()).to_input()
    }

    fn set_node(input: &mut LgInput, prefix: &[u32], c: Option<Rational>, t: Option<Rational>) {
        let node = input
            .nodes
            .iter_mut()
            .find(|n| n.prefix == prefix)
            .expect("node exists");
        if let Some(c) = c {
            node.contraction = c;
        }
        if let Some(t) = t {
            node.translation = t;
        }
    }

    #[test]
    fn grid_encoding_is_valid_and_clusters_like_bm() {
        let input = grid_input();
        assert!(validate_lg(&input).is_ok());
        let lg = LgSponge::new(input).unwrap();
        assert_eq!(lg.clusters().sizes, diagonal().clusters().sizes);
        assert_eq!(lg.digits(), diagonal().digits());
    }

    #[test]
    fn detects_overlap_between_first_level_maps() {
        let mut input = grid_input();
        set_node(&mut input, &[1], None, Some(ratio(2, 5)));
        let report = validate_lg(&input);
        assert!(report.violations.contains(&LgViolation::Overlap {
            left: vec![0],
            right: vec![1]
        }));
    }

    #[test]
    fn detects_non_monotone_contractions() {
        let mut input = grid_input();
        set_node(&mut input, &[0], Some(ratio(3, 10)), None);
        set_node(&mut input, &[0, 0], Some(ratio(4, 10)), None);
        let report = validate_lg(&input);
        assert!(report
            .violations
            .contains(&LgViolation::NotMonotone { prefix: vec![0, 0] }));
    }

    #[test]
    fn detects_missing_and_dangling_prefixes() {
        let mut input = grid_input();
        input.nodes.retain(|n| n.prefix != [0, 1]);
        input.nodes.push(LgNode {
            prefix: vec![1, 2],
            contraction: ratio(1, 3),
            translation: ratio(2, 3),
        });
        let report = validate_lg(&input);
        assert!(report
            .violations
            .contains(&LgViolation::MissingPrefix { prefix: vec![0, 1] }));
        assert!(report
            .violations
            .contains(&LgViolation::DanglingPrefix { prefix: vec![1, 2] }));
    }

    #[test]
    fn detects_sum_and_unit_violations() {
        let mut input = grid_input();
        set_node(&mut input, &[1], Some(ratio(3, 5)), None);
        let report = validate_lg(&input);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, LgViolation::SumExceedsOne { parent, .. } if parent.is_empty())));
        assert!(report
            .violations
            .contains(&LgViolation::ExceedsUnit { prefix: vec![1] }));
    }

    #[test]
    fn keeps_coordinates_apart_when_one_prefix_differs() {
        // coordinate-3 contractions are 1/3 except below (0, 2), where they are 1/4
        let mut input = grid_input();
        set_node(&mut input, &[0, 2, 2], Some(ratio(1, 4)), None);
        let lg = LgSponge::new(input).unwrap();
        assert_eq!(lg.clusters().sizes, vec![1, 1, 1]);
    }

    #[test]
    fn one_dimensional_sponge_is_a_single_cluster() {
        let input = LgInput {
            dims: 1,
            bases: None,
            nodes: vec![
                LgNode {
                    prefix: vec![0],
                    contraction: ratio(1, 2),
                    translation: ratio(0, 1),
                },
                LgNode {
                    prefix: vec![1],
                    contraction: ratio(1, 4),
                    translation: ratio(3, 4),
                },
            ],
        };
        let lg = LgSponge::new(input).unwrap();
        assert_eq!(lg.clusters().sizes, vec![1]);
        assert_eq!(lg.bases(), &[2]);
    }
}
