//! Closed-form Assouad and lower dimensions.
//!
//! For a Bedford–McMullen sponge with clusters `J_1, ..., J_{d*}`:
//!
//! ```text
//! dim_A = log N / log n_1* + sum_{l >= 2} log max N(prefix) / log n_l*
//! ```
//!
//! with the maximum over prefixes in `D_{l-1}`; the lower dimension takes the
//! minimum instead. The per-coordinate variant treats every coordinate as its
//! own cluster, which is only correct when all bases differ. For
//! Lalley–Gatzouras sponges each `log N / log n` becomes a Moran exponent.

mod moran;

pub use moran::{moran_solve, MoranError, MoranSolution, MORAN_MAX_ITERATIONS, MORAN_TOLERANCE};

use crate::rational::to_f64;
use crate::sponge::{hyperplane_warnings, Digit, LgSponge, SpongeSpec, SymbolicSponge, Warning};
use itertools::Itertools;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormulaKind {
    /// Cluster-wise formula for Bedford–McMullen sponges.
    ClusteredBm,
    /// Cluster-wise Moran-exponent formula for Lalley–Gatzouras sponges.
    ClusteredLg,
    /// Coordinate-by-coordinate formula valid under strict ordering.
    PerCoordinate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Caveat {
    /// Equal bases make the per-coordinate formula depend on coordinate order.
    OrderDependent,
    /// Only one cluster; the comparison runs against a fixed coordinate order.
    SingleCluster,
    Hyperplane {
        coordinate: usize,
        value: u32,
    },
}

/// One summand of a dimension formula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterTerm {
    /// One-based cluster (or coordinate, for the per-coordinate formula) index.
    pub cluster: usize,
    pub max_term: f64,
    pub min_term: f64,
    pub argmax_prefix: Digit,
    pub argmin_prefix: Digit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub formula: FormulaKind,
    pub assouad: f64,
    pub lower: f64,
    pub per_cluster_terms: Vec<ClusterTerm>,
    pub caveats: Vec<Caveat>,
}

impl DimensionReport {
    fn from_terms(formula: FormulaKind, terms: Vec<ClusterTerm>, caveats: Vec<Caveat>) -> Self {
        Self {
            formula,
            assouad: terms.iter().map(|t| t.max_term).sum(),
            lower: terms.iter().map(|t| t.min_term).sum(),
            per_cluster_terms: terms,
            caveats,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DimensionError {
    #[error("Moran equation below prefix {prefix:?}: {source}")]
    Moran { prefix: Digit, source: MoranError },
}

fn hyperplane_caveats(dims: usize, digits: &[Digit]) -> Vec<Caveat> {
    hyperplane_warnings(dims, digits)
        .into_iter()
        .map(|Warning::Hyperplane { coordinate, value }| Caveat::Hyperplane { coordinate, value })
        .collect()
}

fn log_ratio(count: usize, base: u32) -> f64 {
    (count as f64).ln() / (base as f64).ln()
}

/// Cluster-wise Assouad and lower dimensions of a Bedford–McMullen sponge.
pub fn assouad_lower_bm(spec: &SpongeSpec) -> DimensionReport {
    let clusters = spec.clusters();
    let tree = spec.digit_tree();
    let bases = clusters
        .bases
        .as_ref()
        .expect("Bedford-McMullen clusters carry bases");
    let first = log_ratio(tree.root_count(), bases[0]);
    let mut terms = vec![ClusterTerm {
        cluster: 1,
        max_term: first,
        min_term: first,
        argmax_prefix: Vec::new(),
        argmin_prefix: Vec::new(),
    }];
    for (l, &base) in bases.iter().enumerate().take(clusters.count()).skip(1) {
        let ex = tree.extremes(l);
        terms.push(ClusterTerm {
            cluster: l + 1,
            max_term: log_ratio(ex.max, base),
            min_term: log_ratio(ex.min, base),
            argmax_prefix: ex.argmax,
            argmin_prefix: ex.argmin,
        });
    }
    let mut caveats = hyperplane_caveats(spec.dims(), spec.digits());
    if spec.is_single_cluster() {
        caveats.insert(0, Caveat::SingleCluster);
    }
    DimensionReport::from_terms(FormulaKind::ClusteredBm, terms, caveats)
}

/// Coordinate-by-coordinate formula evaluated in the canonical order, using
/// `N'(prefix)`, the number of distinct next single digits.
pub fn assouad_lower_old(spec: &SpongeSpec) -> DimensionReport {
    let counts = spec.per_coordinate_counts();
    let terms = spec
        .bases()
        .iter()
        .enumerate()
        .map(|(l, &base)| {
            let ex = counts.extremes(l);
            ClusterTerm {
                cluster: l + 1,
                max_term: log_ratio(ex.max, base),
                min_term: log_ratio(ex.min, base),
                argmax_prefix: ex.argmax,
                argmin_prefix: ex.argmin,
            }
        })
        .collect();
    let mut caveats = hyperplane_caveats(spec.dims(), spec.digits());
    if spec.has_weak_ordering() {
        caveats.insert(0, Caveat::OrderDependent);
    }
    DimensionReport::from_terms(FormulaKind::PerCoordinate, terms, caveats)
}

/// Range of the per-coordinate formula over every reordering of coordinates
/// inside clusters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderSpread {
    pub orders: usize,
    pub assouad_min: f64,
    pub assouad_max: f64,
    pub lower_min: f64,
    pub lower_max: f64,
}

pub fn old_formula_spread(spec: &SpongeSpec) -> OrderSpread {
    let clusters = spec.clusters();
    let orders: Vec<Vec<usize>> = (0..clusters.count())
        .map(|l| clusters.range(l).permutations(clusters.sizes[l]))
        .multi_cartesian_product()
        .map(|blocks| blocks.concat())
        .collect();
    let mut spread = OrderSpread {
        orders: orders.len(),
        assouad_min: f64::INFINITY,
        assouad_max: f64::NEG_INFINITY,
        lower_min: f64::INFINITY,
        lower_max: f64::NEG_INFINITY,
    };
    for order in &orders {
        let report = assouad_lower_old(&spec.reordered(order));
        spread.assouad_min = spread.assouad_min.min(report.assouad);
        spread.assouad_max = spread.assouad_max.max(report.assouad);
        spread.lower_min = spread.lower_min.min(report.lower);
        spread.lower_max = spread.lower_max.max(report.lower);
    }
    spread
}

/// Per-cluster comparison behind the equality condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterEquality {
    pub cluster: usize,
    /// `N` for the first cluster, otherwise `max N(prefix)`.
    pub clustered_max: usize,
    /// Product of the per-coordinate maxima `max N'` over the cluster's coordinates.
    pub coordinate_product: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropReport {
    pub assouad: f64,
    pub assouad_per_coordinate: f64,
    pub drop: f64,
    pub equality_condition_holds: bool,
    pub clusters: Vec<ClusterEquality>,
    pub caveats: Vec<Caveat>,
}

/// How far the per-coordinate formula overshoots the cluster-wise one, and
/// whether every cluster's maximal column count factors into the product of
/// per-coordinate maxima (checked exactly on integers).
pub fn dimension_drop(spec: &SpongeSpec) -> DropReport {
    let new = assouad_lower_bm(spec);
    let old = assouad_lower_old(spec);
    let counts = spec.per_coordinate_counts();
    let clusters = spec.clusters();
    let tree = spec.digit_tree();
    let rows: Vec<ClusterEquality> = (0..clusters.count())
        .map(|l| ClusterEquality {
            cluster: l + 1,
            clustered_max: if l == 0 {
                tree.root_count()
            } else {
                tree.extremes(l).max
            },
            coordinate_product: clusters
                .range(l)
                .map(|k| counts.extremes(k).max as u64)
                .product(),
        })
        .collect();
    let holds = rows
        .iter()
        .all(|row| row.clustered_max as u64 == row.coordinate_product);
    let mut caveats = old.caveats.clone();
    if spec.is_single_cluster() {
        caveats.push(Caveat::SingleCluster);
    }
    DropReport {
        assouad: new.assouad,
        assouad_per_coordinate: old.assouad,
        drop: old.assouad - new.assouad,
        equality_condition_holds: holds,
        clusters: rows,
        caveats,
    }
}

/// Moran exponents of every node of the clustered digit tree.
///
/// `by_level[0]` holds the single exponent `s` of `pi_1 D` under the empty
/// prefix; `by_level[l]` maps each prefix in `D_l` to `s(prefix)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoranExponents {
    pub by_level: Vec<BTreeMap<Digit, MoranSolution>>,
}

impl MoranExponents {
    pub fn root(&self) -> &MoranSolution {
        &self.by_level[0][&Vec::new()]
    }

    pub fn get(&self, prefix: &[u32]) -> Option<&MoranSolution> {
        self.by_level.iter().find_map(|level| level.get(prefix))
    }
}

/// Solves the Moran equation of every prefix over the contractions of its
/// next-cluster children.
pub fn lg_exponents(sponge: &LgSponge) -> Result<MoranExponents, DimensionError> {
    let tree = sponge.digit_tree();
    let by_level = (0..tree.level_count())
        .map(|level| {
            tree.level(level)
                .iter()
                .map(|(prefix, children)| {
                    let ratios: Vec<f64> = children
                        .iter()
                        .map(|block| {
                            let full = [prefix.as_slice(), block.as_slice()].concat();
                            to_f64(&sponge.map(&full).expect("prefix of a digit").0)
                        })
                        .collect();
                    moran_solve(&ratios)
                        .map(|sol| (prefix.clone(), sol))
                        .map_err(|source| DimensionError::Moran {
                            prefix: prefix.clone(),
                            source,
                        })
                })
                .collect::<Result<BTreeMap<_, _>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MoranExponents { by_level })
}

/// Cluster-wise Assouad and lower dimensions of a Lalley–Gatzouras sponge.
pub fn assouad_lower_lg(sponge: &LgSponge) -> Result<DimensionReport, DimensionError> {
    let exponents = lg_exponents(sponge)?;
    Ok(lg_report(sponge, &exponents))
}

pub(crate) fn lg_report(sponge: &LgSponge, exponents: &MoranExponents) -> DimensionReport {
    let terms = exponents
        .by_level
        .iter()
        .enumerate()
        .map(|(level, solutions)| {
            let mut iter = solutions.iter();
            let (first_prefix, first) = iter.next().expect("nonempty level");
            let mut term = ClusterTerm {
                cluster: level + 1,
                max_term: first.exponent,
                min_term: first.exponent,
                argmax_prefix: first_prefix.clone(),
                argmin_prefix: first_prefix.clone(),
            };
            for (prefix, sol) in iter {
                if sol.exponent > term.max_term {
                    term.max_term = sol.exponent;
                    term.argmax_prefix = prefix.clone();
                }
                if sol.exponent < term.min_term {
                    term.min_term = sol.exponent;
                    term.argmin_prefix = prefix.clone();
                }
            }
            term
        })
        .collect();
    let mut caveats = hyperplane_caveats(sponge.dims(), sponge.digits());
    if sponge.clusters().count() == 1 {
        caveats.insert(0, Caveat::SingleCluster);
    }
    DimensionReport::from_terms(FormulaKind::ClusteredLg, terms, caveats)
}
