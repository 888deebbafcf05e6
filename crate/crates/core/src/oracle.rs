//! Covering-count oracle for Bedford–McMullen sponges.
//!
//! Scales are anchored at powers of `n_1`: the anchor cube sits at
//! `R = n_1^-k` and its sub-cubes at `r = n_1^-(k+m)`. Symbol `t` of a word is
//! constrained in the first `L_R(t)` clusters by the anchor and in the first
//! `L_r(t)` clusters by a sub-cube, so the number of sub-cubes inside an anchor
//! factors over positions into descendant counts of the digit tree. Positions
//! are independent, which makes the extreme counts products of per-level
//! extremes.

use crate::measure::{depths_bm, Depths};
use crate::rational::inv_pow;
use crate::sponge::{Digit, SpongeSpec, SymbolicSponge};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("work estimate {needed} exceeds the budget of {budget}")]
    BudgetExceeded { needed: f64, budget: u64 },
    #[error("need at least 3 refinement levels, got {0}")]
    InsufficientData(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubcubeCount {
    pub max_count: u128,
    pub min_count: u128,
}

/// Extreme numbers of level-`b` descendants over nodes at level `a <= b`.
///
/// Level `a` holds prefixes covering the first `a` clusters, so level 0 is the root.
#[derive(Debug, Clone)]
pub struct DescendantExtremes {
    table: BTreeMap<(usize, usize), (u128, u128)>,
}

impl DescendantExtremes {
    pub fn build(spec: &SpongeSpec) -> Self {
        let clusters = spec.clusters();
        let levels = clusters.count();
        let mut table = BTreeMap::new();
        // counts[b][prefix at level a] = number of distinct level-b prefixes below it
        for b in 0..=levels {
            let end = if b == 0 { 0 } else { clusters.end(b - 1) };
            let at_b: BTreeSet<&[u32]> = spec.digits().iter().map(|d| &d[..end]).collect();
            let mut memo: BTreeMap<&[u32], u128> = at_b.iter().map(|p| (*p, 1)).collect();
            for a in (0..=b).rev() {
                if a < b {
                    let start = if a == 0 { 0 } else { clusters.end(a - 1) };
                    let mut next: BTreeMap<&[u32], u128> = BTreeMap::new();
                    for (prefix, count) in &memo {
                        *next.entry(&prefix[..start]).or_default() += count;
                    }
                    memo = next;
                }
                let max = memo.values().copied().max().expect("nonempty level");
                let min = memo.values().copied().min().expect("nonempty level");
                table.insert((a, b), (max, min));
            }
        }
        Self { table }
    }

    pub fn get(&self, a: usize, b: usize) -> (u128, u128) {
        self.table[&(a, b)]
    }
}

fn anchored_depths(spec: &SpongeSpec, k: usize) -> Depths {
    depths_bm(spec, &inv_pow(spec.bases()[0], k as u32)).expect("powers of n_1 lie in (0, 1]")
}

/// Extreme counts of depth-`(k+m)` approximate cubes inside a depth-`k` one.
pub fn subcube_counts(spec: &SpongeSpec, k: usize, m: usize) -> SubcubeCount {
    subcube_counts_with(spec, &DescendantExtremes::build(spec), k, m)
}

fn subcube_counts_with(
    spec: &SpongeSpec,
    extremes: &DescendantExtremes,
    k: usize,
    m: usize,
) -> SubcubeCount {
    let coarse = anchored_depths(spec, k);
    let fine = anchored_depths(spec, k + m);
    let mut out = SubcubeCount {
        max_count: 1,
        min_count: 1,
    };
    for t in 0..fine.max() {
        let (max, min) = extremes.get(coarse.clusters_alive(t), fine.clusters_alive(t));
        out.max_count = out.max_count.saturating_mul(max);
        out.min_count = out.min_count.saturating_mul(min);
    }
    out
}

fn truncate(spec: &SpongeSpec, depths: &Depths, word: &[usize]) -> Vec<Digit> {
    let clusters = spec.clusters();
    word.iter()
        .enumerate()
        .take(depths.max())
        .map(|(t, &s)| {
            let alive = depths.clusters_alive(t);
            let end = if alive == 0 {
                0
            } else {
                clusters.end(alive - 1)
            };
            spec.digits()[s][..end].to_vec()
        })
        .collect()
}

/// The same counts by enumerating every word of length `k + m` and grouping
/// the fine cube keys under their anchor keys.
pub fn naive_subcube_counts(
    spec: &SpongeSpec,
    k: usize,
    m: usize,
    budget: u64,
) -> Result<SubcubeCount, OracleError> {
    let coarse = anchored_depths(spec, k);
    let fine = anchored_depths(spec, k + m);
    let length = fine.max();
    let symbols = spec.digits().len();
    let needed = (symbols as f64).powi(length as i32);
    if needed > budget as f64 {
        return Err(OracleError::BudgetExceeded { needed, budget });
    }
    let mut groups: BTreeMap<Vec<Digit>, BTreeSet<Vec<Digit>>> = BTreeMap::new();
    let mut word = vec![0usize; length];
    loop {
        groups
            .entry(truncate(spec, &coarse, &word))
            .or_default()
            .insert(truncate(spec, &fine, &word));
        // odometer increment
        let mut i = length;
        loop {
            if i == 0 {
                let sizes = groups.values().map(|set| set.len() as u128);
                let max_count = sizes.clone().max().unwrap_or(1);
                let min_count = sizes.min().unwrap_or(1);
                return Ok(SubcubeCount {
                    max_count,
                    min_count,
                });
            }
            i -= 1;
            word[i] += 1;
            if word[i] < symbols {
                break;
            }
            word[i] = 0;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountRow {
    pub k: usize,
    pub m: usize,
    pub max_count: u128,
    pub min_count: u128,
    /// Slope of `ln max_count` against `ln(R/r)` from the previous row; absent on the first.
    pub incremental_slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountTable {
    pub base: u32,
    pub rows: Vec<CountRow>,
}

impl CountTable {
    pub const CSV_HEADER: &'static str = "k,m,max_count,min_count,incremental_slope";

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for row in &self.rows {
            let slope = row
                .incremental_slope
                .map(|s| format!("{s:.10}"))
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                row.k, row.m, row.max_count, row.min_count, slope
            ));
        }
        out
    }
}

/// Counts for anchor depth `k` over the refinements `ms` (in the given order).
pub fn count_table(spec: &SpongeSpec, k: usize, ms: &[usize]) -> CountTable {
    let extremes = DescendantExtremes::build(spec);
    let ln_base = (spec.bases()[0] as f64).ln();
    let mut rows: Vec<CountRow> = Vec::with_capacity(ms.len());
    for &m in ms {
        let counts = subcube_counts_with(spec, &extremes, k, m);
        let incremental_slope = rows.last().filter(|prev| prev.m != m).map(|prev| {
            ((counts.max_count as f64).ln() - (prev.max_count as f64).ln())
                / ((m as f64 - prev.m as f64) * ln_base)
        });
        rows.push(CountRow {
            k,
            m,
            max_count: counts.max_count,
            min_count: counts.min_count,
            incremental_slope,
        });
    }
    CountTable {
        base: spec.bases()[0],
        rows,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub assouad_estimate: f64,
    pub lower_estimate: f64,
    pub assouad_intercept: f64,
    pub lower_intercept: f64,
    pub assouad_residuals: Vec<f64>,
    pub lower_residuals: Vec<f64>,
    pub incremental_slopes: Vec<f64>,
}

fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64, Vec<f64>) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| y - (intercept + slope * x))
        .collect();
    (slope, intercept, residuals)
}

/// Least-squares slopes of `ln max_count` and `ln min_count` against
/// `ln(R/r) = m ln n_1`.
pub fn fit_exponent(table: &CountTable) -> Result<FitReport, OracleError> {
    let distinct: BTreeSet<usize> = table.rows.iter().map(|row| row.m).collect();
    if distinct.len() < 3 {
        return Err(OracleError::InsufficientData(distinct.len()));
    }
    let ln_base = (table.base as f64).ln();
    let xs: Vec<f64> = table
        .rows
        .iter()
        .map(|row| row.m as f64 * ln_base)
        .collect();
    let max_ys: Vec<f64> = table
        .rows
        .iter()
        .map(|row| (row.max_count as f64).ln())
        .collect();
    let min_ys: Vec<f64> = table
        .rows
        .iter()
        .map(|row| (row.min_count as f64).ln())
        .collect();
    let (assouad_estimate, assouad_intercept, assouad_residuals) = ols(&xs, &max_ys);
    let (lower_estimate, lower_intercept, lower_residuals) = ols(&xs, &min_ys);
    Ok(FitReport {
        assouad_estimate,
        lower_estimate,
        assouad_intercept,
        lower_intercept,
        assouad_residuals,
        lower_residuals,
        incremental_slopes: table
            .rows
            .iter()
            .filter_map(|row| row.incremental_slope)
            .collect(),
    })
}

/// Anchor depth large enough that every coarser cluster is still alive
/// throughout the refinement window for `m <= m_max`.
pub fn default_anchor(spec: &SpongeSpec, m_max: usize) -> usize {
    let bases = spec.bases();
    let ratio = (bases[0] as f64).ln() / (*bases.last().expect("coordinates") as f64).ln();
    if ratio >= 1.0 {
        return m_max;
    }
    // need k > ratio (k + m): k > ratio m / (1 - ratio)
    ((ratio * m_max as f64) / (1.0 - ratio)).floor() as usize + m_max + 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{augmented, diagonal, four_corners};
    use proptest::prelude::*;

    #[test]
    fn first_refinement_of_diagonal() {
        // R = 1, r = 1/2: depths (1, 0, 0), so only the first digit varies
        let counts = subcube_counts(&diagonal(), 0, 1);
        assert_eq!(
            counts,
            SubcubeCount {
                max_count: 2,
                min_count: 2
            }
        );
        assert_eq!(
            naive_subcube_counts(&diagonal(), 0, 1, 1_000).unwrap(),
            counts
        );
    }

    #[test]
    fn single_cluster_counts_are_powers() {
        let spec = four_corners();
        for (k, m) in [(0, 3), (2, 2), (4, 1)] {
            let c = subcube_counts(&spec, k, m);
            assert_eq!(c.max_count, 4u128.pow(m as u32));
            assert_eq!(c.min_count, c.max_count);
        }
        let fit = fit_exponent(&count_table(&spec, 3, &[1, 2, 3, 4])).unwrap();
        assert!((fit.assouad_estimate - 2.0).abs() < 1e-9);
    }

    #[test]
    fn fits_approach_formula_values() {
        let ms: Vec<usize> = (4..=10).collect();
        for (spec, target) in [
            (diagonal(), 2.0),
            (augmented(), 1.0 + 4f64.ln() / 3f64.ln()),
        ] {
            let table = count_table(&spec, default_anchor(&spec, 10), &ms);
            let fit = fit_exponent(&table).unwrap();
            assert!(
                (fit.assouad_estimate - target).abs() < 0.2,
                "{} vs {target}",
                fit.assouad_estimate
            );
        }
    }

    #[test]
    fn too_few_levels() {
        let table = count_table(&diagonal(), 4, &[1, 2]);
        assert_eq!(fit_exponent(&table), Err(OracleError::InsufficientData(2)));
        assert!(naive_subcube_counts(&augmented(), 0, 30, 1_000).is_err());
    }

    #[test]
    fn dp_matches_enumeration_on_catalog() {
        for spec in [diagonal(), augmented(), four_corners()] {
            for k in 0..=3 {
                for m in 0..=(4 - k) {
                    assert_eq!(
                        subcube_counts(&spec, k, m),
                        naive_subcube_counts(&spec, k, m, 1_000_000).unwrap(),
                        "k={k} m={m}"
                    );
                }
            }
        }
    }

    proptest! {
        #[test]
        fn counts_grow_with_refinement(k in 0usize..12, m in 0usize..12) {
            for spec in [diagonal(), augmented()] {
                let a = subcube_counts(&spec, k, m);
                let b = subcube_counts(&spec, k, m + 1);
                prop_assert!(a.min_count >= 1 && a.max_count >= a.min_count);
                prop_assert!(b.max_count >= a.max_count);
            }
        }
    }
}
