use super::{
    cluster_prefractal, hausdorff_distance, omega_r_bm, Axis, BoxSet, HausdorffBounds,
    HausdorffOptions, OmegaWord, TangentError,
};
use crate::rational::{self, Rational};
use crate::sponge::{SpongeSpec, SymbolicSponge};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Default number of free symbols resolved past `k_1*(R)`.
pub const DEFAULT_EXTRA_DEPTH: u32 = 2;

/// Resolution of the zoomed picture at scale `R`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZoomPlan {
    pub omega: OmegaWord,
    /// Free symbols after `k_1*(R)`.
    pub extra_depth: u32,
    /// `M = k_1*(R) + e`, the word length resolved.
    pub word_length: usize,
    /// `k_{l-1}*(R) - k_l*(R)` per cluster; entry 0 is unused (0).
    pub gaps: Vec<usize>,
}

impl ZoomPlan {
    pub fn new(
        spec: &SpongeSpec,
        big_r: &Rational,
        extra_depth: u32,
    ) -> Result<Self, TangentError> {
        let omega = omega_r_bm(spec, big_r)?;
        let k = &omega.depths.clusters;
        let gaps = (0..k.len())
            .map(|l| if l == 0 { 0 } else { k[l - 1] - k[l] })
            .collect();
        Ok(Self {
            word_length: k[0] + extra_depth as usize,
            omega,
            extra_depth,
            gaps,
        })
    }

    fn cluster_depth(&self, l: usize) -> usize {
        self.omega.depths.clusters[l]
    }
}

fn per_coordinate_axes(spec: &SpongeSpec, depth_of_cluster: impl Fn(usize) -> u32) -> Vec<Axis> {
    let clusters = spec.clusters();
    (0..spec.dims())
        .map(|j| {
            let l = clusters.cluster_of[j];
            Axis::new(spec.bases()[j], depth_of_cluster(l))
        })
        .collect()
}

fn argmax_prefix(spec: &SpongeSpec, level: usize) -> Vec<u32> {
    if level == 0 {
        Vec::new()
    } else {
        spec.digit_tree().extremes(level).argmax
    }
}

/// `prod_l K_l^{depth(l)}` with `K_0 = pi_1 K` and `K_l` the fibre over the
/// maximizing level-`l` prefix.
fn cluster_product(
    spec: &SpongeSpec,
    depth: impl Fn(usize) -> u32,
    budget: u64,
) -> Result<BoxSet, TangentError> {
    let mut out: Option<BoxSet> = None;
    for l in 0..spec.clusters().count() {
        let factor = cluster_prefractal(spec, l, &argmax_prefix(spec, l), depth(l), budget)?;
        out = Some(match out {
            None => factor,
            Some(acc) => acc.product(&factor, budget)?,
        });
    }
    Ok(out.expect("at least one cluster"))
}

/// `T^Q(tau(Q))` for `Q = Q(omega(R), R)`, resolved to words of length `M`:
/// every word of length `M` whose truncation agrees with `Q`, zoomed. A
/// coordinate of cluster `l` keeps the digits at positions `k_l*(R) .. M`.
pub fn zoomed_set(spec: &SpongeSpec, plan: &ZoomPlan, budget: u64) -> Result<BoxSet, TangentError> {
    let clusters = spec.clusters();
    let depths = &plan.omega.depths;
    let axes = per_coordinate_axes(spec, |l| (plan.word_length - plan.cluster_depth(l)) as u32);
    for axis in &axes {
        axis.cells()?;
    }
    let start = *depths.clusters.last().expect("clusters");
    let mut cells: BTreeSet<Vec<u64>> = BTreeSet::from([vec![0; spec.dims()]]);
    for t in start..plan.word_length {
        let alive = depths.clusters_alive(t);
        let fixed_end = if alive == 0 {
            0
        } else {
            clusters.end(alive - 1)
        };
        let anchor = &spec.digits()[plan.omega.word.symbol(t).expect("infinite word")];
        let allowed: Vec<&Vec<u32>> = spec
            .digits()
            .iter()
            .filter(|d| d[..fixed_end] == anchor[..fixed_end])
            .collect();
        let needed = cells.len() as f64 * allowed.len() as f64;
        if needed > budget as f64 {
            return Err(TangentError::BudgetExceeded { needed, budget });
        }
        let live: Vec<usize> = (0..spec.dims())
            .filter(|&j| plan.cluster_depth(clusters.cluster_of[j]) <= t)
            .collect();
        cells = cells
            .iter()
            .flat_map(|cell| {
                let live = &live;
                allowed.iter().map(move |digit| {
                    let mut next = cell.clone();
                    for &j in live {
                        next[j] = next[j] * spec.bases()[j] as u64 + digit[j] as u64;
                    }
                    next
                })
            })
            .collect();
    }
    BoxSet::new(axes, cells)
}

/// `pi_1 K^e x prod_{l>=2} K_l^{k_{l-1}* - k_l*}`, the set the zoomed cube
/// must lie in.
pub fn containment_target(
    spec: &SpongeSpec,
    plan: &ZoomPlan,
    budget: u64,
) -> Result<BoxSet, TangentError> {
    cluster_product(
        spec,
        |l| {
            if l == 0 {
                plan.extra_depth
            } else {
                plan.gaps[l] as u32
            }
        },
        budget,
    )
}

/// `K^ = pi_1 K x prod K_l`, resolved at the zoomed set's resolution
/// (depth `M - k_l*` on cluster `l`).
pub fn tangent_product(
    spec: &SpongeSpec,
    plan: &ZoomPlan,
    budget: u64,
) -> Result<BoxSet, TangentError> {
    cluster_product(
        spec,
        |l| (plan.word_length - plan.cluster_depth(l)) as u32,
        budget,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainmentReport {
    pub scale: String,
    pub cluster_depths: Vec<usize>,
    pub gaps: Vec<usize>,
    pub extra_depth: u32,
    pub zoomed_boxes: usize,
    pub target_boxes: usize,
    pub contained: bool,
    /// First zoomed box outside the target, as grid indices.
    pub witness: Option<Vec<u64>>,
}

/// Checks box by box (exact integer grid containment) that the zoomed cube
/// lies inside the product of cluster pre-fractals.
pub fn containment_check(
    spec: &SpongeSpec,
    big_r: &Rational,
    extra_depth: u32,
    budget: u64,
) -> Result<ContainmentReport, TangentError> {
    let plan = ZoomPlan::new(spec, big_r, extra_depth)?;
    let zoomed = zoomed_set(spec, &plan, budget)?;
    let target = containment_target(spec, &plan, budget)?;
    let target = reorder_to_coordinates(spec, &target)?;
    let missing = zoomed.uncovered_by(&target)?;
    Ok(ContainmentReport {
        scale: rational::format_rational(big_r),
        cluster_depths: plan.omega.depths.clusters.clone(),
        gaps: plan.gaps.clone(),
        extra_depth,
        zoomed_boxes: zoomed.len(),
        target_boxes: target.len(),
        contained: missing.is_empty(),
        witness: missing.into_iter().next(),
    })
}

/// Cluster products list coordinates cluster by cluster, which is already the
/// canonical coordinate order; this only re-validates the axes.
fn reorder_to_coordinates(spec: &SpongeSpec, set: &BoxSet) -> Result<BoxSet, TangentError> {
    if set.dims() != spec.dims()
        || set
            .axes()
            .iter()
            .zip(spec.bases())
            .any(|(a, &b)| a.base != b)
    {
        return Err(TangentError::AxisMismatch);
    }
    Ok(set.clone())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub scale: String,
    pub cluster_depths: Vec<usize>,
    pub gaps: Vec<usize>,
    pub extra_depth: u32,
    pub zoomed_boxes: usize,
    pub product_boxes: usize,
    pub distance: HausdorffBounds,
    /// The zoomed set lies inside the containment target at this stage.
    pub contained: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub extra_depth: u32,
    pub budget: u64,
    pub hausdorff: HausdorffOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            extra_depth: DEFAULT_EXTRA_DEPTH,
            budget: 10_000_000,
            hausdorff: HausdorffOptions::default(),
        }
    }
}

/// One sweep row; lowers the extra depth until both sets fit the budget.
fn sweep_row(
    spec: &SpongeSpec,
    big_r: &Rational,
    options: &SweepOptions,
) -> Result<SweepRow, TangentError> {
    let mut last_error = None;
    for extra_depth in (0..=options.extra_depth).rev() {
        let plan = ZoomPlan::new(spec, big_r, extra_depth)?;
        let sets = zoomed_set(spec, &plan, options.budget)
            .and_then(|z| tangent_product(spec, &plan, options.budget).map(|p| (z, p)));
        let (zoomed, product) = match sets {
            Ok(sets) => sets,
            Err(err @ TangentError::BudgetExceeded { .. }) => {
                last_error = Some(err);
                continue;
            }
            Err(err) => return Err(err),
        };
        let target = containment_target(spec, &plan, options.budget)?;
        let distance =
            hausdorff_distance(&zoomed.to_aabbs(), &product.to_aabbs(), options.hausdorff)?;
        return Ok(SweepRow {
            scale: rational::format_rational(big_r),
            cluster_depths: plan.omega.depths.clusters.clone(),
            gaps: plan.gaps.clone(),
            extra_depth,
            zoomed_boxes: zoomed.len(),
            product_boxes: product.len(),
            distance,
            contained: zoomed.uncovered_by(&target)?.is_empty(),
        });
    }
    Err(last_error.expect("at least one extra depth was tried"))
}

/// `d_H(K^, T^Q(tau(Q(omega(R), R))))` for each scale, in the given order.
pub fn convergence_sweep(
    spec: &SpongeSpec,
    scales: &[Rational],
    options: &SweepOptions,
) -> Result<Vec<SweepRow>, TangentError> {
    scales
        .iter()
        .map(|big_r| sweep_row(spec, big_r, options))
        .collect()
}

/// Whether certified distances never increase along the sweep: each upper
/// bound is at most the previous lower bound plus the tolerance.
pub fn is_nonincreasing(rows: &[SweepRow], tolerance: f64) -> bool {
    rows.windows(2)
        .all(|w| w[1].distance.upper <= w[0].distance.lower + tolerance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{augmented, diagonal, four_corners};
    use crate::rational::inv_pow;

    #[test]
    fn product_box_counts() {
        let spec = diagonal();
        let plan = ZoomPlan::new(&spec, &inv_pow(3, 4), 1).unwrap();
        assert_eq!(plan.gaps, vec![0, 2]);
        let target = containment_target(&spec, &plan, 1_000_000).unwrap();
        assert_eq!(target.len(), 2 * 9);
        let product = tangent_product(&spec, &plan, 1_000_000).unwrap();
        // M - k_2* = 7 - 4 = 3
        assert_eq!(product.len(), 2 * 27);
        let single = four_corners();
        let plan = ZoomPlan::new(&single, &inv_pow(2, 3), 2).unwrap();
        assert_eq!(tangent_product(&single, &plan, 1_000).unwrap().len(), 16);
    }

    #[test]
    fn containment_on_catalog() {
        for spec in [diagonal(), augmented()] {
            for e in 4..=6 {
                let report =
                    containment_check(&spec, &inv_pow(3, e), DEFAULT_EXTRA_DEPTH, 10_000_000)
                        .unwrap();
                assert!(report.contained, "{report:?}");
                assert!(report.witness.is_none());
            }
        }
        let trivial =
            containment_check(&diagonal(), &Rational::from_integer(1.into()), 1, 1_000).unwrap();
        assert!(trivial.contained);
    }

    #[test]
    fn a_non_maximizing_word_can_escape() {
        // zooming into the i_1 = 1 column (a single block) is contained in its own
        // fibre, but not in the fibre over the maximizing prefix
        let spec = diagonal();
        let plan = ZoomPlan::new(&spec, &inv_pow(3, 4), 1).unwrap();
        let zoomed = zoomed_set(&spec, &plan, 1_000_000).unwrap();
        let k2 = plan.omega.depths.clusters[1];
        let one = spec.symbol_of(&[1, 0, 1]).unwrap();
        let mut head = plan.omega.word.prefix(plan.word_length).unwrap();
        for symbol in &mut head[k2..plan.omega.depths.clusters[0]] {
            *symbol = one;
        }
        let mut shifted = plan.clone();
        shifted.omega.word = crate::measure::Word::finite(head);
        let other = zoomed_set(&spec, &shifted, 1_000_000).unwrap();
        let target = containment_target(&spec, &plan, 1_000_000).unwrap();
        assert!(zoomed.uncovered_by(&target).unwrap().is_empty());
        assert!(!other.uncovered_by(&target).unwrap().is_empty());
    }

    #[test]
    fn short_sweep_decreases() {
        let spec = diagonal();
        let rows = convergence_sweep(
            &spec,
            &[inv_pow(3, 4), inv_pow(3, 6)],
            &SweepOptions::default(),
        )
        .unwrap();
        assert!(rows.iter().all(|r| r.contained && r.distance.converged));
        assert!(is_nonincreasing(&rows, 1e-9), "{rows:?}");
    }

    #[test]
    fn budget_lowers_the_extra_depth() {
        let spec = diagonal();
        let options = SweepOptions {
            extra_depth: 6,
            budget: 5_000,
            ..SweepOptions::default()
        };
        let rows = convergence_sweep(&spec, &[inv_pow(3, 4)], &options).unwrap();
        assert!(rows[0].extra_depth < 6);
        let tiny = SweepOptions {
            budget: 1,
            ..SweepOptions::default()
        };
        assert!(matches!(
            convergence_sweep(&spec, &[inv_pow(3, 4)], &tiny),
            Err(TangentError::BudgetExceeded { .. })
        ));
    }
}
