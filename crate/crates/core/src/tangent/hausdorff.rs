//! Euclidean Hausdorff distance between finite unions of boxes.
//!
//! `h(A, B) = max_{a in A} min_j d(a, B_j)` has no closed form for unions:
//! the farthest point can sit where two boxes of `B` are equidistant. Pieces
//! of `A` are refined best-first. For a piece `P`:
//!
//! * `min_j max_{a in P} d(a, B_j)` bounds `max_{a in P} d(a, B)` from above,
//!   and each inner maximum is exact (attained at a corner of `P`);
//! * `d(a, B)` at the centre of `P` and at that far corner bounds it from below.
//!
//! Boxes of `B` farther from `P` than its upper bound cannot be nearest to any
//! point of `P` and are dropped from its children's candidate lists.

use super::{Aabb, TangentError};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HausdorffOptions {
    /// Stop once `upper - lower` is at most this.
    pub tolerance: f64,
    /// Refinement cap per direction; bounds stay valid when it is hit.
    pub max_pieces: usize,
}

impl Default for HausdorffOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_pieces: 2_000_000,
        }
    }
}

/// Certified bracket `lower <= d_H <= upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HausdorffBounds {
    pub lower: f64,
    pub upper: f64,
    pub pieces: usize,
    pub converged: bool,
}

impl HausdorffBounds {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    fn max(self, other: Self) -> Self {
        Self {
            lower: self.lower.max(other.lower),
            upper: self.upper.max(other.upper),
            pieces: self.pieces + other.pieces,
            converged: self.converged && other.converged,
        }
    }
}

fn axis_gap(x: f64, lo: f64, hi: f64) -> f64 {
    (lo - x).max(x - hi).max(0.0)
}

fn point_dist2(p: &[f64], b: &Aabb) -> f64 {
    p.iter()
        .enumerate()
        .map(|(l, &x)| axis_gap(x, b.min[l], b.max[l]).powi(2))
        .sum()
}

/// `min_{a in P} d(a, B)^2`.
fn box_dist2(p: &Aabb, b: &Aabb) -> f64 {
    (0..p.dims())
        .map(|l| {
            (b.min[l] - p.max[l])
                .max(p.min[l] - b.max[l])
                .max(0.0)
                .powi(2)
        })
        .sum()
}

/// `max_{a in P} d(a, B)^2` and the corner of `P` attaining it.
fn farthest(p: &Aabb, b: &Aabb) -> (f64, Vec<f64>) {
    let mut total = 0.0;
    let corner = (0..p.dims())
        .map(|l| {
            let lo = axis_gap(p.min[l], b.min[l], b.max[l]);
            let hi = axis_gap(p.max[l], b.min[l], b.max[l]);
            if lo > hi {
                total += lo * lo;
                p.min[l]
            } else {
                total += hi * hi;
                p.max[l]
            }
        })
        .collect();
    (total, corner)
}

struct Piece {
    aabb: Aabb,
    candidates: Vec<u32>,
    upper2: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.upper2 == other.upper2
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.upper2.total_cmp(&other.upper2)
    }
}

/// Squared bounds for one piece plus its pruned candidate list.
fn evaluate(aabb: Aabb, candidates: &[u32], b: &[Aabb]) -> (Piece, f64) {
    let mut best = f64::INFINITY;
    let mut best_corner = Vec::new();
    for &j in candidates {
        let (far2, corner) = farthest(&aabb, &b[j as usize]);
        if far2 < best {
            best = far2;
            best_corner = corner;
        }
    }
    let kept: Vec<u32> = candidates
        .iter()
        .copied()
        .filter(|&j| box_dist2(&aabb, &b[j as usize]) <= best)
        .collect();
    let nearest2 = |p: &[f64]| {
        kept.iter()
            .map(|&j| point_dist2(p, &b[j as usize]))
            .fold(f64::INFINITY, f64::min)
    };
    let center: Vec<f64> = aabb
        .min
        .iter()
        .zip(&aabb.max)
        .map(|(lo, hi)| 0.5 * (lo + hi))
        .collect();
    let lower2 = nearest2(&center).max(nearest2(&best_corner));
    (
        Piece {
            aabb,
            candidates: kept,
            upper2: best,
        },
        lower2,
    )
}

fn split(aabb: &Aabb) -> Option<(Aabb, Aabb)> {
    let (axis, width) = (0..aabb.dims())
        .map(|l| (l, aabb.max[l] - aabb.min[l]))
        .max_by(|x, y| x.1.total_cmp(&y.1))?;
    if width <= 0.0 {
        return None;
    }
    let mid = aabb.min[axis] + 0.5 * width;
    if mid <= aabb.min[axis] || mid >= aabb.max[axis] {
        return None;
    }
    let mut left = aabb.clone();
    let mut right = aabb.clone();
    left.max[axis] = mid;
    right.min[axis] = mid;
    Some((left, right))
}

/// Bounds on `max_{a in A} d(a, B)`.
pub fn directed_hausdorff(a: &[Aabb], b: &[Aabb], options: HausdorffOptions) -> HausdorffBounds {
    let all: Vec<u32> = (0..b.len() as u32).collect();
    let evaluated: Vec<(Piece, f64)> = a.par_iter().map(|p| evaluate(p.clone(), &all, b)).collect();
    let mut lower2 = 0.0f64;
    let mut heap = BinaryHeap::with_capacity(evaluated.len());
    for (piece, low) in evaluated {
        lower2 = lower2.max(low);
        heap.push(piece);
    }
    let mut pieces = a.len();
    let gap_closed = |upper2: f64, lower2: f64| upper2.sqrt() - lower2.sqrt() <= options.tolerance;
    loop {
        let Some(top) = heap.peek() else {
            return HausdorffBounds {
                lower: lower2.sqrt(),
                upper: lower2.sqrt(),
                pieces,
                converged: true,
            };
        };
        // discarded pieces are bounded by `lower2`
        let upper2 = top.upper2.max(lower2);
        if gap_closed(upper2, lower2) {
            return HausdorffBounds {
                lower: lower2.sqrt(),
                upper: upper2.sqrt(),
                pieces,
                converged: true,
            };
        }
        if pieces >= options.max_pieces {
            return HausdorffBounds {
                lower: lower2.sqrt(),
                upper: upper2.sqrt(),
                pieces,
                converged: false,
            };
        }
        let piece = heap.pop().expect("peeked");
        let Some((left, right)) = split(&piece.aabb) else {
            // a point piece: its bounds coincide
            lower2 = lower2.max(piece.upper2);
            continue;
        };
        for child in [left, right] {
            let (child, low) = evaluate(child, &piece.candidates, b);
            pieces += 1;
            lower2 = lower2.max(low);
            if child.upper2 > lower2 {
                heap.push(child);
            }
        }
    }
}

/// Bounds on the Hausdorff distance `max(h(A, B), h(B, A))`.
pub fn hausdorff_distance(
    a: &[Aabb],
    b: &[Aabb],
    options: HausdorffOptions,
) -> Result<HausdorffBounds, TangentError> {
    if a.is_empty() || b.is_empty() {
        return Err(TangentError::EmptySet);
    }
    let (ab, ba) = rayon::join(
        || directed_hausdorff(a, b, options),
        || directed_hausdorff(b, a, options),
    );
    Ok(ab.max(ba))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_interval(lo: f64, hi: f64) -> Aabb {
        Aabb::new(vec![lo], vec![hi])
    }

    #[test]
    fn two_points() {
        let d = hausdorff_distance(
            &[Aabb::point(vec![0.0])],
            &[Aabb::point(vec![1.0])],
            Default::default(),
        )
        .unwrap();
        assert_eq!((d.lower, d.upper), (1.0, 1.0));
    }

    #[test]
    fn identical_sets() {
        let a = vec![
            Aabb::new(vec![0.0, 0.0], vec![0.5, 0.25]),
            Aabb::new(vec![0.5, 0.5], vec![1.0, 1.0]),
        ];
        let d = hausdorff_distance(&a, &a, Default::default()).unwrap();
        assert_eq!(d.upper, 0.0);
        assert!(hausdorff_distance(&a, &[], Default::default()).is_err());
    }

    #[test]
    fn maximizer_between_two_boxes() {
        // A = [0, 1]; B = {0} and {1}: the farthest point is 1/2
        let d = directed_hausdorff(
            &[unit_interval(0.0, 1.0)],
            &[Aabb::point(vec![0.0]), Aabb::point(vec![1.0])],
            Default::default(),
        );
        assert!(d.converged);
        assert!((d.lower - 0.5).abs() < 1e-9 && (d.upper - 0.5).abs() < 1e-9);
    }

    #[test]
    fn off_grid_maximizer_in_the_plane() {
        // B = two unit-side squares; A = a segment above them. The farthest
        // point lies on the bisector of the squares' nearest corners.
        let b = vec![
            Aabb::new(vec![0.0, 0.0], vec![1.0, 1.0]),
            Aabb::new(vec![3.0, 0.0], vec![4.0, 2.0]),
        ];
        let a = vec![Aabb::new(vec![0.0, 3.0], vec![4.0, 3.0])];
        // on y = 3: d to first = sqrt((x-1)^2 + 4), to second = sqrt((3-x)^2 + 1);
        // equal at (x-1)^2 + 4 = (3-x)^2 + 1  =>  x = 1.25, d^2 = 4.0625
        let d = directed_hausdorff(&a, &b, Default::default());
        assert!((d.lower - 4.0625f64.sqrt()).abs() < 1e-8, "{d:?}");
        assert!((d.upper - 4.0625f64.sqrt()).abs() < 1e-8);
    }

    fn brute_force(a: &[Aabb], b: &[Aabb], grid: usize) -> f64 {
        let mut best = 0.0f64;
        for p in a {
            let dims = p.dims();
            let steps = (0..dims).map(|_| 0..=grid);
            for idx in itertools::Itertools::multi_cartesian_product(steps) {
                let x: Vec<f64> = (0..dims)
                    .map(|l| p.min[l] + (p.max[l] - p.min[l]) * idx[l] as f64 / grid as f64)
                    .collect();
                let d = b
                    .iter()
                    .map(|q| point_dist2(&x, q))
                    .fold(f64::INFINITY, f64::min);
                best = best.max(d.sqrt());
            }
        }
        best
    }

    fn boxes(dims: usize) -> impl Strategy<Value = Vec<Aabb>> {
        prop::collection::vec(
            (
                prop::collection::vec(0.0f64..1.0, dims),
                prop::collection::vec(0.0f64..0.3, dims),
            ),
            1..5,
        )
        .prop_map(|raw| {
            raw.into_iter()
                .map(|(lo, w)| {
                    Aabb::new(lo.clone(), lo.iter().zip(&w).map(|(a, b)| a + b).collect())
                })
                .collect()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn bounds_bracket_a_dense_sample(a in boxes(2), b in boxes(2)) {
            let d = directed_hausdorff(&a, &b, HausdorffOptions { tolerance: 1e-7, max_pieces: 200_000 });
            let sampled = brute_force(&a, &b, 40);
            prop_assert!(d.lower <= d.upper + 1e-12);
            prop_assert!(sampled <= d.upper + 1e-9, "sampled {} > upper {}", sampled, d.upper);
            // grid sampling misses the true maximizer by at most half a grid diagonal
            let step = a.iter().map(|p| (0..2).map(|l| (p.max[l] - p.min[l]).powi(2)).sum::<f64>().sqrt()).fold(0.0, f64::max) / 40.0;
            prop_assert!(d.lower <= sampled + step + 1e-9);
        }

        #[test]
        fn symmetric_and_zero_on_self(a in boxes(3), b in boxes(3)) {
            let options = HausdorffOptions { tolerance: 1e-7, max_pieces: 200_000 };
            let ab = hausdorff_distance(&a, &b, options).unwrap();
            let ba = hausdorff_distance(&b, &a, options).unwrap();
            prop_assert!((ab.lower - ba.lower).abs() < 1e-12 && (ab.upper - ba.upper).abs() < 1e-12);
            prop_assert_eq!(hausdorff_distance(&a, &a, options).unwrap().upper, 0.0);
        }
    }
}
