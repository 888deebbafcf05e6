use super::TangentError;
use crate::measure::Interval;
use crate::rational::{self, Rational};
use crate::sponge::{SpongeSpec, SymbolicSponge};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt::Write as _;

/// A grid axis: cells of side `base^-depth`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Axis {
    pub base: u32,
    pub depth: u32,
}

impl Axis {
    pub fn new(base: u32, depth: u32) -> Self {
        Self { base, depth }
    }

    /// Number of cells along the axis, `base^depth`.
    pub fn cells(&self) -> Result<u64, TangentError> {
        (self.base as u64)
            .checked_pow(self.depth)
            .ok_or(TangentError::ResolutionOverflow(*self))
    }
}

/// A finite union of grid-aligned boxes inside `[0,1]^d`. Box `(j_1, ..., j_d)`
/// is `prod_l [j_l, j_l + 1] * base_l^-depth_l`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxSet {
    axes: Vec<Axis>,
    cells: BTreeSet<Vec<u64>>,
}

impl BoxSet {
    pub fn new(
        axes: Vec<Axis>,
        cells: impl IntoIterator<Item = Vec<u64>>,
    ) -> Result<Self, TangentError> {
        let limits = axes
            .iter()
            .map(Axis::cells)
            .collect::<Result<Vec<_>, _>>()?;
        let cells: BTreeSet<Vec<u64>> = cells.into_iter().collect();
        for cell in &cells {
            if cell.len() != axes.len() || cell.iter().zip(&limits).any(|(i, n)| i >= n) {
                return Err(TangentError::CellOutOfRange(cell.clone()));
            }
        }
        Ok(Self { axes, cells })
    }

    /// `[0,1]^d` at depth 0 on every axis.
    pub fn unit(bases: &[u32]) -> Self {
        Self {
            axes: bases.iter().map(|&b| Axis::new(b, 0)).collect(),
            cells: BTreeSet::from([vec![0; bases.len()]]),
        }
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn cells(&self) -> &BTreeSet<Vec<u64>> {
        &self.cells
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains_cell(&self, cell: &[u64]) -> bool {
        self.cells.contains(cell)
    }

    /// Cartesian product, axes of `self` first.
    pub fn product(&self, other: &BoxSet, budget: u64) -> Result<Self, TangentError> {
        let needed = self.len() as f64 * other.len() as f64;
        if needed > budget as f64 {
            return Err(TangentError::BudgetExceeded { needed, budget });
        }
        let axes = [self.axes.clone(), other.axes.clone()].concat();
        let cells = self
            .cells
            .iter()
            .flat_map(|a| {
                other
                    .cells
                    .iter()
                    .map(move |b| [a.as_slice(), b.as_slice()].concat())
            })
            .collect();
        Ok(Self { axes, cells })
    }

    /// The cell of `coarse` axes containing `cell` (given on `self`'s axes), if
    /// every coarse axis has the same base and no greater depth.
    pub fn coarsen(&self, cell: &[u64], coarse: &[Axis]) -> Option<Vec<u64>> {
        cell.iter()
            .zip(&self.axes)
            .zip(coarse)
            .map(|((&i, fine), coarse)| {
                if fine.base != coarse.base || fine.depth < coarse.depth {
                    return None;
                }
                let shift = (fine.base as u64).checked_pow(fine.depth - coarse.depth)?;
                Some(i / shift)
            })
            .collect()
    }

    /// Boxes of `self` not contained in any box of `other` (exact, on the grid).
    pub fn uncovered_by(&self, other: &BoxSet) -> Result<Vec<Vec<u64>>, TangentError> {
        if self.dims() != other.dims() {
            return Err(TangentError::AxisMismatch);
        }
        let mut missing = Vec::new();
        for cell in &self.cells {
            let coarse = self
                .coarsen(cell, &other.axes)
                .ok_or(TangentError::AxisMismatch)?;
            if !other.contains_cell(&coarse) {
                missing.push(cell.clone());
            }
        }
        Ok(missing)
    }

    /// Exact rational box of one cell.
    pub fn cell_box(&self, cell: &[u64]) -> Vec<Interval> {
        cell.iter()
            .zip(&self.axes)
            .map(|(&i, axis)| {
                let side = rational::inv_pow(axis.base, axis.depth);
                let lo = Rational::from_integer(i.into()) * &side;
                let hi = &lo + &side;
                Interval::new(lo, hi)
            })
            .collect()
    }

    pub fn to_aabbs(&self) -> Vec<Aabb> {
        let sides: Vec<f64> = self
            .axes
            .iter()
            .map(|a| (a.base as f64).powi(-(a.depth as i32)))
            .collect();
        self.cells
            .iter()
            .map(|cell| {
                let min: Vec<f64> = cell
                    .iter()
                    .zip(&sides)
                    .map(|(&i, s)| i as f64 * s)
                    .collect();
                let max = cell
                    .iter()
                    .zip(&sides)
                    .map(|(&i, s)| (i + 1) as f64 * s)
                    .collect();
                Aabb { min, max }
            })
            .collect()
    }

    /// One box per line, `lo hi` per coordinate in decimal.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for aabb in self.to_aabbs() {
            let fields: Vec<String> = aabb
                .min
                .iter()
                .zip(&aabb.max)
                .map(|(lo, hi)| format!("{lo:.17e} {hi:.17e}"))
                .collect();
            writeln!(out, "{}", fields.join(" ")).expect("writing to a string");
        }
        out
    }

    /// Lossless voxel format: a `bases` line, a `depths` line, then one line of
    /// integer indices per box.
    pub fn to_voxels(&self) -> String {
        let join = |values: Vec<String>| values.join(" ");
        let mut out = format!(
            "bases {}\ndepths {}\n",
            join(self.axes.iter().map(|a| a.base.to_string()).collect()),
            join(self.axes.iter().map(|a| a.depth.to_string()).collect())
        );
        for cell in &self.cells {
            writeln!(out, "{}", join(cell.iter().map(u64::to_string).collect()))
                .expect("writing to a string");
        }
        out
    }

    pub fn from_voxels(text: &str) -> Result<Self, TangentError> {
        let malformed = |line: &str| TangentError::MalformedVoxels(line.to_string());
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let mut header = |key: &str| -> Result<Vec<u32>, TangentError> {
            let line = lines.next().ok_or_else(|| malformed(""))?;
            let mut words = line.split_whitespace();
            if words.next() != Some(key) {
                return Err(malformed(line));
            }
            words
                .map(|w| w.parse().map_err(|_| malformed(line)))
                .collect()
        };
        let bases = header("bases")?;
        let depths = header("depths")?;
        if bases.len() != depths.len() {
            return Err(TangentError::AxisMismatch);
        }
        let axes = bases
            .iter()
            .zip(&depths)
            .map(|(&b, &d)| Axis::new(b, d))
            .collect();
        let cells = lines
            .map(|line| {
                line.split_whitespace()
                    .map(|w| w.parse().map_err(|_| malformed(line)))
                    .collect()
            })
            .collect::<Result<Vec<Vec<u64>>, _>>()?;
        Self::new(axes, cells)
    }
}

/// Axis-aligned box with float corners; degenerate (point) boxes are allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Aabb {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Self {
        Self { min, max }
    }

    pub fn point(p: Vec<f64>) -> Self {
        Self {
            min: p.clone(),
            max: p,
        }
    }

    pub fn dims(&self) -> usize {
        self.min.len()
    }
}

fn check_budget(needed: f64, budget: u64) -> Result<(), TangentError> {
    if needed > budget as f64 {
        return Err(TangentError::BudgetExceeded { needed, budget });
    }
    Ok(())
}

/// The depth-`m` pre-fractal: `|D|^m` boxes of side `n_l^-m`.
pub fn prefractal(spec: &SpongeSpec, m: u32, budget: u64) -> Result<BoxSet, TangentError> {
    check_budget((spec.digits().len() as f64).powi(m as i32), budget)?;
    let axes: Vec<Axis> = spec.bases().iter().map(|&b| Axis::new(b, m)).collect();
    for axis in &axes {
        axis.cells()?;
    }
    let mut cells: Vec<Vec<u64>> = vec![vec![0; axes.len()]];
    for _ in 0..m {
        cells = cells
            .iter()
            .flat_map(|cell| {
                spec.digits().iter().map(move |digit| {
                    cell.iter()
                        .zip(digit)
                        .zip(spec.bases())
                        .map(|((&i, &j), &n)| i * n as u64 + j as u64)
                        .collect()
                })
            })
            .collect();
    }
    BoxSet::new(axes, cells)
}

/// `K_l^m` for the fibre over `prefix` at `level` (cluster `level`, 0-based):
/// the depth-`m` pre-fractal of the self-similar set in `[0,1]^{a_l}` whose
/// digits are the blocks extending `prefix`. Level 0 with the empty prefix
/// gives the projection `pi_1 K`.
pub fn cluster_prefractal(
    spec: &SpongeSpec,
    level: usize,
    prefix: &[u32],
    m: u32,
    budget: u64,
) -> Result<BoxSet, TangentError> {
    let clusters = spec.clusters();
    let blocks = spec
        .digit_tree()
        .level(level)
        .get(prefix)
        .ok_or_else(|| TangentError::UnknownPrefix(prefix.to_vec()))?;
    check_budget((blocks.len() as f64).powi(m as i32), budget)?;
    let base = clusters
        .base(level)
        .expect("Bedford-McMullen clusters carry bases");
    let axes: Vec<Axis> = vec![Axis::new(base, m); clusters.sizes[level]];
    for axis in &axes {
        axis.cells()?;
    }
    let mut cells: Vec<Vec<u64>> = vec![vec![0; axes.len()]];
    for _ in 0..m {
        cells = cells
            .iter()
            .flat_map(|cell| {
                blocks.iter().map(move |block| {
                    cell.iter()
                        .zip(block)
                        .map(|(&i, &j)| i * base as u64 + j as u64)
                        .collect()
                })
            })
            .collect();
    }
    BoxSet::new(axes, cells)
}

/// Exact rectangles of the depth-`m` pre-fractal of any sponge, as images of
/// `[0,1]^d` under all depth-`m` compositions.
pub fn prefractal_rectangles<S: SymbolicSponge + ?Sized>(
    sponge: &S,
    m: u32,
    budget: u64,
) -> Result<Vec<Vec<Interval>>, TangentError> {
    check_budget((sponge.digits().len() as f64).powi(m as i32), budget)?;
    let dims = sponge.dims();
    let mut boxes: Vec<Vec<Interval>> = vec![vec![Interval::unit(); dims]];
    for _ in 0..m {
        boxes = boxes
            .iter()
            .flat_map(|rect| {
                (0..sponge.digits().len()).map(move |s| {
                    rect.iter()
                        .enumerate()
                        .map(|(l, side)| {
                            let width = side.width();
                            let lo = &side.lo + &width * sponge.translation(s, l);
                            let hi = &lo + width * sponge.contraction(s, l);
                            Interval::new(lo, hi)
                        })
                        .collect()
                })
            })
            .collect();
    }
    boxes.sort_by(|a, b| a.iter().map(|i| &i.lo).cmp(b.iter().map(|i| &i.lo)));
    Ok(boxes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{augmented, diagonal};
    use crate::rational::ratio;
    use crate::sponge::uniform_grid_encoding;

    #[test]
    fn diagonal_first_level() {
        let spec = diagonal();
        let k1 = prefractal(&spec, 1, 1_000).unwrap();
        assert_eq!(k1.len(), 4);
        let first = k1.cell_box(&[1, 0, 1]);
        assert_eq!(first[0], Interval::new(ratio(1, 2), ratio(1, 1)));
        assert_eq!(first[2], Interval::new(ratio(1, 3), ratio(2, 3)));
        assert_eq!(prefractal(&spec, 0, 1).unwrap(), BoxSet::unit(&[2, 3, 3]));
        assert_eq!(
            prefractal(&spec, 5, 1_000_000).unwrap().len(),
            4usize.pow(5)
        );
        assert!(matches!(
            prefractal(&spec, 12, 1_000),
            Err(TangentError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn cluster_prefractal_counts() {
        let spec = diagonal();
        let k2 = cluster_prefractal(&spec, 1, &[0], 2, 1_000).unwrap();
        assert_eq!(k2.len(), 9);
        assert_eq!(k2.axes(), &[Axis::new(3, 2), Axis::new(3, 2)]);
        assert!(k2.cells().iter().all(|c| c[0] == c[1]));
        let proj = cluster_prefractal(&augmented(), 0, &[], 3, 1_000).unwrap();
        assert_eq!(proj.len(), 8);
        assert!(cluster_prefractal(&spec, 1, &[7], 1, 10).is_err());
    }

    #[test]
    fn products_and_coverage() {
        let spec = diagonal();
        let a = cluster_prefractal(&spec, 0, &[], 1, 100).unwrap();
        let b = cluster_prefractal(&spec, 1, &[0], 1, 100).unwrap();
        let prod = a.product(&b, 100).unwrap();
        assert_eq!(prod.len(), 6);
        let fine = prefractal(&spec, 2, 100).unwrap();
        // every depth-2 box of diagonal lies in some depth-1 box
        assert!(fine
            .uncovered_by(&prefractal(&spec, 1, 100).unwrap())
            .unwrap()
            .is_empty());
        // a coarser set cannot be tested against a finer grid
        assert!(prefractal(&spec, 1, 100)
            .unwrap()
            .uncovered_by(&fine)
            .is_err());
    }

    #[test]
    fn voxel_round_trip() {
        let set = prefractal(&augmented(), 2, 1_000).unwrap();
        assert_eq!(BoxSet::from_voxels(&set.to_voxels()).unwrap(), set);
        assert!(BoxSet::from_voxels("bases 2\ndepths 1\n5\n").is_err());
        assert!(BoxSet::from_voxels("nonsense").is_err());
        assert_eq!(set.to_text().lines().count(), 25);
    }

    #[test]
    fn rectangles_match_grid_cells() {
        let spec = augmented();
        let grid = prefractal(&spec, 2, 1_000).unwrap();
        let mut expected: Vec<Vec<Interval>> =
            grid.cells().iter().map(|c| grid.cell_box(c)).collect();
        expected.sort_by(|a, b| a.iter().map(|i| &i.lo).cmp(b.iter().map(|i| &i.lo)));
        assert_eq!(prefractal_rectangles(&spec, 2, 1_000).unwrap(), expected);
        let lg = uniform_grid_encoding(&spec);
        assert_eq!(prefractal_rectangles(&lg, 2, 1_000).unwrap(), expected);
    }
}
