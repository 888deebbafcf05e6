use super::{ClusterStructure, Digit};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Digit trie grouped by cluster.
///
/// `levels[l]` maps every prefix of `D` covering clusters `0..l` (an element of
/// `D_l`, the empty prefix when `l == 0`) to the set of cluster-`l` blocks that
/// extend it inside `D`. The number of blocks is `N(prefix)`, and the root
/// count is `N = #(pi_1 D)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitTree {
    clusters: ClusterStructure,
    levels: Vec<BTreeMap<Digit, BTreeSet<Digit>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigitTreeNode {
    pub prefix: Digit,
    pub children: Vec<Digit>,
    pub child_count: usize,
}

/// Max and min of `N(prefix)` over one level, with the lexicographically
/// smallest prefix attaining each.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extremes {
    pub max: usize,
    pub argmax: Digit,
    pub min: usize,
    pub argmin: Digit,
}

impl DigitTree {
    pub fn build(digits: &[Digit], clusters: &ClusterStructure) -> Self {
        let mut levels = vec![BTreeMap::<Digit, BTreeSet<Digit>>::new(); clusters.count()];
        for digit in digits {
            for (l, level) in levels.iter_mut().enumerate() {
                let range = clusters.range(l);
                level
                    .entry(digit[..range.start].to_vec())
                    .or_default()
                    .insert(digit[range].to_vec());
            }
        }
        Self {
            clusters: clusters.clone(),
            levels,
        }
    }

    pub fn clusters(&self) -> &ClusterStructure {
        &self.clusters
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    /// `N = #(pi_1 D)`.
    pub fn root_count(&self) -> usize {
        self.levels
            .first()
            .and_then(|level| level.get(&Vec::new()))
            .map_or(0, BTreeSet::len)
    }

    /// Children of `prefix`, whose length must be a cluster boundary.
    pub fn children(&self, prefix: &[u32]) -> Option<&BTreeSet<Digit>> {
        let level = self.level_of_prefix(prefix)?;
        self.levels[level].get(prefix)
    }

    pub fn count(&self, prefix: &[u32]) -> Option<usize> {
        self.children(prefix).map(BTreeSet::len)
    }

    fn level_of_prefix(&self, prefix: &[u32]) -> Option<usize> {
        (0..self.levels.len()).find(|&l| self.clusters.start(l) == prefix.len())
    }

    pub fn level(&self, level: usize) -> &BTreeMap<Digit, BTreeSet<Digit>> {
        &self.levels[level]
    }

    pub fn nodes(&self, level: usize) -> impl Iterator<Item = DigitTreeNode> + '_ {
        self.levels[level]
            .iter()
            .map(|(prefix, children)| DigitTreeNode {
                prefix: prefix.clone(),
                children: children.iter().cloned().collect(),
                child_count: children.len(),
            })
    }

    /// Extremes of `N(prefix)` over prefixes in `D_level`; ties go to the
    /// lexicographically smallest prefix.
    pub fn extremes(&self, level: usize) -> Extremes {
        let mut iter = self.levels[level].iter();
        let (first_prefix, first_children) = iter.next().expect("every level is nonempty");
        let mut out = Extremes {
            max: first_children.len(),
            argmax: first_prefix.clone(),
            min: first_children.len(),
            argmin: first_prefix.clone(),
        };
        for (prefix, children) in iter {
            if children.len() > out.max {
                out.max = children.len();
                out.argmax = prefix.clone();
            }
            if children.len() < out.min {
                out.min = children.len();
                out.argmin = prefix.clone();
            }
        }
        out
    }

    /// Every root-to-leaf path, which reproduces `D`.
    pub fn paths(&self) -> BTreeSet<Digit> {
        let mut frontier: Vec<Digit> = vec![Vec::new()];
        for level in &self.levels {
            frontier = frontier
                .into_iter()
                .flat_map(|prefix| {
                    level[&prefix].iter().map(move |block| {
                        let mut next = prefix.clone();
                        next.extend_from_slice(block);
                        next
                    })
                })
                .collect();
        }
        frontier.into_iter().collect()
    }
}

/// `N'(i_1, ..., i_{l-1})`: the number of distinct single next digits for
/// every coordinate prefix occurring in `D`.
///
/// `counts[l]` is keyed by prefixes of length `l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerCoordinateCounts {
    pub counts: Vec<BTreeMap<Digit, usize>>,
}

impl PerCoordinateCounts {
    pub fn build(dims: usize, digits: &[Digit]) -> Self {
        let counts = (0..dims)
            .map(|l| {
                let mut next: BTreeMap<Digit, BTreeSet<u32>> = BTreeMap::new();
                for digit in digits {
                    next.entry(digit[..l].to_vec())
                        .or_default()
                        .insert(digit[l]);
                }
                next.into_iter()
                    .map(|(prefix, set)| (prefix, set.len()))
                    .collect()
            })
            .collect();
        Self { counts }
    }

    pub fn get(&self, prefix: &[u32]) -> Option<usize> {
        self.counts.get(prefix.len())?.get(prefix).copied()
    }

    /// `(max, argmax, min, argmin)` of `N'` over prefixes of length `l`.
    pub fn extremes(&self, l: usize) -> Extremes {
        let mut iter = self.counts[l].iter();
        let (first, &count) = iter.next().expect("nonempty level");
        let mut out = Extremes {
            max: count,
            argmax: first.clone(),
            min: count,
            argmin: first.clone(),
        };
        for (prefix, &count) in iter {
            if count > out.max {
                out.max = count;
                out.argmax = prefix.clone();
            }
            if count < out.min {
                out.min = count;
                out.argmin = prefix.clone();
            }
        }
        out
    }
}
