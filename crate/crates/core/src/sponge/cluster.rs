use serde::{Deserialize, Serialize};
use std::ops::Range;

/// Partition of the coordinates `0..d` into `d*` consecutive clusters sharing
/// a contraction ratio.
///
/// Cluster indices are zero-based. `bases` holds the common base `n_l*` of
/// each cluster for Bedford–McMullen sponges and is `None` for
/// Lalley–Gatzouras sponges, whose clusters are defined by equal contractions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterStructure {
    pub sizes: Vec<usize>,
    pub bases: Option<Vec<u32>>,
    pub cluster_of: Vec<usize>,
}

impl ClusterStructure {
    pub(crate) fn from_sizes(sizes: Vec<usize>, bases: Option<Vec<u32>>) -> Self {
        let cluster_of = sizes
            .iter()
            .enumerate()
            .flat_map(|(cluster, &size)| std::iter::repeat_n(cluster, size))
            .collect();
        Self {
            sizes,
            bases,
            cluster_of,
        }
    }

    /// Groups maximal runs of equal values in an already sorted base vector.
    pub fn from_sorted_bases(bases: &[u32]) -> Self {
        let mut sizes = Vec::new();
        let mut cluster_bases = Vec::new();
        for &base in bases {
            if cluster_bases.last() == Some(&base) {
                *sizes.last_mut().unwrap() += 1;
            } else {
                cluster_bases.push(base);
                sizes.push(1);
            }
        }
        Self::from_sizes(sizes, Some(cluster_bases))
    }

    /// Number of clusters `d*`.
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    pub fn dims(&self) -> usize {
        self.cluster_of.len()
    }

    pub fn start(&self, cluster: usize) -> usize {
        self.sizes[..cluster].iter().sum()
    }

    /// `a_1 + ... + a_{cluster+1}`, the exclusive end of the cluster.
    pub fn end(&self, cluster: usize) -> usize {
        self.sizes[..=cluster].iter().sum()
    }

    pub fn range(&self, cluster: usize) -> Range<usize> {
        self.start(cluster)..self.end(cluster)
    }

    pub fn base(&self, cluster: usize) -> Option<u32> {
        self.bases.as_ref().map(|bases| bases[cluster])
    }
}
