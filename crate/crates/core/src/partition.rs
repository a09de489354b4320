use serde::{Deserialize, Serialize};

use crate::error::{MhcError, Result};

/// Assignment of items to clusters `0..num_clusters`, every cluster nonempty.
///
/// Partitions built by this crate are canonical: cluster ids increase with
/// the smallest member index, so cluster 0 always contains item 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Partition {
    assignment: Vec<usize>,
    num_clusters: usize,
}

impl Partition {
    /// Validates that ids are exactly `0..c` with every id used.
    pub fn new(assignment: Vec<usize>) -> Result<Self> {
        let num_clusters = assignment.iter().max().map_or(0, |&m| m + 1);
        let mut seen = vec![false; num_clusters];
        for &c in &assignment {
            seen[c] = true;
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(MhcError::InvalidPartition(format!("cluster id {missing} is unused")));
        }
        Ok(Partition {
            assignment,
            num_clusters,
        })
    }

    /// Relabels arbitrary labels in order of first appearance.
    pub fn from_labels<T: Copy + Eq + std::hash::Hash>(labels: &[T]) -> Self {
        let mut ids = std::collections::HashMap::new();
        let assignment = labels
            .iter()
            .map(|l| {
                let next = ids.len();
                *ids.entry(*l).or_insert(next)
            })
            .collect();
        Partition {
            assignment,
            num_clusters: ids.len(),
        }
    }

    /// Every item in its own cluster.
    pub fn singletons(n: usize) -> Self {
        Partition {
            assignment: (0..n).collect(),
            num_clusters: n,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    #[inline]
    pub fn num_clusters(&self) -> usize {
        self.num_clusters
    }

    #[inline]
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn into_assignment(self) -> Vec<usize> {
        self.assignment
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.num_clusters];
        for &c in &self.assignment {
            sizes[c] += 1;
        }
        sizes
    }

    /// Member lists per cluster, each in increasing item order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.num_clusters];
        for (i, &c) in self.assignment.iter().enumerate() {
            members[c].push(i);
        }
        members
    }

    /// Lifts a partition of this partition's clusters back to items:
    /// item `i` goes to `coarse[self[i]]`.
    pub fn compose(&self, coarse: &Partition) -> Result<Partition> {
        if coarse.len() != self.num_clusters {
            return Err(MhcError::PartitionLength {
                expected: self.num_clusters,
                found: coarse.len(),
            });
        }
        Ok(Partition::from_labels(
            &self
                .assignment
                .iter()
                .map(|&c| coarse.assignment[c])
                .collect::<Vec<_>>(),
        ))
    }

    /// True if every cluster of `self` lies inside a single cluster of
    /// `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        if self.len() != coarser.len() {
            return false;
        }
        let mut image = vec![usize::MAX; self.num_clusters];
        for (&fine, &coarse) in self.assignment.iter().zip(&coarser.assignment) {
            if image[fine] == usize::MAX {
                image[fine] = coarse;
            } else if image[fine] != coarse {
                return false;
            }
        }
        true
    }
}

impl TryFrom<Vec<usize>> for Partition {
    type Error = MhcError;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Partition::new(v)
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Self {
        p.assignment
    }
}
