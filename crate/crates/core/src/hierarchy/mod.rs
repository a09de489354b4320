//! Multi-granularity hierarchy and exact-count refinement.
//!
//! [`fit`] repeats agglomeration rounds until one cluster remains, yielding
//! nested partitions `R_0 ⊑ R_1 ⊑ … ⊑ {all}`. [`cut`] picks the coarsest
//! level that still has at least `m` clusters and merges the closest pair of
//! clusters until exactly `m` are left.

mod document;

pub use document::{HierarchyDocument, InputDigest, LevelRecord, RunManifest, FORMAT_VERSION};

use serde::{Deserialize, Serialize};

use crate::cdi::IntegratedCosine;
use crate::dataset::MultiViewDataset;
use crate::error::{MhcError, Result};
use crate::matrix::Matrix;
use crate::nna::{self, ClusterRepresentatives, Neighbor, NnBackend};
use crate::partition::Partition;

/// Summary of the first-neighbor distances that produced a level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergeStats {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

impl MergeStats {
    fn from_neighbors(neighbors: &[Neighbor]) -> Self {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut sum = 0.0;
        for n in neighbors {
            min = min.min(n.distance);
            max = max.max(n.distance);
            sum += n.distance;
        }
        MergeStats {
            min,
            mean: sum / neighbors.len() as f64,
            max,
        }
    }
}

/// Nested partitions of the samples, finest first, ending with one cluster.
#[derive(Clone, Debug, PartialEq)]
pub struct Hierarchy {
    levels: Vec<Partition>,
    representatives: Vec<ClusterRepresentatives>,
    merge_stats: Vec<MergeStats>,
}

impl Hierarchy {
    pub fn levels(&self) -> &[Partition] {
        &self.levels
    }

    /// Cluster representatives of each level.
    pub fn representatives(&self) -> &[ClusterRepresentatives] {
        &self.representatives
    }

    pub fn merge_stats(&self) -> &[MergeStats] {
        &self.merge_stats
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(Partition::num_clusters).collect()
    }

    pub fn closest_level(&self, m: usize) -> Result<&Partition> {
        closest_level(&self.levels, m)
    }
}

/// Builds the full hierarchy with the tree backend. There is nothing to tune.
pub fn fit(dataset: &MultiViewDataset) -> Result<Hierarchy> {
    fit_with_backend(dataset, NnBackend::Tree)
}

/// Same as [`fit`]; the backend changes speed only, never the result.
pub fn fit_with_backend(dataset: &MultiViewDataset, backend: NnBackend) -> Result<Hierarchy> {
    let n = dataset.n();
    if n < 2 {
        return Err(MhcError::TooFewNodes(n));
    }
    let mut levels = Vec::new();
    let mut representatives = Vec::new();
    let mut merge_stats = Vec::new();

    let mut reps = ClusterRepresentatives::from_dataset(dataset);
    let mut current = Partition::singletons(n);
    while reps.len() > 1 {
        let (merged, neighbors) = nna::agglomerate(&reps, backend)?;
        debug_assert!(merged.num_clusters() < reps.len());
        current = current.compose(&merged)?;
        reps = nna::compute_representatives(dataset, &current)?;
        merge_stats.push(MergeStats::from_neighbors(&neighbors));
        levels.push(current.clone());
        representatives.push(reps.clone());
    }
    Ok(Hierarchy {
        levels,
        representatives,
        merge_stats,
    })
}

/// The coarsest level with at least `m` clusters.
pub fn closest_level(levels: &[Partition], m: usize) -> Result<&Partition> {
    let finest = levels.first().map_or(0, Partition::num_clusters);
    if m == 0 || m > finest {
        return Err(MhcError::ClusterCount {
            requested: m,
            max: finest,
        });
    }
    levels
        .iter()
        .rev()
        .find(|p| p.num_clusters() >= m)
        .ok_or(MhcError::ClusterCount {
            requested: m,
            max: finest,
        })
}

/// Merges the two closest clusters of `closest` until `m` remain.
///
/// Cluster distance is the integrated cosine distance between per-view
/// means of the original samples. Ties go to the lexicographically smallest
/// pair of current cluster ids, where ids follow the smallest member sample.
pub fn refine_to_k(dataset: &MultiViewDataset, closest: &Partition, m: usize) -> Result<Partition> {
    let k = closest.num_clusters();
    if m == 0 || m > k {
        return Err(MhcError::ClusterCount { requested: m, max: k });
    }
    if closest.len() != dataset.n() {
        return Err(MhcError::PartitionLength {
            expected: dataset.n(),
            found: closest.len(),
        });
    }
    if m == k {
        return Ok(closest.clone());
    }

    let mut members = closest.members();
    let mut reps = nna::compute_representatives(dataset, closest)?.views().to_vec();
    let mut pairs = PairTable::new(&reps)?;
    // `slot` of each current cluster; merged clusters keep the lower slot.
    let mut alive = vec![true; k];
    let mut remaining = k;

    while remaining > m {
        let (a, b) = pairs.closest(&alive);
        alive[b] = false;
        remaining -= 1;
        let absorbed = std::mem::take(&mut members[b]);
        members[a].extend(absorbed);
        members[a].sort_unstable();
        for (view, data) in reps.iter_mut().zip(dataset.views()) {
            mean_into(view.row_mut(a), data, &members[a]);
        }
        pairs.update(&reps, &alive, a, b)?;
    }

    let mut assignment = vec![0; dataset.n()];
    for (slot, group) in members.iter().enumerate().filter(|(s, _)| alive[*s]) {
        for &s in group {
            assignment[s] = slot;
        }
    }
    Ok(Partition::from_labels(&assignment))
}

fn mean_into(out: &mut [f64], data: &Matrix, members: &[usize]) {
    out.iter_mut().for_each(|x| *x = 0.0);
    for &s in members {
        for (o, x) in out.iter_mut().zip(data.row(s)) {
            *o += x;
        }
    }
    let size = members.len() as f64;
    out.iter_mut().for_each(|x| *x /= size);
}

/// Dense pairwise distances between live clusters, with a cached best
/// partner `> i` per row.
struct PairTable {
    k: usize,
    dist: Vec<f64>,
    row_best: Vec<(f64, usize)>,
}

impl PairTable {
    fn new(reps: &[Matrix]) -> Result<Self> {
        let matrix = IntegratedCosine::new(reps)?.to_matrix();
        let k = matrix.order();
        let mut table = PairTable {
            k,
            dist: matrix.as_slice().to_vec(),
            row_best: vec![(f64::INFINITY, usize::MAX); k],
        };
        let alive = vec![true; k];
        for i in 0..k {
            table.rescan(i, &alive);
        }
        Ok(table)
    }

    fn rescan(&mut self, i: usize, alive: &[bool]) {
        let mut best = (f64::INFINITY, usize::MAX);
        let row = &self.dist[i * self.k..(i + 1) * self.k];
        for j in ((i + 1)..self.k).filter(|&j| alive[j]) {
            if best.1 == usize::MAX || row[j] < best.0 {
                best = (row[j], j);
            }
        }
        self.row_best[i] = best;
    }

    fn closest(&self, alive: &[bool]) -> (usize, usize) {
        let mut best: Option<(f64, usize, usize)> = None;
        for (i, &(d, j)) in self.row_best.iter().enumerate() {
            if !alive[i] || j == usize::MAX {
                continue;
            }
            if best.is_none_or(|(bd, _, _)| d < bd) {
                best = Some((d, i, j));
            }
        }
        let (_, i, j) = best.expect("at least two live clusters");
        (i, j)
    }

    fn update(&mut self, reps: &[Matrix], alive: &[bool], merged: usize, removed: usize) -> Result<()> {
        let metric = IntegratedCosine::new(reps)?;
        let k = self.k;
        for j in (0..k).filter(|&j| alive[j] && j != merged) {
            let d = metric.distance(merged, j);
            self.dist[merged * k + j] = d;
            self.dist[j * k + merged] = d;
        }
        for i in (0..k).filter(|&i| alive[i]) {
            let (d, j) = self.row_best[i];
            if i == merged || j == merged || j == removed {
                self.rescan(i, alive);
            } else if i < merged {
                let dm = self.dist[i * k + merged];
                if dm < d || (dm == d && merged < j) {
                    self.row_best[i] = (dm, merged);
                }
            }
        }
        Ok(())
    }
}

/// Exactly `m` clusters: the closest level, refined pairwise.
pub fn cut(hierarchy: &Hierarchy, dataset: &MultiViewDataset, m: usize) -> Result<Partition> {
    cut_levels(hierarchy.levels(), dataset, m)
}

/// [`cut`] over stored level partitions, e.g. read back from a file.
pub fn cut_levels(levels: &[Partition], dataset: &MultiViewDataset, m: usize) -> Result<Partition> {
    let closest = closest_level(levels, m)?;
    refine_to_k(dataset, closest, m)
}
