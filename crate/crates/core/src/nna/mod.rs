//! Nearest neighbor agglomeration.
//!
//! Every current cluster is linked to its first neighbor under the
//! integrated cosine distance, and each connected component of the
//! resulting graph becomes one cluster of the next level. Because every node
//! has an edge, no component is a singleton and the cluster count strictly
//! decreases.

mod balltree;

use std::fmt;
use std::str::FromStr;

use crate::cdi::{dot, IntegratedCosine};
use crate::dataset::MultiViewDataset;
use crate::error::{MhcError, Result};
use crate::matrix::Matrix;
use crate::par;
use crate::partition::Partition;
use crate::DistanceMatrix;

pub use balltree::BallTree;

/// Squared-Euclidean window around the tree minimum inside which candidates
/// are re-ranked with the cosine formula. Both routes agree to ~1e-15.
const TIE_SLACK: f64 = 1e-9;

/// First neighbor of one node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

/// Which search computes first neighbors. Both return identical results.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum NnBackend {
    /// Brute force over all pairs, `O(k²)`.
    Exact,
    /// Ball tree on the concatenated normalized representatives.
    #[default]
    Tree,
}

impl fmt::Display for NnBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NnBackend::Exact => "exact",
            NnBackend::Tree => "tree",
        })
    }
}

impl FromStr for NnBackend {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "exact" => Ok(NnBackend::Exact),
            "tree" => Ok(NnBackend::Tree),
            other => Err(format!(
                "unknown nearest-neighbor backend {other:?} (expected exact or tree)"
            )),
        }
    }
}

/// Per-view mean vectors of the current clusters.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterRepresentatives {
    views: Vec<Matrix>,
    sizes: Vec<usize>,
}

impl ClusterRepresentatives {
    /// Row counts must agree across views and with `sizes`.
    pub fn new(views: Vec<Matrix>, sizes: Vec<usize>) -> Result<Self> {
        if views.is_empty() {
            return Err(MhcError::EmptyInput);
        }
        if let Some(m) = views.iter().find(|m| m.rows() != sizes.len()) {
            return Err(MhcError::OrderMismatch {
                expected: sizes.len(),
                found: m.rows(),
            });
        }
        Ok(ClusterRepresentatives { views, sizes })
    }

    /// Every sample as its own cluster.
    pub fn from_dataset(dataset: &MultiViewDataset) -> Self {
        ClusterRepresentatives {
            views: dataset.views().to_vec(),
            sizes: vec![1; dataset.n()],
        }
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn views(&self) -> &[Matrix] {
        &self.views
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }
}

/// Mean of the original samples of every cluster, per view.
pub fn compute_representatives(dataset: &MultiViewDataset, partition: &Partition) -> Result<ClusterRepresentatives> {
    if partition.len() != dataset.n() {
        return Err(MhcError::PartitionLength {
            expected: dataset.n(),
            found: partition.len(),
        });
    }
    let sizes = partition.sizes();
    if let Some(c) = sizes.iter().position(|&s| s == 0) {
        return Err(MhcError::InvalidPartition(format!("cluster {c} is empty")));
    }
    let views = dataset
        .views()
        .iter()
        .map(|view| {
            let mut sums = Matrix::zeros(partition.num_clusters(), view.cols());
            for (row, &c) in view.iter_rows().zip(partition.assignment()) {
                for (s, x) in sums.row_mut(c).iter_mut().zip(row) {
                    *s += x;
                }
            }
            for (c, &size) in sizes.iter().enumerate() {
                let size = size as f64;
                sums.row_mut(c).iter_mut().for_each(|s| *s /= size);
            }
            sums
        })
        .collect();
    Ok(ClusterRepresentatives { views, sizes })
}

fn check_nodes(k: usize) -> Result<()> {
    if k < 2 {
        Err(MhcError::TooFewNodes(k))
    } else {
        Ok(())
    }
}

/// Brute-force first neighbors under the integrated cosine distance. Ties go
/// to the smallest index.
pub fn nearest_neighbors_exact(reps: &ClusterRepresentatives) -> Result<Vec<Neighbor>> {
    check_nodes(reps.len())?;
    let metric = IntegratedCosine::new(&reps.views)?;
    let k = reps.len();
    Ok(par::map_indices(k, |a| {
        let mut best = Neighbor {
            index: usize::MAX,
            distance: f64::INFINITY,
        };
        for b in (0..k).filter(|&b| b != a) {
            let d = metric.distance(a, b);
            if d < best.distance || best.index == usize::MAX {
                best = Neighbor { index: b, distance: d };
            }
        }
        best
    }))
}

/// First neighbors read off a dense distance matrix (row minimum, smallest
/// index on ties).
pub fn nearest_from_matrix(matrix: &DistanceMatrix) -> Result<Vec<Neighbor>> {
    let k = matrix.order();
    check_nodes(k)?;
    Ok((0..k)
        .map(|a| {
            let mut best = Neighbor {
                index: usize::MAX,
                distance: f64::INFINITY,
            };
            for (b, &d) in matrix.row(a).iter().enumerate() {
                if b != a && (d < best.distance || best.index == usize::MAX) {
                    best = Neighbor { index: b, distance: d };
                }
            }
            best
        })
        .collect())
}

/// First neighbors via an exact metric-tree search.
///
/// Each per-view representative is L2-normalized and the views are
/// concatenated with weight `1/√v`. For unit vectors `‖u − w‖² = 2 (1 − u·w)`,
/// so the squared Euclidean distance between two concatenations is twice the
/// integrated cosine distance and Euclidean first neighbors coincide with
/// integrated-cosine first neighbors. The tree returns every point within a
/// tiny window of the Euclidean minimum, and those are re-ranked with the
/// same distance function and tie rule as [`nearest_neighbors_exact`], which
/// makes the two backends agree exactly.
pub fn nearest_neighbors_fast(reps: &ClusterRepresentatives) -> Result<Vec<Neighbor>> {
    check_nodes(reps.len())?;
    let metric = IntegratedCosine::new(&reps.views)?;
    let (coords, dim) = normalized_concatenation(&reps.views);
    let candidates = BallTree::build(&coords, dim).all_nearest_candidates(TIE_SLACK);
    Ok(par::map_indices(reps.len(), |a| {
        let mut best = Neighbor {
            index: usize::MAX,
            distance: f64::INFINITY,
        };
        for &(_, b) in &candidates[a] {
            let d = metric.distance(a, b);
            if d < best.distance || (d == best.distance && b < best.index) {
                best = Neighbor { index: b, distance: d };
            }
        }
        best
    }))
}

fn normalized_concatenation(views: &[Matrix]) -> (Vec<f64>, usize) {
    let k = views[0].rows();
    let dim: usize = views.iter().map(Matrix::cols).sum();
    let weight = 1.0 / (views.len() as f64).sqrt();
    let mut coords = Vec::with_capacity(k * dim);
    for a in 0..k {
        for view in views {
            let row = view.row(a);
            let scale = weight / dot(row, row).sqrt();
            coords.extend(row.iter().map(|x| x * scale));
        }
    }
    (coords, dim)
}

pub fn nearest_neighbors(reps: &ClusterRepresentatives, backend: NnBackend) -> Result<Vec<Neighbor>> {
    match backend {
        NnBackend::Exact => nearest_neighbors_exact(reps),
        NnBackend::Tree => nearest_neighbors_fast(reps),
    }
}

/// Undirected first-neighbor graph. Edges are stored once as `(low, high)`,
/// sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighborGraph {
    order: usize,
    edges: Vec<(usize, usize)>,
}

impl NeighborGraph {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
}

/// Connects `a` and `b` when either is the other's first neighbor.
pub fn build_graph(nearest: &[usize]) -> Result<NeighborGraph> {
    let k = nearest.len();
    let mut edges = Vec::with_capacity(k);
    for (a, &b) in nearest.iter().enumerate() {
        if a == b {
            return Err(MhcError::SelfLoop(a));
        }
        if b >= k {
            return Err(MhcError::InvalidPartition(format!(
                "neighbor {b} of node {a} is out of range"
            )));
        }
        edges.push((a.min(b), a.max(b)));
    }
    edges.sort_unstable();
    edges.dedup();
    Ok(NeighborGraph { order: k, edges })
}

/// One cluster per connected component, numbered by smallest member.
pub fn connected_components(graph: &NeighborGraph) -> Partition {
    let mut sets = DisjointSets::new(graph.order);
    for &(a, b) in &graph.edges {
        sets.union(a, b);
    }
    let roots: Vec<usize> = (0..graph.order).map(|a| sets.find(a)).collect();
    Partition::from_labels(&roots)
}

/// One agglomeration round over the given clusters: first neighbors, graph,
/// components. The returned partition is over the `reps.len()` nodes.
pub fn agglomerate(reps: &ClusterRepresentatives, backend: NnBackend) -> Result<(Partition, Vec<Neighbor>)> {
    let neighbors = nearest_neighbors(reps, backend)?;
    let nearest: Vec<usize> = neighbors.iter().map(|n| n.index).collect();
    let graph = build_graph(&nearest)?;
    Ok((connected_components(&graph), neighbors))
}

struct DisjointSets {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}
