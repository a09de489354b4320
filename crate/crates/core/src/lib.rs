//! Parameter-free multi-view hierarchical clustering.
//!
//! Views are combined by averaging per-view cosine distances
//! ([`cdi`]). Each round links every cluster to its nearest neighbor and
//! merges connected components ([`nna`]), which yields a full hierarchy of
//! nested partitions ([`hierarchy::fit`]). A partition with an exact number
//! of clusters is obtained by refining the closest level
//! ([`hierarchy::cut`]).
//!
//! ```
//! use mhc_core::{dataset, hierarchy, metrics};
//!
//! let spec = dataset::SyntheticSpec {
//!     n: 60,
//!     clusters: 3,
//!     dims: vec![8, 12],
//!     separation: 1.0,
//!     noise: 0.05,
//!     seed: 4,
//! };
//! let data = dataset::generate_synthetic(&spec).unwrap();
//! let tree = hierarchy::fit(&data).unwrap();
//! assert_eq!(*tree.level_sizes().last().unwrap(), 1);
//!
//! let labels = hierarchy::cut(&tree, &data, 3).unwrap();
//! assert_eq!(labels.num_clusters(), 3);
//! let acc = metrics::accuracy(data.labels().unwrap(), labels.assignment()).unwrap();
//! assert!(acc > 0.9);
//! ```

pub mod cdi;
pub mod dataset;
pub mod error;
pub mod hierarchy;
pub mod matrix;
pub mod metrics;
pub mod nna;
pub mod par;
pub mod partition;

pub use cdi::DistanceMatrix;
pub use dataset::{MultiViewDataset, SyntheticSpec};
pub use error::{MhcError, Result};
pub use hierarchy::{Hierarchy, HierarchyDocument};
pub use matrix::Matrix;
pub use nna::{ClusterRepresentatives, NnBackend};
pub use partition::Partition;
