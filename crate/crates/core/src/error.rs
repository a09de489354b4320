use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, MhcError>;

#[derive(Debug, Error)]
pub enum MhcError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: row {row}, column {column}: {message}", path.display())]
    Parse {
        path: PathBuf,
        row: usize,
        column: usize,
        message: String,
    },

    #[error("{}: file contains no samples", path.display())]
    EmptyFile { path: PathBuf },

    #[error("view {view} has {found} rows, expected {expected}")]
    RowCountMismatch { view: usize, expected: usize, found: usize },

    #[error("label vector has length {found}, expected {expected}")]
    LabelLength { expected: usize, found: usize },

    #[error("view {view}, row {row}: all-zero sample has no cosine direction")]
    ZeroSample { view: usize, row: usize },

    #[error("view {view}: {message}")]
    InvalidView { view: usize, message: String },

    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),

    #[error("zero-norm vector in cosine distance")]
    ZeroNorm,

    #[error("vectors have lengths {0} and {1}")]
    DimensionMismatch(usize, usize),

    #[error("invalid distance matrix: {0}")]
    InvalidMatrix(String),

    #[error("distance matrices have orders {expected} and {found}")]
    OrderMismatch { expected: usize, found: usize },

    #[error("no views or matrices supplied")]
    EmptyInput,

    #[error("nearest-neighbor search needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),

    #[error("node {0} is its own nearest neighbor")]
    SelfLoop(usize),

    #[error("cluster {cluster} has a zero-norm mean in view {view}")]
    DegenerateRepresentative { cluster: usize, view: usize },

    #[error("partition covers {found} samples, expected {expected}")]
    PartitionLength { expected: usize, found: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid hierarchy document: {0}")]
    InvalidDocument(String),

    #[error("requested {requested} clusters, but the valid range is 1..={max}")]
    ClusterCount { requested: usize, max: usize },

    #[error("label vectors have lengths {0} and {1}")]
    LengthMismatch(usize, usize),

    #[error("empty label vector")]
    EmptyLabels,

    #[error("cost matrix must be square with finite entries")]
    InvalidCost,
}

impl MhcError {
    /// True for failures of the filesystem, as opposed to bad content.
    pub fn is_io(&self) -> bool {
        matches!(self, MhcError::Io { .. })
    }
}
