//! JSON form of a fitted hierarchy.

use serde::{Deserialize, Serialize};

use super::{Hierarchy, MergeStats};
use crate::error::{MhcError, Result};
use crate::partition::Partition;

pub const FORMAT_VERSION: &str = "mhc-hierarchy/1";

/// Provenance attached to structured outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    /// `(file name as given, sha256 hex)` for every input file, in order.
    pub inputs: Vec<InputDigest>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub level_sizes: Vec<usize>,
    /// Omitted from hierarchy files so they stay byte-stable.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub clusters: usize,
    pub merge_distance: MergeStats,
    pub assignment: Partition,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HierarchyDocument {
    pub format: String,
    pub n: usize,
    pub v: usize,
    pub level_sizes: Vec<usize>,
    pub levels: Vec<LevelRecord>,
    pub manifest: RunManifest,
}

impl HierarchyDocument {
    pub fn new(hierarchy: &Hierarchy, v: usize, manifest: RunManifest) -> Self {
        let levels: Vec<LevelRecord> = hierarchy
            .levels()
            .iter()
            .zip(hierarchy.merge_stats())
            .map(|(p, s)| LevelRecord {
                clusters: p.num_clusters(),
                merge_distance: *s,
                assignment: p.clone(),
            })
            .collect();
        HierarchyDocument {
            format: FORMAT_VERSION.to_string(),
            n: hierarchy.levels().first().map_or(0, Partition::len),
            v,
            level_sizes: hierarchy.level_sizes(),
            levels,
            manifest,
        }
    }

    /// Checks internal consistency: format tag, lengths, sizes and nesting.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(MhcError::InvalidDocument(m));
        if self.format != FORMAT_VERSION {
            return bad(format!("unsupported hierarchy format {:?}", self.format));
        }
        if self.levels.is_empty() || self.levels.len() != self.level_sizes.len() {
            return bad("level_sizes does not match levels".into());
        }
        for (i, level) in self.levels.iter().enumerate() {
            if level.assignment.len() != self.n {
                return bad(format!(
                    "level {i} covers {} samples, expected {}",
                    level.assignment.len(),
                    self.n
                ));
            }
            if level.assignment.num_clusters() != level.clusters || level.clusters != self.level_sizes[i] {
                return bad(format!("level {i} cluster count is inconsistent"));
            }
        }
        for (i, pair) in self.levels.windows(2).enumerate() {
            if pair[1].clusters >= pair[0].clusters || !pair[0].assignment.refines(&pair[1].assignment) {
                return bad(format!("level {} is not a strict coarsening of level {i}", i + 1));
            }
        }
        Ok(())
    }

    pub fn partitions(&self) -> Vec<Partition> {
        self.levels.iter().map(|l| l.assignment.clone()).collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("hierarchy serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: HierarchyDocument =
            serde_json::from_str(text).map_err(|e| MhcError::InvalidDocument(e.to_string()))?;
        doc.validate()?;
        Ok(doc)
    }
}
