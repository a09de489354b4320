//! Cosine distance integration.
//!
//! Each view yields a cosine distance matrix; the integrated ("essential")
//! matrix is their arithmetic mean. Cosine distance is unchanged when every
//! sample of a view is mapped through the same matrix with orthonormal
//! columns, so views generated from one latent representation by such maps
//! all agree with the latent distance, and averaging them pools what each
//! view observes.
//!
//! All pairwise values in this crate go through [`cosine_from_parts`] and
//! [`IntegratedCosine::distance`], so the dense matrices here and the
//! nearest-neighbor searches in [`crate::nna`] see bit-identical distances.

use std::fmt::Write as _;

use crate::error::{MhcError, Result};
use crate::matrix::Matrix;
use crate::par;

#[inline]
pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// `1 - dot / (‖x‖‖y‖)` from the dot product and squared norms, clamped to
/// `[0, 2]`. Identical vectors give exactly zero.
#[inline]
pub fn cosine_from_parts(dot: f64, sq_norm_x: f64, sq_norm_y: f64) -> f64 {
    let mut denom = (sq_norm_x * sq_norm_y).sqrt();
    if !denom.is_finite() || denom == 0.0 {
        denom = sq_norm_x.sqrt() * sq_norm_y.sqrt();
    }
    (1.0 - dot / denom).clamp(0.0, 2.0)
}

/// Cosine distance between two equal-length, nonzero vectors.
pub fn cosine_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(MhcError::DimensionMismatch(x.len(), y.len()));
    }
    let (nx, ny) = (dot(x, x), dot(y, y));
    if nx == 0.0 || ny == 0.0 {
        return Err(MhcError::ZeroNorm);
    }
    Ok(cosine_from_parts(dot(x, y), nx, ny))
}

/// Symmetric `n × n` distance matrix whose diagonal is `+inf`, so a node
/// never selects itself as nearest neighbor.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    values: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds a matrix from the upper triangle: `f(a, b)` is called once for
    /// every `a < b` and mirrored.
    pub fn from_pairs<F>(n: usize, f: F) -> Self
    where
        F: Fn(usize, usize) -> f64 + Sync + Send,
    {
        let upper: Vec<Vec<f64>> = par::map_indices(n, |a| ((a + 1)..n).map(|b| f(a, b)).collect());
        let mut values = vec![f64::INFINITY; n * n];
        for (a, row) in upper.into_iter().enumerate() {
            for (offset, d) in row.into_iter().enumerate() {
                let b = a + 1 + offset;
                values[a * n + b] = d;
                values[b * n + a] = d;
            }
        }
        DistanceMatrix { n, values }
    }

    /// Wraps a full row-major buffer. Symmetry and the diagonal are checked.
    pub fn from_dense(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(MhcError::OrderMismatch {
                expected: n * n,
                found: values.len(),
            });
        }
        for a in 0..n {
            if values[a * n + a] != f64::INFINITY {
                return Err(MhcError::InvalidMatrix(format!("diagonal entry {a} is not +inf")));
            }
            for b in (a + 1)..n {
                if values[a * n + b] != values[b * n + a] || values[a * n + b].is_nan() {
                    return Err(MhcError::InvalidMatrix(format!("entries ({a},{b}) are not symmetric")));
                }
            }
        }
        Ok(DistanceMatrix { n, values })
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values[a * self.n + b]
    }

    pub fn row(&self, a: usize) -> &[f64] {
        &self.values[a * self.n..(a + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Comma-separated rows; the diagonal is written as `inf`.
    pub fn to_delimited(&self) -> String {
        let mut out = String::new();
        for a in 0..self.n {
            for (b, d) in self.row(a).iter().enumerate() {
                if b > 0 {
                    out.push(',');
                }
                if d.is_infinite() {
                    out.push_str("inf");
                } else {
                    let _ = write!(out, "{d:?}");
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Cosine distance matrix of one view (rows are samples).
pub fn view_distance_matrix(view: &Matrix) -> Result<DistanceMatrix> {
    let norms = sq_norms(view);
    if norms.contains(&0.0) {
        return Err(MhcError::ZeroNorm);
    }
    Ok(DistanceMatrix::from_pairs(view.rows(), |a, b| {
        cosine_from_parts(dot(view.row(a), view.row(b)), norms[a], norms[b])
    }))
}

/// Entry-wise mean of per-view matrices, summed in list order.
pub fn integrate_distances(matrices: &[DistanceMatrix]) -> Result<DistanceMatrix> {
    let first = matrices.first().ok_or(MhcError::EmptyInput)?;
    let n = first.order();
    if let Some(m) = matrices.iter().find(|m| m.order() != n) {
        return Err(MhcError::OrderMismatch {
            expected: n,
            found: m.order(),
        });
    }
    let v = matrices.len() as f64;
    let mut values = vec![f64::INFINITY; n * n];
    for a in 0..n {
        for b in 0..n {
            if a != b {
                let sum: f64 = matrices.iter().map(|m| m.get(a, b)).sum();
                values[a * n + b] = sum / v;
            }
        }
    }
    Ok(DistanceMatrix { n, values })
}

/// Integrated matrix over all views: per-view matrices, then their mean.
pub fn integrated_distance_matrix(views: &[Matrix]) -> Result<DistanceMatrix> {
    let per_view = views.iter().map(view_distance_matrix).collect::<Result<Vec<_>>>()?;
    integrate_distances(&per_view)
}

pub(crate) fn sq_norms(m: &Matrix) -> Vec<f64> {
    m.iter_rows().map(|r| dot(r, r)).collect()
}

/// Integrated cosine distance between rows of aligned per-view matrices,
/// evaluated on demand without materializing the dense matrix.
pub struct IntegratedCosine<'a> {
    views: &'a [Matrix],
    sq_norms: Vec<Vec<f64>>,
}

impl<'a> IntegratedCosine<'a> {
    pub fn new(views: &'a [Matrix]) -> Result<Self> {
        let first = views.first().ok_or(MhcError::EmptyInput)?;
        if let Some(m) = views.iter().find(|m| m.rows() != first.rows()) {
            return Err(MhcError::OrderMismatch {
                expected: first.rows(),
                found: m.rows(),
            });
        }
        let sq_norms: Vec<Vec<f64>> = views.iter().map(sq_norms).collect();
        for (view, norms) in sq_norms.iter().enumerate() {
            if let Some(cluster) = norms.iter().position(|&s| s == 0.0) {
                return Err(MhcError::DegenerateRepresentative {
                    cluster,
                    view: view + 1,
                });
            }
        }
        Ok(IntegratedCosine { views, sq_norms })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.views[0].rows()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn views(&self) -> &[Matrix] {
        self.views
    }

    /// Mean over views of the cosine distance between rows `a` and `b`.
    #[inline]
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let sum: f64 = self
            .views
            .iter()
            .zip(&self.sq_norms)
            .map(|(m, s)| cosine_from_parts(dot(m.row(a), m.row(b)), s[a], s[b]))
            .sum();
        sum / self.views.len() as f64
    }

    pub fn to_matrix(&self) -> DistanceMatrix {
        DistanceMatrix::from_pairs(self.len(), |a, b| self.distance(a, b))
    }
}
