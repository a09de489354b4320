//! Multi-view data: loading, validation and synthetic generation.
//!
//! Every view stores samples as rows (`n × dim_i`). Column-per-sample data
//! must be transposed before loading. Features are used exactly as given;
//! no centering or scaling is applied.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{MhcError, Result};
use crate::matrix::Matrix;

/// The same `n` samples described by `v` feature matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiViewDataset {
    views: Vec<Matrix>,
    labels: Option<Vec<usize>>,
}

impl MultiViewDataset {
    /// Validates and wraps the views.
    ///
    /// Every view must have the same number of rows (at least 2), at least
    /// one column, only finite entries and no all-zero row.
    pub fn new(views: Vec<Matrix>, labels: Option<Vec<usize>>) -> Result<Self> {
        let first = views.first().ok_or(MhcError::EmptyInput)?;
        let n = first.rows();
        for (i, view) in views.iter().enumerate() {
            if view.rows() != n {
                return Err(MhcError::RowCountMismatch {
                    view: i + 1,
                    expected: n,
                    found: view.rows(),
                });
            }
            validate_view(i + 1, view)?;
        }
        if let Some(labels) = &labels {
            if labels.len() != n {
                return Err(MhcError::LabelLength {
                    expected: n,
                    found: labels.len(),
                });
            }
        }
        Ok(MultiViewDataset { views, labels })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.views[0].rows()
    }

    #[inline]
    pub fn v(&self) -> usize {
        self.views.len()
    }

    pub fn views(&self) -> &[Matrix] {
        &self.views
    }

    pub fn view(&self, i: usize) -> &Matrix {
        &self.views[i]
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.views.iter().map(Matrix::cols).collect()
    }
}

fn validate_view(view: usize, m: &Matrix) -> Result<()> {
    if m.rows() < 2 {
        return Err(MhcError::InvalidView {
            view,
            message: format!("needs at least 2 samples, got {}", m.rows()),
        });
    }
    if m.cols() == 0 {
        return Err(MhcError::InvalidView {
            view,
            message: "has no feature columns".into(),
        });
    }
    for (r, row) in m.iter_rows().enumerate() {
        if let Some(c) = row.iter().position(|x| !x.is_finite()) {
            return Err(MhcError::InvalidView {
                view,
                message: format!("row {}, column {}: non-finite value", r + 1, c + 1),
            });
        }
        if row.iter().all(|&x| x == 0.0) {
            return Err(MhcError::ZeroSample { view, row: r + 1 });
        }
    }
    Ok(())
}

/// Options for reading delimited view files.
#[derive(Clone, Copy, Debug, Default)]
pub struct LoadOptions {
    /// Skip the first line of every view file.
    pub header: bool,
}

/// Loads one view file per path (in argument order) plus optional labels.
pub fn load_dataset<P: AsRef<Path>>(
    view_paths: &[P],
    label_path: Option<&Path>,
    options: LoadOptions,
) -> Result<MultiViewDataset> {
    if view_paths.is_empty() {
        return Err(MhcError::EmptyInput);
    }
    let mut views = Vec::with_capacity(view_paths.len());
    for path in view_paths {
        let path = path.as_ref();
        let bytes = read(path)?;
        views.push(parse_view(&bytes, path, options)?);
    }
    let labels = match label_path {
        Some(path) => Some(parse_labels(&read(path)?, path)?),
        None => None,
    };
    MultiViewDataset::new(views, labels)
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| MhcError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_error(path: &Path, row: usize, column: usize, message: impl Into<String>) -> MhcError {
    MhcError::Parse {
        path: path.to_path_buf(),
        row,
        column,
        message: message.into(),
    }
}

/// Parses a comma- or tab-delimited view. The delimiter is chosen from the
/// first line: tab if it contains one, comma otherwise. Blank lines are
/// skipped; rows and columns in errors are 1-based file positions.
pub fn parse_view(bytes: &[u8], path: &Path, options: LoadOptions) -> Result<Matrix> {
    let text = std::str::from_utf8(bytes).map_err(|e| parse_error(path, 0, 0, e.to_string()))?;
    let mut lines = text.lines().enumerate();
    if options.header {
        lines.next();
    }
    let delimiter = match text.lines().nth(usize::from(options.header)) {
        Some(line) if line.contains('\t') => '\t',
        _ => ',',
    };

    let mut cols = None;
    let mut data = Vec::new();
    let mut rows = 0;
    for (lineno, line) in lines {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let row = lineno + 1;
        let mut count = 0;
        for (c, cell) in line.split(delimiter).enumerate() {
            let cell = cell.trim();
            let value: f64 = cell
                .parse()
                .map_err(|_| parse_error(path, row, c + 1, format!("cannot parse {cell:?} as a number")))?;
            if !value.is_finite() {
                return Err(parse_error(path, row, c + 1, "non-finite value"));
            }
            data.push(value);
            count += 1;
        }
        match cols {
            None => cols = Some(count),
            Some(expected) if expected != count => {
                return Err(parse_error(
                    path,
                    row,
                    count.min(expected) + 1,
                    format!("expected {expected} columns, found {count}"),
                ));
            }
            Some(_) => {}
        }
        rows += 1;
    }
    match cols {
        Some(cols) => Ok(Matrix::from_vec(rows, cols, data)),
        None => Err(MhcError::EmptyFile {
            path: path.to_path_buf(),
        }),
    }
}

/// One non-negative integer per non-blank line.
pub fn parse_labels(bytes: &[u8], path: &Path) -> Result<Vec<usize>> {
    let text = std::str::from_utf8(bytes).map_err(|e| parse_error(path, 0, 0, e.to_string()))?;
    let mut labels = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let cell = line.trim();
        if cell.is_empty() {
            continue;
        }
        let label = cell
            .parse()
            .map_err(|_| parse_error(path, lineno + 1, 1, format!("{cell:?} is not a non-negative integer")))?;
        labels.push(label);
    }
    if labels.is_empty() {
        return Err(MhcError::EmptyFile {
            path: path.to_path_buf(),
        });
    }
    Ok(labels)
}

pub fn load_labels(path: &Path) -> Result<Vec<usize>> {
    parse_labels(&read(path)?, path)
}

/// Parameters of the synthetic blob generator.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub n: usize,
    /// Number of true clusters.
    pub clusters: usize,
    /// Feature dimensionality of each view; its length is the view count.
    pub dims: Vec<usize>,
    /// Angular spread of the cluster centers around a shared base direction.
    /// Zero puts every center on the same ray.
    pub separation: f64,
    /// Standard deviation of the isotropic Gaussian noise per coordinate.
    pub noise: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(MhcError::InvalidSpec(msg));
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        if self.clusters == 0 || self.clusters > self.n {
            return bad(format!("clusters must be in 1..={}, got {}", self.n, self.clusters));
        }
        if self.dims.is_empty() {
            return bad("at least one view is required".into());
        }
        if let Some(d) = self.dims.iter().find(|&&d| d < 2) {
            return bad(format!("every view needs at least 2 dimensions, got {d}"));
        }
        if !(self.separation.is_finite() && self.separation >= 0.0) {
            return bad(format!("separation must be finite and >= 0, got {}", self.separation));
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return bad(format!("noise must be finite and >= 0, got {}", self.noise));
        }
        Ok(())
    }
}

/// Generates `spec.n` samples in `spec.clusters` balanced clusters.
///
/// All views share one shuffled sample-to-cluster assignment. Each view
/// draws its own base direction, cluster centers and noise. A center is
/// `normalize(base + separation * g)` for a random unit vector `g`, so the
/// expected cosine distance between centers grows with `separation`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<MultiViewDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut labels: Vec<usize> = (0..spec.n).map(|i| i * spec.clusters / spec.n).collect();
    labels.shuffle(&mut rng);

    let mut views = Vec::with_capacity(spec.dims.len());
    for &dim in &spec.dims {
        let base = random_unit(&mut rng, dim);
        let centers: Vec<Vec<f64>> = (0..spec.clusters)
            .map(|_| {
                let g = random_unit(&mut rng, dim);
                let c: Vec<f64> = base.iter().zip(&g).map(|(b, g)| b + spec.separation * g).collect();
                normalized(c).unwrap_or_else(|| base.clone())
            })
            .collect();

        let mut data = Vec::with_capacity(spec.n * dim);
        for &label in &labels {
            for &c in &centers[label] {
                let eps: f64 = StandardNormal.sample(&mut rng);
                data.push(c + spec.noise * eps);
            }
        }
        views.push(Matrix::from_vec(spec.n, dim, data));
    }
    MultiViewDataset::new(views, Some(labels))
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut *rng)).collect();
        if let Some(u) = normalized(v) {
            return u;
        }
    }
}

fn normalized(mut v: Vec<f64>) -> Option<Vec<f64>> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    Some(v)
}

/// Writes a view as comma-separated rows using the shortest exact decimal form.
pub fn format_view(view: &Matrix) -> String {
    let mut out = String::new();
    for row in view.iter_rows() {
        let cells: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn format_labels(labels: &[usize]) -> String {
    let mut out = String::with_capacity(labels.len() * 3);
    for l in labels {
        out.push_str(&l.to_string());
        out.push('\n');
    }
    out
}

/// Paths of the files written for a synthetic dataset with the given prefix.
pub fn synthetic_paths(prefix: &str, views: usize) -> (Vec<PathBuf>, PathBuf) {
    let views = (1..=views)
        .map(|i| PathBuf::from(format!("{prefix}_view{i}.csv")))
        .collect();
    (views, PathBuf::from(format!("{prefix}_labels.txt")))
}
