use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use mhc_core::dataset::{self, format_labels, format_view, LoadOptions, MultiViewDataset, SyntheticSpec};
use mhc_core::hierarchy::{self, HierarchyDocument, InputDigest, RunManifest};
use mhc_core::metrics::{self, Report};
use mhc_core::{cdi, NnBackend, Partition};

use crate::error::{CliError, Result};

pub const TOOL_VERSION: &str = concat!("mhc ", env!("CARGO_PKG_VERSION"));

/// Writes through a temporary file in the target directory, so a failed
/// command never leaves a partial output behind.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(path, e))?;
    tmp.write_all(contents).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn digest_file(path: &Path) -> Result<InputDigest> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(InputDigest {
        path: path.display().to_string(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}

fn digests(paths: &[PathBuf]) -> Result<Vec<InputDigest>> {
    paths.iter().map(|p| digest_file(p)).collect()
}

fn load(views: &[PathBuf], header: bool) -> Result<MultiViewDataset> {
    Ok(dataset::load_dataset(views, None, LoadOptions { header })?)
}

pub struct FitArgs {
    pub views: Vec<PathBuf>,
    pub header: bool,
    pub backend: NnBackend,
    pub out: PathBuf,
    pub dump_distances: Option<PathBuf>,
}

pub fn fit(args: &FitArgs) -> Result<HierarchyDocument> {
    let data = load(&args.views, args.header)?;
    let tree = hierarchy::fit_with_backend(&data, args.backend)?;
    let manifest = RunManifest {
        command: "fit".into(),
        tool_version: TOOL_VERSION.into(),
        inputs: digests(&args.views)?,
        level_sizes: tree.level_sizes(),
        wall_time_ms: None,
    };
    let doc = HierarchyDocument::new(&tree, data.v(), manifest);
    if let Some(path) = &args.dump_distances {
        let matrix = cdi::integrated_distance_matrix(data.views())?;
        write_atomic(path, matrix.to_delimited().as_bytes())?;
    }
    write_atomic(&args.out, doc.to_json().as_bytes())?;
    Ok(doc)
}

pub fn levels_line(sizes: &[usize]) -> String {
    let sizes: Vec<String> = sizes.iter().map(usize::to_string).collect();
    format!("levels: {}", sizes.join(" "))
}

pub struct CutArgs {
    pub hierarchy: PathBuf,
    pub views: Vec<PathBuf>,
    pub header: bool,
    pub k: usize,
    pub out: PathBuf,
}

pub fn cut(args: &CutArgs) -> Result<Partition> {
    let text = fs::read_to_string(&args.hierarchy).map_err(|e| CliError::io(&args.hierarchy, e))?;
    let doc = HierarchyDocument::from_json(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", args.hierarchy.display())))?;

    let supplied = digests(&args.views)?;
    let expected: Vec<&str> = doc.manifest.inputs.iter().map(|d| d.sha256.as_str()).collect();
    let found: Vec<&str> = supplied.iter().map(|d| d.sha256.as_str()).collect();
    if expected != found {
        return Err(CliError::Validation(format!(
            "{} was fitted on different view files (digest mismatch)",
            args.hierarchy.display()
        )));
    }

    let finest = doc.level_sizes[0];
    if args.k == 0 || args.k > finest {
        return Err(CliError::Validation(format!(
            "k must be in 1..={finest} (the finest level), got {}",
            args.k
        )));
    }
    let data = load(&args.views, args.header)?;
    if data.n() != doc.n {
        return Err(CliError::Validation(format!(
            "hierarchy has n={}, views have n={}",
            doc.n,
            data.n()
        )));
    }
    let labels = hierarchy::cut_levels(&doc.partitions(), &data, args.k)?;
    write_atomic(&args.out, format_labels(labels.assignment()).as_bytes())?;
    Ok(labels)
}

#[derive(Serialize)]
pub struct EvalOutput {
    #[serde(flatten)]
    pub report: Report,
    pub n: usize,
    pub manifest: RunManifest,
}

pub fn eval(pred: &Path, truth: &Path) -> Result<EvalOutput> {
    let start = Instant::now();
    let pred_labels = dataset::load_labels(pred)?;
    let truth_labels = dataset::load_labels(truth)?;
    let report = metrics::evaluate(&truth_labels, &pred_labels)?;
    Ok(EvalOutput {
        report,
        n: truth_labels.len(),
        manifest: RunManifest {
            command: "eval".into(),
            tool_version: TOOL_VERSION.into(),
            inputs: vec![digest_file(pred)?, digest_file(truth)?],
            level_sizes: Vec::new(),
            wall_time_ms: Some(start.elapsed().as_millis() as u64),
        },
    })
}

pub fn report_line(r: &Report) -> String {
    format!("ACC {:.4} NMI {:.4} F {:.4}", r.acc, r.nmi, r.f_measure)
}

/// Writes `<prefix>_view<i>.csv` for every view and `<prefix>_labels.txt`.
pub fn synth(spec: &SyntheticSpec, prefix: &str) -> Result<Vec<PathBuf>> {
    let data = dataset::generate_synthetic(spec)?;
    let (view_paths, label_path) = dataset::synthetic_paths(prefix, data.v());
    let mut contents: Vec<(PathBuf, String)> = view_paths
        .into_iter()
        .zip(data.views())
        .map(|(p, v)| (p, format_view(v)))
        .collect();
    let labels = data.labels().expect("generator always sets labels");
    contents.push((label_path, format_labels(labels)));
    for (path, text) in &contents {
        write_atomic(path, text.as_bytes())?;
    }
    Ok(contents.into_iter().map(|(p, _)| p).collect())
}

/// Parses `16,24` into per-view dimensions; a single value is repeated for
/// every view.
pub fn expand_dims(dims: &[usize], views: usize) -> Result<Vec<usize>> {
    match dims.len() {
        1 => Ok(vec![dims[0]; views]),
        n if n == views => Ok(dims.to_vec()),
        n => Err(CliError::Validation(format!(
            "--dims has {n} entries for {views} views"
        ))),
    }
}
