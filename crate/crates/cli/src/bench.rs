//! Runtime scaling benchmark: fits synthetic datasets of increasing size and
//! estimates the growth exponent of wall time in `n`.

use std::time::Instant;

use mhc_core::dataset::{generate_synthetic, SyntheticSpec};
use mhc_core::hierarchy;
use mhc_core::NnBackend;

use crate::error::Result;

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub backend: NnBackend,
    pub dims: Vec<usize>,
    /// Samples per true cluster; the cluster count grows with `n`.
    pub cluster_size: usize,
    pub separation: f64,
    pub noise: f64,
    pub seed: u64,
    /// Each size is timed this many times and the fastest run kept.
    pub repeats: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            sizes: vec![10_000, 20_000, 40_000],
            backend: NnBackend::Tree,
            dims: vec![16, 16],
            cluster_size: 1000,
            separation: 1.0,
            noise: 0.05,
            seed: 1,
            repeats: 3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchRow {
    pub n: usize,
    pub seconds: f64,
    pub level_sizes: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Least-squares slope of `ln(time)` against `ln(n)`; `None` for fewer
    /// than two sizes.
    pub slope: Option<f64>,
}

pub fn run(config: &BenchConfig) -> Result<BenchReport> {
    let mut rows = Vec::with_capacity(config.sizes.len());
    for &n in &config.sizes {
        let spec = SyntheticSpec {
            n,
            clusters: (n / config.cluster_size.max(1)).clamp(1, n),
            dims: config.dims.clone(),
            separation: config.separation,
            noise: config.noise,
            seed: config.seed,
        };
        let data = generate_synthetic(&spec)?;
        let mut best = f64::INFINITY;
        let mut level_sizes = Vec::new();
        for _ in 0..config.repeats.max(1) {
            let start = Instant::now();
            let tree = hierarchy::fit_with_backend(&data, config.backend)?;
            best = best.min(start.elapsed().as_secs_f64());
            level_sizes = tree.level_sizes();
        }
        rows.push(BenchRow {
            n,
            seconds: best,
            level_sizes,
        });
    }
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.seconds)).collect();
    Ok(BenchReport {
        slope: log_log_slope(&points),
        rows,
    })
}

/// Ordinary least squares slope of `ln y` on `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let len = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / len;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / len;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

impl BenchReport {
    pub fn table(&self) -> String {
        let mut out = format!("{:>10}  {:>12}  levels\n", "n", "time_ms");
        for row in &self.rows {
            let levels: Vec<String> = row.level_sizes.iter().map(usize::to_string).collect();
            out.push_str(&format!(
                "{:>10}  {:>12.1}  {}\n",
                row.n,
                row.seconds * 1e3,
                levels.join(" ")
            ));
        }
        if let Some(slope) = self.slope {
            out.push_str(&format!("slope: {slope:.3}\n"));
        }
        out
    }
}
