//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any binding criterion fails.
//!
//! Set `MHC_UCI_DIR` to a directory holding `view*.csv` feature files and a
//! `labels.txt` to run the non-binding handwritten-digits comparison.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mhc_cli::bench::{self, BenchConfig};
use mhc_core::cdi::{integrated_distance_matrix, DistanceMatrix};
use mhc_core::dataset::{generate_synthetic, load_dataset, LoadOptions, SyntheticSpec};
use mhc_core::hierarchy::{self, closest_level, refine_to_k, Hierarchy};
use mhc_core::metrics::{accuracy, evaluate, f_measure, nmi, optimal_assignment};
use mhc_core::nna::{
    build_graph, connected_components, nearest_from_matrix, nearest_neighbors_exact, nearest_neighbors_fast,
    ClusterRepresentatives,
};
use mhc_core::{Matrix, MultiViewDataset, NnBackend, Result as MhcResult};

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit_secs: f64, detail: String) -> Outcome {
    let secs = elapsed.as_secs_f64();
    if secs < limit_secs {
        Ok(detail)
    } else {
        Err(format!("{detail}; took {secs:.2} s, limit {limit_secs} s"))
    }
}

fn random_view(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Matrix {
    loop {
        let data: Vec<f64> = (0..n * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        if data.chunks(dim).all(|row| row.iter().any(|&x| x != 0.0)) {
            return Matrix::from_vec(n, dim, data);
        }
    }
}

/// Coordinates from {1, 2, 3}: many exactly tied cosine distances.
fn grid_view(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Matrix {
    Matrix::from_vec(n, dim, (0..n * dim).map(|_| rng.random_range(1..=3) as f64).collect())
}

/// Uniform, tie-heavy or clustered data, chosen by `i`.
fn test_dataset(rng: &mut ChaCha8Rng, i: usize, n: usize) -> MultiViewDataset {
    let v = rng.random_range(1..=3);
    match i % 3 {
        0 => {
            let views = (0..v).map(|_| {
                let dim = rng.random_range(2..=12);
                random_view(rng, n, dim)
            });
            MultiViewDataset::new(views.collect(), None).unwrap()
        }
        1 => {
            let views = (0..v).map(|_| {
                let dim = rng.random_range(2..=4);
                grid_view(rng, n, dim)
            });
            MultiViewDataset::new(views.collect(), None).unwrap()
        }
        _ => generate_synthetic(&SyntheticSpec {
            n,
            clusters: rng.random_range(1..=n.min(12)),
            dims: (0..v).map(|_| rng.random_range(2..=16)).collect(),
            separation: rng.random_range(0.2..2.0),
            noise: rng.random_range(0.0..0.3),
            seed: rng.random(),
        })
        .unwrap(),
    }
}

fn random_orthogonal(rng: &mut ChaCha8Rng, dim: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
    a.qr().q()
}

fn max_abs_diff(a: &DistanceMatrix, b: &DistanceMatrix) -> f64 {
    let n = a.order();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            worst = worst.max((a.get(i, j) - b.get(i, j)).abs());
        }
    }
    worst
}

fn orthogonal_invariance() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(2..=200);
        let v = rng.random_range(1..=3);
        let mut views = Vec::new();
        let mut rotated = Vec::new();
        for _ in 0..v {
            let dim = rng.random_range(1..=32);
            let x = random_view(&mut rng, n, dim);
            let q = random_orthogonal(&mut rng, dim);
            let xm = DMatrix::from_row_slice(n, dim, x.as_slice());
            let y = xm * q;
            let rows: Vec<f64> = (0..n)
                .flat_map(|r| (0..dim).map(move |c| (r, c)))
                .map(|(r, c)| y[(r, c)])
                .collect();
            rotated.push(Matrix::from_vec(n, dim, rows));
            views.push(x);
        }
        let a = integrated_distance_matrix(&views).unwrap();
        let b = integrated_distance_matrix(&rotated).unwrap();
        worst = worst.max(max_abs_diff(&a, &b));
    }
    let detail = format!("100 datasets, max |ΔD*| = {worst:.2e} (tol 1e-9)");
    if worst > 1e-9 {
        return Err(detail);
    }
    within(start.elapsed(), 10.0, detail)
}

fn levels_valid(h: &Hierarchy) -> bool {
    let sizes = h.level_sizes();
    let decreasing = sizes.windows(2).all(|w| w[1] < w[0]);
    let nested = h.levels().windows(2).all(|w| w[0].refines(&w[1]));
    decreasing && nested && sizes.last() == Some(&1)
}

fn tree_equals_exact(checked: &mut Vec<Hierarchy>) -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    let mut mismatches = 0;
    for i in 0..50 {
        let n = 40 * (i + 1);
        let data = test_dataset(&mut rng, i, n);
        let reps = ClusterRepresentatives::from_dataset(&data);
        let fast = nearest_neighbors_fast(&reps).unwrap();
        let exact = nearest_neighbors_exact(&reps).unwrap();
        let same = fast
            .iter()
            .zip(&exact)
            .all(|(a, b)| a.index == b.index && a.distance.to_bits() == b.distance.to_bits());
        let tree = hierarchy::fit_with_backend(&data, NnBackend::Tree).unwrap();
        let brute = hierarchy::fit_with_backend(&data, NnBackend::Exact).unwrap();
        if !same || tree.levels() != brute.levels() {
            mismatches += 1;
        }
        checked.push(tree);
    }
    let detail = format!("50 datasets, n = 40..2000, {mismatches} mismatching");
    if mismatches > 0 {
        return Err(detail);
    }
    within(start.elapsed(), 30.0, detail)
}

fn hierarchy_invariants(checked: &[Hierarchy]) -> Outcome {
    // Compiles only while fit takes nothing but the data.
    let _: fn(&MultiViewDataset) -> MhcResult<Hierarchy> = hierarchy::fit;
    let bad = checked.iter().filter(|h| !levels_valid(h)).count();
    check(
        bad == 0,
        format!(
            "{} hierarchies, {bad} with non-decreasing, non-nested or non-terminal levels",
            checked.len()
        ),
    )
}

fn merge_guarantee() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(300);
    let mut failures = 0;
    for case in 0..1000 {
        let k = rng.random_range(2..=60);
        // Every fourth case draws from five values so that ties are common.
        let coarse = case % 4 == 0;
        let values: Vec<f64> = (0..k * k)
            .map(|_| {
                if coarse {
                    rng.random_range(0..5) as f64 / 4.0
                } else {
                    rng.random_range(0.0..2.0)
                }
            })
            .collect();
        let matrix = DistanceMatrix::from_pairs(k, |a, b| values[a * k + b]);
        let nearest: Vec<usize> = nearest_from_matrix(&matrix)
            .unwrap()
            .iter()
            .map(|nb| nb.index)
            .collect();
        let partition = connected_components(&build_graph(&nearest).unwrap());
        let ok = partition.num_clusters() < k && partition.sizes().iter().all(|&s| s >= 2);
        if !ok {
            failures += 1;
        }
    }
    check(failures == 0, format!("1000 configurations, {failures} violating"))
}

fn end_to_end() -> Outcome {
    let data = generate_synthetic(&SyntheticSpec {
        n: 300,
        clusters: 3,
        dims: vec![16, 16],
        separation: 1.0,
        noise: 0.05,
        seed: 1,
    })
    .unwrap();
    let start = Instant::now();
    let tree = hierarchy::fit(&data).unwrap();
    let labels = hierarchy::cut(&tree, &data, 3).unwrap();
    let elapsed = start.elapsed();
    let r = evaluate(data.labels().unwrap(), labels.assignment()).unwrap();
    let detail = format!("ACC {:.4} NMI {:.4} F {:.4}", r.acc, r.nmi, r.f_measure);
    if r.acc < 0.99 || r.nmi < 0.95 || r.f_measure < 0.99 {
        return Err(detail);
    }
    within(elapsed, 1.0, detail)
}

fn exact_k(checked: &mut Vec<Hierarchy>) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(400);
    let mut failures = 0;
    let mut cuts = 0;
    for case in 0..200 {
        let n = rng.random_range(2..=80);
        let data = test_dataset(&mut rng, case, n);
        let tree = hierarchy::fit(&data).unwrap();
        let finest = tree.level_sizes()[0];
        for m in 1..=finest {
            let closest = closest_level(tree.levels(), m).unwrap();
            let out = refine_to_k(&data, closest, m).unwrap();
            cuts += 1;
            if out.num_clusters() != m || !closest.refines(&out) {
                failures += 1;
            }
        }
        checked.push(tree);
    }
    check(failures == 0, format!("200 hierarchies, {cuts} cuts, {failures} wrong"))
}

fn exhaustive_min(cost: &[Vec<f64>]) -> f64 {
    fn go(cost: &[Vec<f64>], row: usize, used: &mut [bool]) -> f64 {
        if row == cost.len() {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for c in 0..cost.len() {
            if !used[c] {
                used[c] = true;
                best = best.min(cost[row][c] + go(cost, row + 1, used));
                used[c] = false;
            }
        }
        best
    }
    go(cost, 0, &mut vec![false; cost.len()])
}

// Compared against the four-decimal reference figure.
#[allow(clippy::approx_constant)]
fn metric_goldens() -> Outcome {
    let acc = accuracy(&[0, 0, 1, 1], &[1, 1, 0, 0]).unwrap();
    let independent = nmi(&[0, 1, 0, 1], &[0, 0, 1, 1]).unwrap();
    let refinement = nmi(&[0, 0, 1, 1], &[0, 1, 2, 3]).unwrap();
    let f = f_measure(&[0, 0, 1, 1], &[0, 0, 0, 1]).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(500);
    let mut hungarian_bad = 0;
    for case in 0..100 {
        let k = case % 7 + 1;
        let cost: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..k).map(|_| rng.random_range(0.0..10.0)).collect())
            .collect();
        let perm = optimal_assignment(&cost).unwrap();
        let total: f64 = perm.iter().enumerate().map(|(r, &c)| cost[r][c]).sum();
        if (total - exhaustive_min(&cost)).abs() > 1e-9 {
            hungarian_bad += 1;
        }
    }

    let detail = format!(
        "ACC {acc:.4}, NMI independent {independent:.4}, NMI refinement {refinement:.4}, F {f:.4}, \
         Hungarian {hungarian_bad}/100 off"
    );
    let ok = format!("{acc:.4}") == "1.0000"
        && format!("{independent:.4}") == "0.0000"
        && (refinement - 0.7071).abs() <= 1e-4
        && (f - 0.4).abs() <= 1e-12
        && hungarian_bad == 0;
    check(ok, detail)
}

fn complexity() -> Outcome {
    let start = Instant::now();
    let report = bench::run(&BenchConfig::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let slope = report.slope.expect("three sizes");
    let times: Vec<String> = report
        .rows
        .iter()
        .map(|r| format!("{}:{:.0}ms", r.n, r.seconds * 1e3))
        .collect();
    let detail = format!("slope {slope:.3} (limit 1.5), {}", times.join(" "));
    if slope > 1.5 {
        return Err(detail);
    }
    within(elapsed, 300.0, detail)
}

/// Reports the handwritten-digits comparison when features are supplied.
fn uci_digits() -> Option<String> {
    let dir = PathBuf::from(std::env::var_os("MHC_UCI_DIR")?);
    let mut views: Vec<PathBuf> = std::fs::read_dir(&dir)
        .ok()?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().and_then(|s| s.to_str()).unwrap_or("");
            name.starts_with("view") && name.ends_with(".csv")
        })
        .collect();
    views.sort();
    let data = match load_dataset(&views, Some(&dir.join("labels.txt")), LoadOptions::default()) {
        Ok(d) => d,
        Err(e) => return Some(format!("could not load {}: {e}", dir.display())),
    };
    let tree = hierarchy::fit(&data).ok()?;
    let labels = hierarchy::cut(&tree, &data, 10).ok()?;
    let score = nmi(data.labels()?, labels.assignment()).ok()?;
    Some(format!(
        "levels {:?} (reference 464 109 27 9 4 1), cut(10) NMI {score:.4} (reference 0.916)",
        tree.level_sizes()
    ))
}

fn main() -> ExitCode {
    let mut checked = Vec::new();
    let mut results = vec![
        ("orthogonal invariance", orthogonal_invariance()),
        ("tree equals exact", tree_equals_exact(&mut checked)),
        ("exact-k contract", exact_k(&mut checked)),
    ];
    results.extend([
        ("hierarchy invariants", hierarchy_invariants(&checked)),
        ("merge guarantee", merge_guarantee()),
        ("end-to-end quality", end_to_end()),
        ("metric golden values", metric_goldens()),
        ("complexity slope", complexity()),
    ]);
    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    match uci_digits() {
        Some(detail) => println!("INFO  handwritten digits (non-binding): {detail}"),
        None => println!("SKIP  handwritten digits (non-binding): MHC_UCI_DIR not set"),
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
