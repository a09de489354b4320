//! End-to-end runs of the `mhc` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn mhc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mhc"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn labels(path: &Path) -> Vec<usize> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.trim().parse().unwrap())
        .collect()
}

fn synth(dir: &Path, prefix: &str, n: usize, clusters: usize, seed: u64) {
    let n = n.to_string();
    let clusters = clusters.to_string();
    let seed = seed.to_string();
    stdout(&mhc(
        dir,
        &[
            "synth",
            "--n",
            &n,
            "--views",
            "2",
            "--clusters",
            &clusters,
            "--dims",
            "16,24",
            "--separation",
            "1.0",
            "--noise",
            "0.05",
            "--seed",
            &seed,
            "--out-prefix",
            prefix,
        ],
    ));
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn synth_is_deterministic_with_requested_clusters() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "a", 90, 3, 4);
    synth(dir.path(), "b", 90, 3, 4);
    for suffix in ["_view1.csv", "_view2.csv", "_labels.txt"] {
        let a = fs::read(dir.path().join(format!("a{suffix}"))).unwrap();
        let b = fs::read(dir.path().join(format!("b{suffix}"))).unwrap();
        assert_eq!(a, b, "{suffix}");
    }
    let mut distinct = labels(&dir.path().join("a_labels.txt"));
    distinct.sort_unstable();
    distinct.dedup();
    assert_eq!(distinct, vec![0, 1, 2]);
}

#[test]
fn pipeline_recovers_blobs() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    synth(d, "blob", 300, 3, 1);
    let levels = stdout(&mhc(
        d,
        &["fit", "--views", "blob_view1.csv", "blob_view2.csv", "--out", "h.json"],
    ));
    let sizes: Vec<usize> = levels
        .trim()
        .strip_prefix("levels: ")
        .unwrap()
        .split(' ')
        .map(|s| s.parse().unwrap())
        .collect();
    assert!(sizes.contains(&3), "{levels}");
    assert_eq!(sizes.last(), Some(&1));

    stdout(&mhc(
        d,
        &[
            "cut",
            "--hierarchy",
            "h.json",
            "--views",
            "blob_view1.csv",
            "blob_view2.csv",
            "-k",
            "3",
            "--out",
            "pred.txt",
        ],
    ));
    let pred = labels(&d.join("pred.txt"));
    assert_eq!(pred.len(), 300);
    let report = stdout(&mhc(d, &["eval", "--pred", "pred.txt", "--truth", "blob_labels.txt"]));
    assert_eq!(report.trim(), "ACC 1.0000 NMI 1.0000 F 1.0000");
}

#[test]
fn hierarchy_file_is_byte_stable() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    synth(d, "s", 120, 4, 9);
    let views = ["--views", "s_view1.csv", "s_view2.csv"];
    stdout(&mhc(d, &[&["fit"][..], &views, &["--out", "one.json"]].concat()));
    stdout(&mhc(
        d,
        &[&["fit"][..], &views, &["--out", "two.json", "--nn-backend", "exact"]].concat(),
    ));
    assert_eq!(
        fs::read(d.join("one.json")).unwrap(),
        fs::read(d.join("two.json")).unwrap()
    );
}

#[test]
fn two_samples_give_a_single_level() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "v.csv", "1,0\n0,1\n");
    let out = stdout(&mhc(dir.path(), &["fit", "--views", "v.csv", "--out", "h.json"]));
    assert_eq!(out.trim(), "levels: 1");
}

#[test]
fn mismatched_views_are_a_validation_error_without_output() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "a.csv", "1,0\n0,1\n1,1\n1,2\n");
    write(dir.path(), "b.csv", "1,0\n0,1\n1,1\n1,2\n2,1\n");
    let out = mhc(dir.path(), &["fit", "--views", "a.csv", "b.csv", "--out", "h.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.path().join("h.json").exists());
}

#[test]
fn missing_file_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    let out = mhc(dir.path(), &["fit", "--views", "nope.csv", "--out", "h.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.csv"));
}

#[test]
fn bad_cell_names_file_row_and_column() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "v.csv", "1,0\n0,abc\n");
    let out = mhc(dir.path(), &["fit", "--views", "v.csv", "--out", "h.json"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("v.csv") && err.contains("row 2") && err.contains("column 2"),
        "{err}"
    );
}

/// Unit vectors at the given angles in degrees, one row each.
fn angles(deg: &[f64]) -> String {
    deg.iter()
        .map(|d| {
            let r = d.to_radians();
            format!("{:?},{:?}\n", r.cos(), r.sin())
        })
        .collect()
}

#[test]
fn seven_sample_walkthrough() {
    // Pairs {0,1}, {2,3}, {4,5}; sample 6 attaches to sample 3.
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    write(d, "a.csv", &angles(&[0.0, 2.0, 40.0, 42.0, 80.0, 82.0, 47.0]));
    write(d, "b.csv", &angles(&[1.0, 3.0, 41.0, 43.0, 81.0, 83.0, 48.0]));
    let levels = stdout(&mhc(d, &["fit", "--views", "a.csv", "b.csv", "--out", "h.json"]));
    assert_eq!(levels.trim(), "levels: 3 1");

    let cut = |k: &str, out: &str| {
        stdout(&mhc(
            d,
            &[
                "cut",
                "--hierarchy",
                "h.json",
                "--views",
                "a.csv",
                "b.csv",
                "-k",
                k,
                "--out",
                out,
            ],
        ));
        labels(&d.join(out))
    };
    let three = cut("3", "three.txt");
    assert_eq!(three, vec![0, 0, 1, 1, 2, 2, 1]);
    // One merge of the 3-cluster level: the middle group is closer to the
    // last one than to the first.
    let two = cut("2", "two.txt");
    assert_eq!(two, vec![0, 0, 1, 1, 1, 1, 1]);

    let zero = mhc(
        d,
        &[
            "cut",
            "--hierarchy",
            "h.json",
            "--views",
            "a.csv",
            "b.csv",
            "-k",
            "0",
            "--out",
            "z.txt",
        ],
    );
    assert_eq!(zero.status.code(), Some(1));
    let big = mhc(
        d,
        &[
            "cut",
            "--hierarchy",
            "h.json",
            "--views",
            "a.csv",
            "b.csv",
            "-k",
            "4",
            "--out",
            "z.txt",
        ],
    );
    assert_eq!(big.status.code(), Some(1));
    assert!(!d.join("z.txt").exists());
}

#[test]
fn cut_rejects_other_data() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    write(d, "a.csv", &angles(&[0.0, 2.0, 40.0, 42.0]));
    write(d, "b.csv", &angles(&[0.0, 2.0, 40.0, 43.0]));
    stdout(&mhc(d, &["fit", "--views", "a.csv", "--out", "h.json"]));
    let out = mhc(
        d,
        &[
            "cut",
            "--hierarchy",
            "h.json",
            "--views",
            "b.csv",
            "-k",
            "1",
            "--out",
            "l.txt",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("digest"));
}

#[test]
fn eval_reports_fixed_precision() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    write(d, "t.txt", "0\n0\n1\n1\n");
    write(d, "p.txt", "0\n0\n0\n1\n");
    write(d, "r.txt", "5\n5\n5\n2\n");
    let same = stdout(&mhc(d, &["eval", "--pred", "t.txt", "--truth", "t.txt"]));
    assert_eq!(same.trim(), "ACC 1.0000 NMI 1.0000 F 1.0000");
    let pred = stdout(&mhc(d, &["eval", "--pred", "p.txt", "--truth", "t.txt"]));
    assert!(pred.trim().ends_with("F 0.4000"), "{pred}");
    let relabeled = stdout(&mhc(d, &["eval", "--pred", "r.txt", "--truth", "t.txt"]));
    assert_eq!(pred, relabeled);

    let json: serde_json::Value = serde_json::from_str(&stdout(&mhc(
        d,
        &["eval", "--pred", "p.txt", "--truth", "t.txt", "--json"],
    )))
    .unwrap();
    assert!((json["f_measure"].as_f64().unwrap() - 0.4).abs() < 1e-12);
    assert_eq!(json["n"], 4);
    assert_eq!(json["manifest"]["inputs"].as_array().unwrap().len(), 2);

    write(d, "short.txt", "0\n1\n");
    assert_eq!(
        mhc(d, &["eval", "--pred", "short.txt", "--truth", "t.txt"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn distance_dump_marks_the_diagonal() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    write(d, "v.csv", "1,0\n0,1\n1,1\n");
    stdout(&mhc(
        d,
        &[
            "fit",
            "--views",
            "v.csv",
            "--out",
            "h.json",
            "--dump-distances",
            "d.txt",
        ],
    ));
    let text = fs::read_to_string(d.join("d.txt")).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row[i], "inf");
    }
    let d01: f64 = rows[0][1].parse().unwrap();
    assert!((d01 - 1.0).abs() < 1e-15);
}

#[test]
fn bench_single_size_has_no_slope() {
    let dir = TempDir::new().unwrap();
    let out = stdout(&mhc(
        dir.path(),
        &["bench", "--sizes", "400", "--repeats", "1", "--cluster-size", "100"],
    ));
    assert_eq!(out.lines().count(), 2, "{out}");
    assert!(!out.contains("slope"));
    let bad = mhc(dir.path(), &["bench", "--sizes", "400,200"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn thread_cap_does_not_change_output() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    synth(d, "s", 200, 5, 2);
    let run = |threads: &str, out: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_mhc"))
            .current_dir(d)
            .env("MHC_THREADS", threads)
            .args(["fit", "--views", "s_view1.csv", "s_view2.csv", "--out", out])
            .status()
            .unwrap();
        assert!(status.success());
        fs::read(d.join(out)).unwrap()
    };
    assert_eq!(run("1", "one.json"), run("3", "three.json"));
}
