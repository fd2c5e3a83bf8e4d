use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bops::experiment::{AggregateRow, RawRow};

fn bops(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bops")).args(args).output().expect("binary runs")
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn read_rows<T: serde::de::DeserializeOwned>(path: &Path) -> Vec<T> {
    csv::Reader::from_path(path).unwrap().deserialize().map(Result::unwrap).collect()
}

fn header(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn run_writes_raw_and_aggregate_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = bops(&[
        "run",
        "--benchmark",
        "synthetic:d=6",
        "--algo",
        "bops-h",
        "--iters",
        "30",
        "--init",
        "20",
        "--reps",
        "3",
        "--seed",
        "7",
        "--restarts",
        "3",
        "--jobs",
        "2",
        "--out",
        out,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let raw_path = dir.path().join("bops-h-raw.csv");
    let agg_path = dir.path().join("bops-h-aggregate.csv");
    assert_eq!(header(&raw_path), "rep,phase,iter,permutation,value,best_so_far,seconds");
    assert_eq!(header(&agg_path), "iter,mean_best,stderr_best,median_best");
    let raw: Vec<RawRow> = read_rows(&raw_path);
    assert_eq!(raw.len(), 150);
    assert_eq!(raw.iter().filter(|r| r.phase == "init").count(), 60);
    let agg: Vec<AggregateRow> = read_rows(&agg_path);
    assert_eq!(agg.len(), 50);

    // aggregates recomputed from the raw rows
    for row in &agg {
        let mut v: Vec<f64> = raw.iter().filter(|r| r.iter == row.iter).map(|r| r.best_so_far).collect();
        assert_eq!(v.len(), 3);
        let mean = v.iter().sum::<f64>() / 3.0;
        let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 2.0).sqrt();
        v.sort_by(f64::total_cmp);
        assert!((row.mean_best - mean).abs() < 1e-9);
        assert!((row.stderr_best - sd / 3f64.sqrt()).abs() < 1e-9);
        assert!((row.median_best - v[1]).abs() < 1e-9);
    }
    let echo: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("bops-h-config.json")).unwrap()).unwrap();
    assert_eq!(echo["benchmark"], "synthetic:d=6,noise=0");
    assert_eq!(echo["replication_seeds"].as_array().unwrap().len(), 3);
}

#[test]
fn run_on_bundled_qaplib_instance() {
    let dir = tempfile::tempdir().unwrap();
    let bench = format!("qaplib:{}", data("grid15.dat").display());
    let o = bops(&[
        "run",
        "--benchmark",
        &bench,
        "--algo",
        "bops-t",
        "--iters",
        "3",
        "--init",
        "5",
        "--reps",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let raw: Vec<RawRow> = read_rows(&dir.path().join("bops-t-raw.csv"));
    assert_eq!(raw.len(), 8);
    assert!(raw.iter().all(|r| r.permutation.split(',').count() == 15));
}

#[test]
fn run_on_bundled_tsplib_subset() {
    let dir = tempfile::tempdir().unwrap();
    let bench = format!("tsplib:{},subset=10", data("pcb16.tsp").display());
    let o = bops(&[
        "run",
        "--benchmark",
        &bench,
        "--algo",
        "ga",
        "--iters",
        "15",
        "--init",
        "5",
        "--reps",
        "2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let raw: Vec<RawRow> = read_rows(&dir.path().join("ga-raw.csv"));
    assert_eq!(raw.len(), 40);
    assert!(raw.iter().all(|r| r.permutation.split(',').count() == 10));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    for args in [
        vec!["run", "--benchmark", "synthetic:d=4", "--algo", "nonsense", "--iters", "3", "--out", out],
        vec!["run", "--benchmark", "nonsense:d=4", "--algo", "random", "--iters", "3", "--out", out],
        vec!["run", "--benchmark", "synthetic:d=4", "--algo", "random", "--iters", "0", "--out", out],
        vec!["run", "--benchmark", "synthetic:d=4", "--algo", "random", "--iters", "3", "--reps", "0", "--out", out],
        vec!["frobnicate"],
    ] {
        let o = bops(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn missing_files_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = bops(&["solve-qap", "/nonexistent/x.dat"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/x.dat"));
    let o = bops(&[
        "run",
        "--benchmark",
        "qaplib:/nonexistent/x.dat",
        "--algo",
        "random",
        "--iters",
        "3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn malformed_instance_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.dat");
    std::fs::write(&path, "2\n0 1 1 0\n0 3").unwrap();
    let o = bops(&["solve-qap", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("matrix B"));
}

fn solve(args: &[&str]) -> (String, f64) {
    let o = bops(args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let line = String::from_utf8(o.stdout).unwrap();
    let (p, v) = line.trim().split_once(' ').unwrap();
    (p.to_string(), v.parse().unwrap())
}

#[test]
fn solve_qap_hand_instance() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("hand.dat");
    std::fs::write(&path, "2\n0 1\n1 0\n0 3\n3 0\n").unwrap();
    // both assignments cost 6; ties resolve to the identity
    assert_eq!(solve(&["solve-qap", path.to_str().unwrap(), "--exact"]), ("0,1".to_string(), 6.0));
    assert_eq!(solve(&["solve-qap", path.to_str().unwrap()]).1, 6.0);
}

#[test]
fn exact_never_loses_to_local_search() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("five.dat");
    let a = "0 3 1 4 2\n3 0 5 1 1\n1 5 0 2 6\n4 1 2 0 3\n2 1 6 3 0\n";
    let b = "0 1 2 3 4\n1 0 1 2 3\n2 1 0 1 2\n3 2 1 0 1\n4 3 2 1 0\n";
    std::fs::write(&path, format!("5\n{a}\n{b}")).unwrap();
    let p = path.to_str().unwrap();
    let exact = solve(&["solve-qap", p, "--exact"]).1;
    let heuristic = solve(&["solve-qap", p, "--restarts", "2", "--seed", "3"]).1;
    assert!(exact <= heuristic);
    let o = bops(&["solve-qap", data("grid15.dat").to_str().unwrap(), "--exact"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn nll_row_count_and_finiteness() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nested/nll.csv");
    let o = bops(&[
        "nll",
        "--benchmark",
        "gpdraw:d=6,l=0.3,noise=0.05",
        "--train-sizes",
        "8,12,16",
        "--reps",
        "10",
        "--test-size",
        "10",
        "--jobs",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(header(&out), "kernel,train_size,replication,nll");
    let rows: Vec<bops::NllRow> = read_rows(&out);
    assert_eq!(rows.len(), 2 * 3 * 10);
    assert!(rows.iter().all(|r| r.nll.is_finite()));
}
