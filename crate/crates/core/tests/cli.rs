//! The `wohs` binary: outputs, determinism and exit codes.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn wohs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wohs")).args(args).env_remove("WOHS_SEED").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn sample_support_and_determinism() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let base = ["sample", "--alpha", "1.5", "--dim", "2", "--start", "2,0", "--barrier", "1", "--direction", "down"];
    let run = |out: &Path, workers: &str| {
        let mut args = base.to_vec();
        args.extend(["--n", "1000", "--seed", "7", "--workers", workers, "--out", s(out)]);
        code(&wohs(&args))
    };
    assert_eq!(run(&a, "1"), 0);
    assert_eq!(run(&b, "4"), 0);
    let text = std::fs::read_to_string(&a).unwrap();
    assert!(text.starts_with("sample_id,y1,y2,weight\n"));
    let r = rows(&a);
    assert_eq!(r.len(), 1000);
    assert!(r.iter().all(|row| row[1].parse::<f64>().unwrap() < 1.0));
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
}

#[test]
fn sample_exit_codes() {
    assert_eq!(code(&wohs(&["sample", "--measure", "conditioned", "--alpha", "1.5"])), 3);
    assert_eq!(code(&wohs(&["sample", "--alpha", "1.5", "--start", "0.5,0"])), 3);
    assert_eq!(code(&wohs(&["sample", "--alpha", "0.5", "--measure", "conditioned", "--barrier", "0"])), 2);
    assert_eq!(code(&wohs(&["sample", "--alpha", "1.5", "--dim", "3", "--start", "2,0"])), 2);
    assert_eq!(code(&wohs(&["sample", "--alpha", "1.5", "--n", "many"])), 2);
    assert_eq!(code(&wohs(&["sample", "--n", "3"])), 2);
}

#[test]
fn walk_outputs() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("w.csv");
    let o = wohs(&[
        "walk",
        "--alpha",
        "1.5",
        "--dim",
        "2",
        "--start",
        "2,0",
        "--n",
        "100000",
        "--mode",
        "collapsed",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0);
    assert!(std::fs::read_to_string(&out).unwrap().starts_with("sample_id,status,n_crossings,weight,y1,y2\n"));
    let r = rows(&out);
    assert_eq!(r.len(), 100_000);
    for row in r.iter().filter(|row| row[1] == "Entered") {
        let y1: f64 = row[4].parse().unwrap();
        assert!(y1 > -1.0 && y1 < 1.0);
    }

    let o = wohs(&[
        "walk",
        "--alpha",
        "0.5",
        "--measure",
        "plain",
        "--max-crossings",
        "1000",
        "--n",
        "2000",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0);
    let r = rows(&out);
    let capped: Vec<_> = r.iter().filter(|row| row[1] == "CapReached").collect();
    assert!(!capped.is_empty());
    assert!(capped.iter().all(|row| row[4].is_empty() && row[5].is_empty()));

    let trace = dir.path().join("t.jsonl");
    let o = wohs(&[
        "walk",
        "--alpha",
        "0.5",
        "--measure",
        "conditioned",
        "--n",
        "2000",
        "--mode",
        "full",
        "--out",
        s(&out),
        "--trace",
        s(&trace),
    ]);
    assert_eq!(code(&o), 0);
    let r = rows(&out);
    assert!(r.iter().all(|row| row[1] == "Entered" && row[3].parse::<f64>().unwrap() > 0.0));
    let first: serde_json::Value =
        serde_json::from_str(std::fs::read_to_string(&trace).unwrap().lines().next().unwrap()).unwrap();
    for key in ["sample_id", "k", "face", "x1", "transverse"] {
        assert!(first.get(key).is_some(), "{key} missing in {first}");
    }
}

#[test]
fn walk_errors() {
    assert_eq!(code(&wohs(&["walk", "--alpha", "1.5", "--start", "0.5,0", "--n", "5"])), 3);
    assert_eq!(code(&wohs(&["walk", "--alpha", "1.5", "--mode", "sideways"])), 2);
    assert_eq!(code(&wohs(&["walk", "--alpha", "1.5", "--workers", "0", "--n", "5"])), 2);
}

fn density(args: &[&str]) -> (i32, Vec<Vec<String>>) {
    let mut full = vec!["density"];
    full.extend(args);
    let o = wohs(&full);
    let text = stdout(&o);
    let mut lines = text.lines();
    if let Some(h) = lines.next() {
        assert_eq!(h, "row_id,value,error");
    }
    let r = lines.map(|l| l.splitn(3, ',').map(String::from).collect()).collect();
    (code(&o), r)
}

#[test]
fn density_worked_points() {
    let (c, r) = density(&["--kernel", "overshoot", "--alpha", "1", "--x", "1,0", "--z", "-1,0"]);
    assert_eq!(c, 0);
    assert!((r[0][1].parse::<f64>().unwrap() - 0.025_330_3).abs() < 1e-7);
    let (c, r) =
        density(&["--kernel", "triple", "--alpha", "1", "--x", "2,0", "--w", "1,0", "--y", "2,0", "--z", "-1,0"]);
    assert_eq!(c, 0);
    assert!((r[0][1].parse::<f64>().unwrap() - 1.901e-4).abs() < 1e-7);
    let (_, r) = density(&["--kernel", "pcr", "--alpha", "1", "--x", "1,0", "--y", "1.5,0"]);
    assert_eq!(r[0][1].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn density_batch_marks_bad_rows() {
    let dir = TempDir::new().unwrap();
    let pts = dir.path().join("p.csv");
    std::fs::write(&pts, "x1,x2,y1,y2\n1,0,0.5,0\n-1,0,0.5,0\n2,0,1,0\n").unwrap();
    let (c, r) = density(&["--kernel", "pcr", "--alpha", "1", "--points", s(&pts)]);
    assert_eq!(c, 0);
    assert_eq!(r.len(), 3);
    assert!(r[0][2].is_empty() && !r[1][2].is_empty() && r[1][1].is_empty());
    std::fs::write(&pts, "x1,x2,y1,y2\n-1,0,0.5,0\n").unwrap();
    assert_eq!(density(&["--kernel", "pcr", "--alpha", "1", "--points", s(&pts)]).0, 3);
    assert_eq!(density(&["--kernel", "nope", "--alpha", "1"]).0, 2);
    assert_eq!(density(&["--kernel", "triple", "--alpha", "1", "--x", "2,0"]).0, 2);
}

#[test]
fn validate_suites() {
    let o = wohs(&["validate", "--suite", "normalization", "--alpha", "1", "--dim", "2"]);
    assert_eq!(code(&o), 0);
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["suite"], "normalization");

    let o = wohs(&["validate", "--suite", "flat-earth"]);
    assert_eq!(code(&o), 0);
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let checks = report["checks"].as_array().unwrap();
    assert!(checks.iter().any(|c| c["name"] == "gap_decreasing_in_radius" && c["pass"] == true));

    assert_eq!(code(&wohs(&["validate", "--suite", "nope"])), 2);
    assert_eq!(code(&wohs(&["validate"])), 2);
}

#[test]
fn validate_mode_equivalence() {
    let o = wohs(&["validate", "--suite", "mode-equivalence", "--alpha", "1.5", "--dim", "2"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn hist_counts_and_errors() {
    let dir = TempDir::new().unwrap();
    let walk = dir.path().join("w.csv");
    let hist = dir.path().join("h.csv");
    assert_eq!(code(&wohs(&["walk", "--alpha", "1.5", "--n", "5000", "--out", s(&walk)])), 0);
    assert_eq!(code(&wohs(&["hist", "--in", s(&walk), "--out", s(&hist)])), 0);
    let text = std::fs::read_to_string(&hist).unwrap();
    assert!(text.starts_with("bin_x_lo,bin_x_hi,bin_y_lo,bin_y_hi,count,weight\n"));
    let r = rows(&hist);
    assert_eq!(r.len(), 3600);
    let binned: u64 = r.iter().map(|row| row[4].parse::<u64>().unwrap()).sum();
    let mx: u64 = rows(&dir.path().join("h_mx.csv")).iter().map(|row| row[2].parse::<u64>().unwrap()).sum();
    assert_eq!(mx, binned);
    assert_eq!(rows(&dir.path().join("h_my.csv")).len(), 60);
    let o = wohs(&["hist", "--in", s(&walk), "--out", s(&hist)]);
    let msg = String::from_utf8(o.stderr).unwrap();
    let clipped: u64 = msg.split_whitespace().nth(3).unwrap().parse().unwrap();
    assert_eq!(binned + clipped, 5000);

    let empty = dir.path().join("e.csv");
    std::fs::write(&empty, "").unwrap();
    assert_eq!(code(&wohs(&["hist", "--in", s(&empty), "--out", s(&hist)])), 3);
    std::fs::write(&empty, "sample_id,y1,y2,weight\n").unwrap();
    assert_eq!(code(&wohs(&["hist", "--in", s(&empty), "--out", s(&hist)])), 3);
    std::fs::write(&empty, "sample_id,y1,y2,weight\n0,0.5,zz,1\n").unwrap();
    assert_eq!(code(&wohs(&["hist", "--in", s(&empty), "--out", s(&hist)])), 3);
}

#[test]
fn seed_precedence_and_config() {
    let run = |extra: &[&str], env: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_wohs"));
        c.args(["sample", "--alpha", "1.2", "--n", "4"]).args(extra).env_remove("WOHS_SEED");
        if let Some(v) = env {
            c.env("WOHS_SEED", v);
        }
        stdout(&c.output().unwrap())
    };
    assert_eq!(run(&[], Some("11")), run(&["--seed", "11"], None));
    assert_eq!(run(&["--seed", "11"], Some("12")), run(&["--seed", "11"], None));
    assert_ne!(run(&[], Some("12")), run(&["--seed", "11"], None));

    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"seed": 11, "start": [3, 0]}"#).unwrap();
    assert_eq!(run(&["--config", s(&cfg)], Some("12")), run(&["--seed", "11", "--start", "3,0"], None));
    assert_eq!(run(&["--config", s(&cfg), "--seed", "12"], None), run(&["--seed", "12", "--start", "3,0"], None));
    std::fs::write(&cfg, r#"{"bogus": 1}"#).unwrap();
    assert_eq!(code(&wohs(&["sample", "--alpha", "1.2", "--config", s(&cfg)])), 2);
}
