mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::fixture;

fn ctmax(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctmax")).args(args).env_remove("CTMAX_BUDGET_S").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn bounds_reports_tuple_counts() {
    let model = fixture("autonomous.sut");
    let o = ctmax(&["bounds", "-m", path(&model)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("lb=6"), "{s}");
    assert!(s.contains("allowed=33") && s.contains("forbidden=4"), "{s}");
}

#[test]
fn verify_accepts_the_reference_suite() {
    let (model, suite) = (fixture("autonomous.sut"), fixture("reference_suite.csv"));
    let o = ctmax(&["verify", "-m", path(&model), "--suite", path(&suite), "--strict"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("covered=33 allowed=33"));
    let last = stdout(&o).lines().last().unwrap().to_string();
    let summary: serde_json::Value = serde_json::from_str(&last).unwrap();
    assert_eq!(summary["allowed"], 33);
}

#[test]
fn strict_verify_fails_on_a_partial_suite() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("short.csv");
    let full = std::fs::read_to_string(fixture("reference_suite.csv")).unwrap();
    std::fs::write(&suite, full.lines().take(3).collect::<Vec<_>>().join("\n")).unwrap();
    let model = fixture("autonomous.sut");
    let o = ctmax(&["verify", "-m", path(&model), "--suite", path(&suite), "--strict"]);
    assert_eq!(o.status.code(), Some(1));
    let o = ctmax(&["verify", "-m", path(&model), "--suite", path(&suite)]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn can_finds_and_writes_a_minimum_suite() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("suite.csv");
    let model = fixture("autonomous.sut");
    for algo in ["calot", "linear", "wpm1"] {
        let o = ctmax(&["can", "-m", path(&model), "--algo", algo, "--initial-ub", "10", "-o", path(&out)]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(stdout(&o).contains("best=8 certified=true"), "{algo}: {}", stdout(&o));
        let v = ctmax(&["verify", "-m", path(&model), "--suite", path(&out), "--strict"]);
        assert!(v.status.success());
    }
}

#[test]
fn encode_writes_linear_weights_and_a_map() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("can.wcnf");
    let model = fixture("autonomous.sut");
    let o = ctmax(&["encode", "-m", path(&model), "--weights", "linear", "-N", "10", "-o", path(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("p wcnf "));
    let top: u64 = text.lines().next().unwrap().split(' ').nth(4).unwrap().parse().unwrap();
    let mut soft: Vec<u64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(' ').next().unwrap().parse::<u64>().unwrap())
        .filter(|&w| w != top)
        .collect();
    soft.sort();
    assert_eq!(soft, vec![1, 2, 3]);
    let map = std::fs::read_to_string(dir.path().join("can.wcnf.map")).unwrap();
    assert!(map.lines().any(|l| l.starts_with("u 8 -> ")), "{map}");
    assert!(map.lines().any(|l| l.starts_with("x 1 L ")));
}

#[test]
fn encode_mcac_is_plain_dimacs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.cnf");
    let model = fixture("storage2.sut");
    let o = ctmax(&["encode", "-m", path(&model), "--problem", "mcac", "-N", "18", "-o", path(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let cnf = ctmax::cnf::dimacs::parse_dimacs(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(!cnf.clauses.is_empty());
}

#[test]
fn sweeps_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let model = fixture("autonomous.sut");
    let mut curves = Vec::new();
    for run in 0..2 {
        let curve = dir.path().join(format!("curve{run}.csv"));
        let o = ctmax(&["tn", "-m", path(&model), "--sweep", "1..8", "--curve", path(&curve)]);
        assert!(o.status.success(), "{}", stderr(&o));
        curves.push(std::fs::read(&curve).unwrap());
    }
    assert_eq!(curves[0], curves[1]);
    let text = String::from_utf8(curves.remove(0)).unwrap();
    assert_eq!(text.lines().next(), Some("N,covered,ratio"));
    assert_eq!(text.lines().last(), Some("8,33,1.000000"));
}

#[test]
fn can_suites_are_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let model = fixture("storage2.sut");
    let mut suites = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("s{run}.csv"));
        let o = ctmax(&["can", "-m", path(&model), "--algo", "linear", "--seed", "7", "-o", path(&out)]);
        assert!(o.status.success());
        suites.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(suites[0], suites[1]);
}

#[test]
fn its_prints_coverage() {
    let model = fixture("autonomous.sut");
    let o = ctmax(&["its", "-m", path(&model), "-N", "33", "--step", "sat"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("covered=33 allowed=33"), "{}", stdout(&o));
}

#[test]
fn exit_codes() {
    let model = fixture("autonomous.sut");
    assert_eq!(ctmax(&["bounds", "-m", "/nonexistent.sut"]).status.code(), Some(1));
    assert_eq!(ctmax(&["bounds"]).status.code(), Some(2));
    assert_eq!(ctmax(&["can", "-m", path(&model), "--algo", "nope"]).status.code(), Some(2));
    assert_eq!(ctmax(&["bounds", "-m", path(&model), "-t", "9"]).status.code(), Some(2));
    assert_eq!(ctmax(&["tn", "-m", path(&model), "--sweep", "5..2"]).status.code(), Some(2));
}
