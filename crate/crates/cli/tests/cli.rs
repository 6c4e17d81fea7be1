//! End-to-end CLI tests over the checked-in corpus.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(rel)
}

fn pathdrift(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pathdrift"))
        .args(args)
        .output()
        .expect("spawning pathdrift")
}

fn s3_args(out: &Path) -> Vec<String> {
    vec![
        "--map".into(),
        corpus("maps/straight-2.json").display().to_string(),
        "--seed-scenario".into(),
        corpus("seeds/S3.json").display().to_string(),
        "--out".into(),
        out.display().to_string(),
    ]
}

fn run_ok(mut base: Vec<String>, extra: &[&str]) -> Output {
    base.extend(extra.iter().map(|s| s.to_string()));
    let out = Command::new(env!("CARGO_BIN_EXE_pathdrift"))
        .args(&base)
        .output()
        .expect("spawning pathdrift");
    assert!(
        out.status.success(),
        "pathdrift {base:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn run_writes_deterministic_result() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let extra = [
        "--strategy",
        "guided",
        "--iterations",
        "5",
        "--planner-preset",
        "timid",
        "--rng-seed",
        "9",
    ];
    run_ok([vec!["run".to_string()], s3_args(&a)].concat(), &extra);
    run_ok([vec!["run".to_string()], s3_args(&b)].concat(), &extra);
    let ra = std::fs::read(a.join("result.json")).unwrap();
    let rb = std::fs::read(b.join("result.json")).unwrap();
    assert!(!ra.is_empty());
    assert_eq!(ra, rb, "identical config + seed must give identical bytes");
}

#[test]
fn validate_seed_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_ok(
        [vec!["validate-seed".to_string()], s3_args(dir.path())].concat(),
        &["--planner-preset", "timid"],
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("Completed"), "stdout: {stdout}");
    for f in ["path.json", "observation.json", "seed.svg"] {
        assert!(dir.path().join(f).exists(), "missing {f}");
    }
}

#[test]
fn replay_accepts_recorded_path() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(
        [vec!["validate-seed".to_string()], s3_args(dir.path())].concat(),
        &[],
    );
    let path = dir.path().join("path.json");
    run_ok(
        [vec!["replay".to_string()], s3_args(dir.path())].concat(),
        &["--path", path.to_str().unwrap()],
    );
}

#[test]
fn render_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_ok(
        [vec!["render".to_string()], s3_args(&a)].concat(),
        &["--grid-overlay"],
    );
    run_ok(
        [vec!["render".to_string()], s3_args(&b)].concat(),
        &["--grid-overlay"],
    );
    let sa = std::fs::read(a.join("s3-lane-follow.svg")).unwrap();
    let sb = std::fs::read(b.join("s3-lane-follow.svg")).unwrap();
    assert!(!sa.is_empty());
    assert_eq!(sa, sb);
}

#[test]
fn config_file_defaults_and_cli_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("config.json");
    std::fs::write(
        &cfg_path,
        serde_json::json!({
            "map": corpus("maps/straight-2.json"),
            "seed_scenario": corpus("seeds/S3.json"),
            "out": dir.path().join("out"),
            "strategy": "random",
            "iterations": 3,
            "planner_preset": "timid"
        })
        .to_string(),
    )
    .unwrap();
    // --iterations beats the file; strategy/map/out come from the file
    let out = pathdrift(&[
        "run",
        "--config",
        cfg_path.to_str().unwrap(),
        "--iterations",
        "4",
    ]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let result: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/result.json")).unwrap())
            .unwrap();
    assert_eq!(result["iterations_run"], 4);
    assert_eq!(result["strategy"], "random");
}

#[test]
fn compare_writes_csv_table() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(
        [vec!["compare".to_string()], s3_args(dir.path())].concat(),
        &[
            "--strategies",
            "random",
            "--strategies",
            "random-delta",
            "--repeats",
            "2",
            "--iterations",
            "3",
            "--planner-preset",
            "timid",
            "--jobs",
            "1",
        ],
    );
    let csv = std::fs::read_to_string(dir.path().join("compare.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "strategy,seed_id,rng_seed,nods_count,mutation_valid_pct,wall_s"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4, "2 strategies x 2 repeats");
    assert!(rows.iter().all(|r| r.starts_with("random")));
    assert!(rows.iter().any(|r| r.contains(",s3-lane-follow,")));
}

#[test]
fn rejects_unknown_strategy_and_missing_map() {
    let out = pathdrift(&["run", "--strategy", "bogus"]);
    assert!(!out.status.success());
    let dir = tempfile::tempdir().unwrap();
    let out = pathdrift(&[
        "run",
        "--seed-scenario",
        corpus("seeds/S3.json").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--map"));
}
