use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use npca_core::io::config_to_toml;
use npca_core::SimConfig;

fn npca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_npca"))
        .args(args)
        .env_remove("NPCA_OUT_DIR")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_ratio(dir: &Path) -> f64 {
    let text = fs::read_to_string(dir.join("analytic.csv")).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(
        header,
        [
            "p1",
            "p2",
            "l",
            "s_leg_factor",
            "s_npca_star_factor",
            "s_npca_factor",
            "ratio"
        ]
    );
    lines
        .next()
        .unwrap()
        .split(',')
        .nth(6)
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn analytic_spot_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = npca(&[
        "analytic", "--p1", "0.8", "--p2", "0.2", "--l", "2.0", "--out", out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("2.0035"));
    assert!((csv_ratio(dir.path()) - 2.0035).abs() < 1e-3);
    assert!(dir.path().join("manifest.toml").exists());
}

#[test]
fn analytic_quiet_primary_is_neutral() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = npca(&[
        "analytic", "--p1", "0", "--p2", "0.5", "--l", "2.2", "--out", out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(csv_ratio(dir.path()), 1.0);
}

#[test]
fn analytic_rejects_a_saturated_primary() {
    let o = npca(&["analytic", "--p1", "1.0", "--p2", "0.2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("singular"), "{}", stderr(&o));
    let o = npca(&["analytic", "--p1", "0.5", "--p2", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("[0, 1]"), "{}", stderr(&o));
}

#[test]
fn simulate_writes_metrics_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        let o = npca(&[
            "simulate",
            "--policy",
            "npca",
            "--p1",
            "0.6",
            "--p2",
            "0.2",
            "--time",
            "2",
            "--seed",
            "4",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let manifest = fs::read_to_string(out.join("manifest.toml")).unwrap();
        assert!(manifest.contains("metrics.csv") && manifest.contains("seed = 4"));
        fs::read(out.join("metrics.csv")).unwrap()
    };
    let a = run("a");
    assert_eq!(a, run("b"));
    assert!(String::from_utf8(a).unwrap().starts_with("policy,seed,"));
}

#[test]
fn simulate_reads_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    let config = SimConfig::table_defaults().with_sim_time(1.0).with_seed(8);
    fs::write(&path, config_to_toml(&config)).unwrap();
    let out = dir.path().join("out");
    let o = npca(&[
        "simulate",
        "--config",
        path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("metrics.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("legacy,8,"));
}

#[test]
fn missing_key_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    let text: String = config_to_toml(&SimConfig::table_defaults())
        .lines()
        .filter(|l| !l.starts_with("slot_us"))
        .map(|l| format!("{l}\n"))
        .collect();
    fs::write(&path, text).unwrap();
    let o = npca(&["simulate", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("slot_us"), "{}", stderr(&o));
}

#[test]
fn unknown_policy_is_a_usage_error() {
    let o = npca(&["simulate", "--policy", "greedy"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_output_fails_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = blocker.join("sub");
    let o = npca(&["sweep", "--scenario", "a", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
}

#[test]
fn sweep_writes_one_file_per_l() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = [
        "sweep",
        "--scenario",
        "a",
        "--seeds",
        "2",
        "--time",
        "0.2",
        "--seed",
        "3",
        "--out",
        out,
    ];
    let o = npca(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut first = Vec::new();
    for l in ["1.80", "2.00", "2.20"] {
        let path = dir.path().join(format!("scenario_a_l{l}.csv"));
        let text = fs::read_to_string(&path).unwrap();
        let p1s: Vec<String> = text
            .lines()
            .skip(1)
            .map(|line| line.split(',').next().unwrap().to_string())
            .collect();
        assert_eq!(p1s.len(), 11);
        assert_eq!(p1s.first().unwrap(), "0.6");
        assert_eq!(p1s.last().unwrap(), "0.8");
        first.push(fs::read(&path).unwrap());
    }
    assert!(npca(&args).status.success());
    let again = fs::read(dir.path().join("scenario_a_l1.80.csv")).unwrap();
    assert_eq!(first[0], again);
}

#[test]
fn hybrid_summary_has_three_models() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_npca"))
        .args(["hybrid-experiment", "--seeds", "2", "--periods", "5"])
        .env("NPCA_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("random_occupancy_summary.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "model,throughput_mbps");
    let models: Vec<&str> = lines[1..]
        .iter()
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(models, ["legacy", "npca", "hybrid"]);
}
