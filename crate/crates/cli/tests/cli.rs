use std::path::Path;
use std::process::{Command, Output};

fn confmodel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_confmodel"))
        .args(args)
        .env_remove("CONFMODEL_THREADS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn explore_single_edge() {
    let o = confmodel(&["explore", "--degrees", "1,1", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "1 2");
}

#[test]
fn stats_on_isolated_vertices() {
    let o = confmodel(&["stats", "--stat", "beta0", "--degrees", "0,0,0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "3");
}

#[test]
fn replicate_writes_rows_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = confmodel(&[
        "replicate", "--law", "iid:1=0.5,2=0.5", "--n", "200", "--R", "500", "--stat", "beta0", "--seed", "1", "--out", out,
    ]);
    assert_eq!(o.status.code(), Some(0));
    let csv = read(dir.path(), "replications.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("rep_id,seed,value"));
    assert_eq!(lines.count(), 500);
    let summary: serde_json::Value = serde_json::from_str(&read(dir.path(), "summary.json")).unwrap();
    for key in ["mean", "variance", "skewness", "excess_kurtosis", "ks_distance", "cap_exceeded_count"] {
        assert!(summary["result"].get(key).is_some(), "{key}");
    }
    assert_eq!(summary["result"]["r"], 500);
    let manifest: serde_json::Value = serde_json::from_str(&read(dir.path(), "manifest.json")).unwrap();
    assert_eq!(manifest["run"]["seed"], 1);
    assert!(dir.path().join("plotdata.csv").exists());
}

#[test]
fn manifest_replays_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let o = confmodel(&[
        "clt", "--stat", "beta0", "--law", "iid:1=0.5,2=0.5", "--ladder", "40,80,160", "--R", "60", "--seed", "3", "--out",
        a.to_str().unwrap(),
    ]);
    assert_ne!(o.status.code(), Some(1));
    let o2 = confmodel(&["run", "--config", a.join("manifest.json").to_str().unwrap(), "--out", b.to_str().unwrap()]);
    assert_eq!(o.status.code(), o2.status.code());
    for name in ["manifest.json", "summary.json", "replications.csv", "plotdata.csv", "replications_80.csv"] {
        assert_eq!(read(&a, name), read(&b, name), "{name}");
    }
}

#[test]
fn text_config_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# beta0 on a fixed sequence\n[run]\ncommand = replicate\nseed = 4\n\n[graph]\ndegrees = 2,1,1\n\n[statistic]\nstat = beta0\n\n[budget]\nR = 10\n",
    )
    .unwrap();
    let out = dir.path().join("o");
    let o = confmodel(&["run", "--config", cfg.to_str().unwrap(), "--set", "R=25", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(&out, "replications.csv").lines().count(), 26);
}

#[test]
fn exit_codes() {
    // Unknown flag, unknown statistic, key the command does not use.
    assert_eq!(confmodel(&["stats", "--bogus", "1"]).status.code(), Some(1));
    assert_eq!(confmodel(&["stats", "--stat", "nope", "--degrees", "1,1"]).status.code(), Some(1));
    assert_eq!(confmodel(&["explore", "--degrees", "1,1", "--R", "5"]).status.code(), Some(1));
    assert_eq!(confmodel(&["explore", "--degrees", "1,2"]).status.code(), Some(1));
    // A bound the unbounded-size moment cannot meet.
    let o = confmodel(&[
        "switch-test", "--stat", "Spk:p=2,K=inf", "--bound", "1", "--law", "iid:1=0.5,2=0.5", "--n", "60", "--trials", "200",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(confmodel(&["--help"]).status.code(), Some(0));
}

#[test]
fn threads_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, sub: &str| {
        let out = dir.path().join(sub);
        let o = Command::new(env!("CARGO_BIN_EXE_confmodel"))
            .args(["replicate", "--stat", "beta0", "--law", "iid:1=0.5,2=0.5", "--n", "100", "--R", "50"])
            .args(["--out", out.to_str().unwrap()])
            .env("CONFMODEL_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
        read(&out, "replications.csv")
    };
    assert_eq!(run("1", "one"), run("3", "three"));
    let bad = Command::new(env!("CARGO_BIN_EXE_confmodel"))
        .args(["explore", "--degrees", "1,1"])
        .env("CONFMODEL_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}
