//! End-to-end runs of the `hermite-pm` binary.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hermite-pm")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn threshold_row() {
    let o = run(&["thresholds", "--kind", "s-linear-FT", "--n", "2", "--p", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "n,p,s-linear-FT\n2,2,3.0\n");
}

#[test]
fn threshold_list_in_json() {
    let o = run(&["thresholds", "--kind", "gamma", "--n", "1", "--p", "2,inf", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["gamma"], 0.0);
    assert!((rows[1]["gamma"].as_f64().unwrap() - 1.0 / 6.0).abs() < 1e-15);
}

#[test]
fn lowerbound_example_passes() {
    let o = run(&["lowerbound", "--symbol", "power:1", "--n", "1", "--p", "3", "--N", "32"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("symbol,n,p,q,N,lower_bound"));
}

#[test]
fn asymptotics_example_passes() {
    let o = run(&["asymptotics", "--n", "1", "--p", "6", "--nu", "64..512", "--tol", "0.03"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("PASS"), "{stderr}");
}

#[test]
fn failing_tolerance_exits_one() {
    let o = run(&["asymptotics", "--n", "1", "--p", "6", "--nu", "64..512", "--tol", "1e-9"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL"));
}

#[test]
fn bad_arguments_exit_two() {
    let o = run(&["lowerbound", "--symbol", "nonsense:1", "--p", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["thresholds", "--kind", "s-linear-FT", "--n", "2", "--p", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["--config", "/definitely/not/here.cfg", "thresholds", "--kind", "gamma", "--n", "1", "--p", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn same_seed_gives_identical_bytes() {
    let args = ["littlewood-paley", "--N", "32", "--count", "4", "--seed", "7"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["littlewood-paley", "--N", "32", "--count", "4", "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn hormander_json_fields() {
    let o = run(&[
        "hormander-norm", "--symbol", "one", "--flavor", "FT", "--s", "1", "--k", "1..3", "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for key in ["flavor", "s", "mode", "blocks", "sup", "argsup_k", "joint_norm", "symbol"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["flavor"], "FT");
    assert_eq!(v["mode"], "rescaled");
    assert_eq!(v["blocks"].as_array().unwrap().len(), 3);
}

#[test]
fn output_file_and_config_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# thresholds defaults\nkind=gamma\nn=3\np=2\n").unwrap();
    let out = dir.path().join("t.csv");
    let o = run(&[
        "--config", cfg.to_str().unwrap(), "-o", out.to_str().unwrap(), "thresholds", "--n", "1", "--p", "inf",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(Path::new(&out).exists());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,p,gamma"));
    let row = lines.next().unwrap();
    assert!(row.starts_with("1,inf,0.1666"), "{row}");
}
