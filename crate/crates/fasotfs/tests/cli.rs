//! End-to-end runs of the `fasotfs` binary.

use std::path::Path;
use std::process::{Command, Output};

fn fasotfs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fasotfs")).args(args).output().expect("spawn fasotfs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("small.json");
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const SMALL: &str = r#"{
  "name": "small",
  "model": "general",
  "sweep_param": "N",
  "sweep_grid": [1, 2, 4],
  "methods": ["envelope", "refined", "exact_subsets", "mc"],
  "trials": 20000,
  "seed": 3
}"#;

#[test]
fn sweep_is_reproducible_and_reportable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for (out, threads) in [(&a, "3"), (&b, "1")] {
        let o = fasotfs(&["sweep", &cfg, "--out-dir", out.to_str().unwrap(), "--threads", threads]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let first = std::fs::read(a.join("small.csv")).unwrap();
    assert_eq!(first, std::fs::read(b.join("small.csv")).unwrap());
    let text = String::from_utf8(first).unwrap();
    assert!(text.contains("# config_digest: "));
    // 3 points x 5 methods (envelope expands to two).
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 15);

    let o = fasotfs(&["report", a.join("small.csv").to_str().unwrap()]);
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("outage_in_unit_interval"), "{out}");
    assert!(matches!(o.status.code(), Some(0) | Some(1)));
}

#[test]
fn seed_override_changes_mc_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().to_str().unwrap();
    let read = |seed: &str| {
        let o = fasotfs(&["sweep", &cfg, "--out-dir", out, "--seed", seed, "--trials", "5000"]);
        assert!(o.status.success());
        std::fs::read_to_string(dir.path().join("small.csv")).unwrap()
    };
    let mc = |t: &str| t.lines().filter(|l| l.contains(",mc,")).map(String::from).collect::<Vec<_>>();
    let (x, y) = (read("1"), read("2"));
    assert_eq!(x, read("1"));
    assert_eq!(mc(&x).len(), 3);
    assert!(mc(&x).iter().zip(mc(&y)).all(|(l, r)| *l != r));
    assert!(y.lines().filter(|l| !l.starts_with('#')).skip(1).all(|l| l.ends_with(",2")));
}

#[test]
fn bad_input_exits_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("[1, 2, 4]", "[4, 2]"));
    let o = fasotfs(&["sweep", &cfg, "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("increasing"));

    let cfg = write_config(dir.path(), &SMALL.replace("\"mc\"", "\"nonsense\""));
    let o = fasotfs(&["sweep", &cfg, "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let o = fasotfs(&["report", dir.path().join("missing.csv").to_str().unwrap()]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn fit_check_writes_both_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"name": "fc", "model": "general", "sweep_param": "P", "sweep_grid": [1, 2],
            "methods": ["mc"], "trials": 5000, "seed": 1}"#,
    );
    let o = fasotfs(&["fit-check", &cfg, "--out-dir", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let ks = std::fs::read_to_string(dir.path().join("fc_ks.csv")).unwrap();
    assert!(ks.contains("ks_gamma_uncorrelated"));
    assert!(dir.path().join("fc_cdf.csv").exists());
}
