use mieflow_cli::output::parse_csv;
use std::path::Path;
use std::process::{Command, Output};

fn mieflow(args: &[&str], dir: &Path, threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mieflow"));
    cmd.args(args).current_dir(dir).env_remove("MIEFLOW_THREADS");
    if let Some(t) = threads {
        cmd.env("MIEFLOW_THREADS", t);
    }
    cmd.output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

#[test]
fn malformed_config_exits_2_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "bad.toml", "schema_version = 1\nkind = \"xx\"\n\n[model]\nsizes = [-64]\n");
    let out = mieflow(&["run", "bad.toml", "--out", "out"], tmp.path(), None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 5"), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!tmp.path().join("out").exists());

    write(tmp.path(), "bad2.toml", "schema_version = 1\nkind = \"chern\"\n[model]\nl = 24\nwidth = 20\n");
    let out = mieflow(&["run", "bad2.toml", "--out", "out"], tmp.path(), None);
    assert_eq!(out.status.code(), Some(2));
    assert!(!tmp.path().join("out").exists());

    let out = mieflow(&["run", "missing.toml", "--out", "out"], tmp.path(), None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_3_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    // both targets map onto the same separation
    write(tmp.path(), "dup.toml", "schema_version = 1\nkind = \"xx\"\n[model]\nsizes = [64]\netas = [0.1, 0.1001]\n[sampling]\nn_samples = 10\n");
    let out = mieflow(&["run", "dup.toml", "--out", "out"], tmp.path(), None);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn toric_run_gives_log_two() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "toric.toml", "schema_version = 1\nkind = \"toric\"\n[model]\nl = 4\np = 2\n");
    let out = mieflow(&["run", "toric.toml", "--out", "out", "--svg"], tmp.path(), None);
    assert!(out.status.success());
    let rows = parse_csv(&std::fs::read_to_string(tmp.path().join("out/toric.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 1);
    assert!((rows[0].1 - std::f64::consts::LN_2).abs() < 1e-12);
    assert_eq!(rows[0].2, 0.0);
    assert!(tmp.path().join("out/toric.svg").exists());
    let manifest = std::fs::read_to_string(tmp.path().join("out/toric.manifest")).unwrap();
    assert!(manifest.contains("result.outcome_independent = true"));
    assert!(manifest.contains("config.002 = kind = \"toric\""));
}

#[test]
fn xx_run_with_eta_list() {
    let tmp = tempfile::tempdir().unwrap();
    write(
        tmp.path(),
        "xx.toml",
        "schema_version = 1\nkind = \"xx\"\n[model]\nsizes = [64]\netas = [0.01, 0.02, 0.04, 0.07, 0.1, 0.15, 0.2, 0.3]\n[sampling]\nn_samples = 300\nseed = 4\n",
    );
    let out = mieflow(&["run", "xx.toml", "--out", "out"], tmp.path(), Some("1"));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(tmp.path().join("out/xx_L64.csv")).unwrap();
    assert!(!text.contains('\r'));
    assert_eq!(parse_csv(&text).unwrap().len(), 8);
    let manifest = std::fs::read_to_string(tmp.path().join("out/xx.manifest")).unwrap();
    assert!(manifest.lines().any(|l| l.starts_with("result.alpha.L64 = ")));
    assert!(manifest.contains("seed = 4"));

    // same bytes with more threads and with a seed given on the command line
    let again = mieflow(&["run", "xx.toml", "--out", "again", "--seed", "4"], tmp.path(), Some("3"));
    assert!(again.status.success());
    assert_eq!(text, std::fs::read_to_string(tmp.path().join("again/xx_L64.csv")).unwrap());
    let manifest = std::fs::read_to_string(tmp.path().join("again/xx.manifest")).unwrap();
    assert!(manifest.contains("threads = 3"));

    let other = mieflow(&["run", "xx.toml", "--out", "other", "--seed", "5", "--threads", "2"], tmp.path(), Some("3"));
    assert!(other.status.success());
    assert_ne!(text, std::fs::read_to_string(tmp.path().join("other/xx_L64.csv")).unwrap());
    assert!(std::fs::read_to_string(tmp.path().join("other/xx.manifest")).unwrap().contains("threads = 2"));
}

#[test]
fn verify_suites() {
    let tmp = tempfile::tempdir().unwrap();
    let out = mieflow(&["verify", "topo"], tmp.path(), None);
    assert!(out.status.success());
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.contains("0.693147180560") && table.contains("1.098612288668") && table.contains("1.791759469228"));
    assert!(!table.contains("FAIL"));
    assert_eq!(mieflow(&["verify", "bogus"], tmp.path(), None).status.code(), Some(2));
}
