use std::path::Path;
use std::process::{Command, Output};

fn hv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hillvallea")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&hv(&["--help"])), 0);
    assert_eq!(code(&hv(&["--version"])), 0);
}

#[test]
fn bad_arguments_exit_one() {
    for args in [
        &["--no-such-flag"][..],
        &["--runs", "0"],
        &["--problems", "30"],
        &["--xi", "64,2,0.8"],
        &["--format", "xml"],
        &["--problems", "2", "--budget-override", "3=100"],
        &["--budget-override", "2:100"],
        &["--jobs", "0"],
    ] {
        let o = hv(args);
        assert_eq!(code(&o), 1, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn composition_without_data_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = hv(&["--problems", "11", "--runs", "1", "--data-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("composition_11"), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(code(&hv(&["--problems", "12", "--runs", "1"])), 2);
}

#[test]
fn small_run_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = hv(&[
        "--problems", "2", "--runs", "2", "--seed", "4", "--budget-override", "2=2000",
        "--xi-scaling", "literal", "--jobs", "2", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("avg"));
    for f in ["s1.csv", "s2.csv", "s3.csv", "sr.csv", "traces/p02_r000.csv", "traces/p02_r001.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }

    let json = dir.path().join("json");
    let o = hv(&["--problems", "1", "--runs", "1", "--budget-override", "1=500", "--format", "json", "--out", json.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(json.join("scores.json").exists());

    let rescored = dir.path().join("rescored");
    let o = hv(&[
        "rescore",
        out.join("traces/p02_r000.csv").to_str().unwrap(),
        out.join("traces/p02_r001.csv").to_str().unwrap(),
        "--out",
        rescored.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read(out.join("s1.csv")).unwrap(), std::fs::read(rescored.join("s1.csv")).unwrap());
}

#[test]
fn export_optima_writes_one_file_per_problem() {
    let dir = tempfile::tempdir().unwrap();
    let o = hv(&["export-optima", "--problems", "1-3", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 3);
}

#[test]
fn unwritable_output_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let out: &Path = &blocker.join("out");
    let o = hv(&["--problems", "1", "--runs", "1", "--budget-override", "1=200", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}
