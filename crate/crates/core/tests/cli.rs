use std::path::Path;
use std::process::{Command, Output};

use fermion_distill::quasifree::BasisProjection;
use fermion_distill::CovarianceMatrix;

fn run(args: &[&str], file: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fermion-distill"));
    cmd.args(args);
    if let Some(f) = file {
        cmd.arg(f);
    }
    cmd.output().unwrap()
}

#[test]
fn report_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.txt");
    BasisProjection::standard(2).covariance().write_file(&good).unwrap();
    let out = run(&["report"], Some(&good));
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("d,n_keep,"), "{stdout}");

    let mixed = dir.path().join("mixed.txt");
    CovarianceMatrix::maximally_mixed(2, 2).write_file(&mixed).unwrap();
    assert_eq!(run(&["report"], Some(&mixed)).status.code(), Some(2));

    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "1 1\n0 3 0 0\n-3 0 0 0\n0 0 0 1\n0 0 -1 0\n").unwrap();
    let out = run(&["report"], Some(&bad));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("error"));

    let garbled = dir.path().join("garbled.txt");
    std::fs::write(&garbled, "two by two\n").unwrap();
    assert_eq!(run(&["validate"], Some(&garbled)).status.code(), Some(1));
    assert_eq!(run(&["validate"], Some(&good)).status.code(), Some(0));
    assert_eq!(run(&["report"], Some(&dir.path().join("missing.txt"))).status.code(), Some(1));
}

#[test]
fn sweep_writes_csv_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("rows.csv");
    let plot = dir.path().join("rows.dat");
    let out = Command::new(env!("CARGO_BIN_EXE_fermion-distill"))
        .args(["sweep", "--d", "2:6", "--threads", "2", "--out"])
        .arg(&csv)
        .arg("--plot")
        .arg(&plot)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], fermion_distill::CSV_HEADER);
    assert_eq!(lines.len(), 6);
    assert!(lines[1].starts_with("2,2,"));
    let plot = std::fs::read_to_string(&plot).unwrap();
    assert_eq!(plot.lines().count(), 6);
}

#[test]
fn bad_arguments_fail() {
    assert_eq!(run(&["sweep", "--d", "5:2", "--out", "x.csv"], None).status.code(), Some(1));
    assert_eq!(run(&["oracle-compare", "--d", "9"], None).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"], None).status.code(), Some(1));
    assert_eq!(run(&["--help"], None).status.code(), Some(0));
}

#[test]
fn oracle_compare_passes() {
    let out = run(&["oracle-compare", "--d", "2", "--trials", "8", "--seed", "3"], None);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("within tolerance"));
}
