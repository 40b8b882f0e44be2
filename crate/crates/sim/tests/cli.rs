use std::path::Path;
use std::process::{Command, Output};

fn scma(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scma")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn complexity_rows() {
    let out = scma(&["complexity", "--scheme", "symmetric", "--M", "4", "--J", "6", "--n-real", "4"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("symmetric\t24\t9\t531440"));
    let out = scma(&["complexity", "--scheme", "full"]);
    assert!(stdout(&out).contains("full\t96\t-\t8386560"));
}

#[test]
fn golden_export_validates() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&scma(&["golden", "--out", path(dir.path())])), 0);
    let file = dir.path().join("golden.toml");
    let out = scma(&["validate", "--codebook", path(&file)]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(!stdout(&out).contains("FAIL"));
}

#[test]
fn corrupted_document_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    scma(&["golden", "--out", path(dir.path())]);
    let file = dir.path().join("golden.toml");
    let text = std::fs::read_to_string(&file).unwrap();
    std::fs::write(&file, text.replacen("format_version = 1", "format_version = 9", 1)).unwrap();
    let out = scma(&["validate", "--codebook", path(&file)]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("format_version"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&scma(&["complexity"])), 2);
    assert_eq!(code(&scma(&["validate", "--codebook", "/nonexistent/x.toml"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.toml");
    let args = ["design", "--graph", "builtin:canonical", "--scheme", "symmetric", "--M", "3", "--out", path(&out)];
    assert_eq!(code(&scma(&args)), 2);
}

#[test]
fn design_then_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.txt");
    std::fs::write(&graph, "# doubled canonical graph\n1 1 1 0 0 0\n1 0 0 1 1 0\n0 1 0 1 0 1\n0 0 1 0 1 1\n1 1 1 0 0 0\n1 0 0 1 1 0\n0 1 0 1 0 1\n0 0 1 0 1 1\n").unwrap();
    let cb = dir.path().join("cb.toml");
    let trace = dir.path().join("trace.csv");
    let out = scma(&[
        "design", "--graph", path(&graph), "--scheme", "symmetric", "--M", "4", "--seed", "2",
        "--out", path(&cb), "--trace", path(&trace),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let t = std::fs::read_to_string(&trace).unwrap();
    assert!(t.starts_with("iter,objective,step_norm,status\n0,"));
    assert_eq!(code(&scma(&["validate", "--codebook", path(&cb)])), 0);

    let csv = dir.path().join("ber.csv");
    let args = ["simulate", "--codebook", path(&cb), "--snr-db", "0:5:10", "--frames", "4", "--seed", "1", "--out", path(&csv)];
    assert_eq!(code(&scma(&args)), 0);
    let first = std::fs::read_to_string(&csv).unwrap();
    let body: Vec<&str> = first.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body[0], "snr_db,total_bits,bit_errors,ber,ci_lo,ci_hi");
    assert_eq!(body.len(), 4);
    assert!(body[1].starts_with("0,4096,"));
    scma(&args);
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), first);
}
