//! End-to-end checks of the command-line surface: formats, exit codes and
//! byte-level determinism.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_pditlab")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

#[test]
fn construct_and_check_family_one() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("s.json");
    let out = run(&["construct", "--family", "one", "--D", "3", "--N", "3", "--out",
        state.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(state.exists());

    let out = run(&["check", "--in", state.to_str().unwrap(), "--psd", "--ppt", "--closeness"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"psd\""));
    assert!(text.contains("\"ppt\""));
    assert!(text.contains("\"epsilon\""));
}

#[test]
fn ghz_fails_the_ppt_check_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("g.json");
    let out = run(&["construct", "--family", "ghz", "--d", "2", "--N", "2", "--out",
        state.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["check", "--in", state.to_str().unwrap(), "--ppt"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_flags_exit_one() {
    let out = run(&["check", "--nonsense"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["distill", "--family", "one", "--D", "3", "--N", "3", "--k-min", "5",
        "--k-max", "2", "--csv", "/tmp/never.csv"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn distill_csv_contract_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = run(&["distill", "--family", "two", "--unitary", "vandermonde", "--D", "4",
            "--N", "3", "--k-min", "1", "--k-max", "40", "--csv", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let bytes_a = std::fs::read(&a).unwrap();
    let bytes_b = std::fs::read(&b).unwrap();
    assert_eq!(bytes_a, bytes_b, "re-running with identical flags must be byte-identical");

    let text = String::from_utf8(bytes_a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "family,D,N,k,p_success,K_DW,K_DW_raw,K_scaled");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 40);
    for (i, row) in rows.iter().enumerate() {
        assert!(row.starts_with(&format!("two,4,3,{},", i + 1)), "row {i}: {row}");
    }
}

#[test]
fn figures_emits_all_csv_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["figures", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["fig1a.csv", "fig1b.csv", "fig2a.csv", "fig2b.csv", "fig3.csv", "fig4a.csv",
        "fig4b.csv"]
    {
        let path = dir.path().join(name);
        assert!(path.exists(), "{name} missing");
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("family,D,N,k,"), "{name} header");
    }
    // Figure-1 analogues share identical (k, D) grids.
    let grid = |p: &Path| -> Vec<(String, String)> {
        std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                (f[1].to_string(), f[3].to_string())
            })
            .collect()
    };
    assert_eq!(grid(&dir.path().join("fig1a.csv")), grid(&dir.path().join("fig1b.csv")));
}

#[test]
fn lemma_suite_reports() {
    let out = run(&["lemmas", "--suite", "v4", "--D", "3", "--N", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"pass\":true"));

    let out = run(&["lemmas", "--suite", "a1", "--trials", "50"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn bell_subcommand_reports_the_violation() {
    let out = run(&["bell", "--n", "1", "--restarts", "20"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let value: f64 = text
        .split("\"value\":")
        .nth(1)
        .unwrap()
        .split(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!(value >= 2.82, "optimized value {value}");
}
