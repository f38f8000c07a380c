//! The binary's contract: subcommands, diagnostics on stderr, and exit codes
//! 0 (success), 1 (usage), 2 (data error).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stsae"))
}

fn dir(name: &str) -> PathBuf {
    let path = std::env::temp_dir()
        .join(format!("stsae-exit-{}", std::process::id()))
        .join(name);
    if path.exists() {
        fs::remove_dir_all(&path).unwrap();
    }
    fs::create_dir_all(&path).unwrap();
    path
}

fn write_valid_inputs(d: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let plots = d.join("plots.csv");
    let cov = d.join("cov.csv");
    let adj = d.join("adj.txt");
    fs::write(
        &plots,
        "area_id,year,value\nA,2008,40.0\nA,2009,41.0\nB,2008,11.0\nB,2009,9.5\n",
    )
    .unwrap();
    fs::write(&cov, "area_id,year,tcc\nA,2008,50\nA,2009,51\nB,2008,15\nB,2009,16\n").unwrap();
    fs::write(&adj, "A,B\n").unwrap();
    (plots, cov, adj)
}

#[test]
fn successful_fit_exits_zero() {
    let d = dir("ok");
    let (plots, cov, adj) = write_valid_inputs(&d);
    let out = bin()
        .args([
            "fit",
            "--plots",
            plots.to_str().unwrap(),
            "--cov",
            cov.to_str().unwrap(),
            "--adj",
            adj.to_str().unwrap(),
            "--out",
            d.join("fit").to_str().unwrap(),
            "--iterations",
            "40",
            "--burn-in",
            "10",
            "--seed",
            "1",
            "--quiet",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(d.join("fit/mu_summary.csv").exists());
}

#[test]
fn usage_error_exits_one() {
    let out = bin().args(["fit", "--no-such-flag"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn island_area_exits_two_and_names_area() {
    let d = dir("island");
    let (plots, cov, _) = write_valid_inputs(&d);
    let cov3 = d.join("cov3.csv");
    fs::write(
        &cov3,
        "area_id,year,tcc\nA,2008,50\nA,2009,51\nB,2008,15\nB,2009,16\nC,2008,5\nC,2009,6\n",
    )
    .unwrap();
    let adj = d.join("adj_island.txt");
    fs::write(&adj, "A,B\n").unwrap(); // C disconnected
    let out = bin()
        .args([
            "fit",
            "--plots",
            plots.to_str().unwrap(),
            "--cov",
            cov3.to_str().unwrap(),
            "--adj",
            adj.to_str().unwrap(),
            "--out",
            d.join("fit").to_str().unwrap(),
            "--iterations",
            "40",
            "--burn-in",
            "10",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains('C'), "diagnostic should name the area: {stderr}");
    let _ = cov; // keep the valid file alive for clarity
}

#[test]
fn missing_file_exits_two() {
    let d = dir("missing");
    let (_, cov, adj) = write_valid_inputs(&d);
    let out = bin()
        .args([
            "fit",
            "--plots",
            d.join("nope.csv").to_str().unwrap(),
            "--cov",
            cov.to_str().unwrap(),
            "--adj",
            adj.to_str().unwrap(),
            "--out",
            d.join("fit").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_exits_zero() {
    let out = bin().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    for sub in ["fit", "direct", "trend", "waic-compare", "simulate", "summarize"] {
        assert!(stdout.contains(sub), "help should list `{sub}`");
    }
}
