mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::benchmark;

fn htlocate(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_htlocate"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("HTLOCATE_THREADS", t),
        None => cmd.env_remove("HTLOCATE_THREADS"),
    };
    cmd.output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = htlocate(args, None);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn c17() -> String {
    benchmark("c17_renumbered.bench").to_string_lossy().into_owned()
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn analyze_c17_json() {
    let text = ok(&["analyze", &c17(), "--k", "2"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let triggers: Vec<&str> = v["triggers"].as_array().unwrap().iter().map(|t| t["net"].as_str().unwrap()).collect();
    assert_eq!(triggers, ["N8->N11#7", "N9->N12#9"]);
    assert_eq!(v["payload"]["net"], "N12->N13#12");
    assert_eq!(v["filtered"][0], "N9->N10#8");
    for key in ["design", "config", "metrics", "filtered", "triggers", "payload", "metric_roles"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn analyze_formats() {
    let csv = ok(&["analyze", &c17(), "--format", "csv"]);
    assert!(csv.starts_with("net,src,dst,C,CC,BC,EVC,PR\n"));
    let dot = ok(&["analyze", &c17(), "--format", "dot"]);
    assert!(dot.starts_with("digraph {"));
    let stats = ok(&["parse", &c17()]);
    assert_eq!(stats, "c17: 5 inputs, 2 outputs, 6 gates, 13 vertices, 14 edges, 6 internal nets\n");
}

#[test]
fn missing_file_fails_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.json");
    let out = htlocate(&["analyze", "/no/such/file.bench", "-o", out_path.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    assert!(!out_path.exists());
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(htlocate(&["analyze", &c17(), "--bogus"], None).status.code(), Some(2));
    assert_eq!(htlocate(&["frobnicate"], None).status.code(), Some(2));
    assert_eq!(htlocate(&[], None).status.code(), Some(2));
    assert_eq!(htlocate(&["--help"], None).status.code(), Some(0));
}

#[test]
fn domain_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.bench");
    fs::write(&bad, "INPUT(a)\nz = MUX(a)\n").unwrap();
    let out = htlocate(&["parse", bad.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    let out = htlocate(&["analyze", &c17(), "--k", "0"], None);
    assert_eq!(out.status.code(), Some(1));
    let out = htlocate(&["analyze", &c17()], Some("zero"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_lists_flags() {
    let help = ok(&["analyze", "--help"]);
    for flag in [
        "--k", "--w-degree", "--w-closeness", "--filter", "--quantile", "--include-evc", "--damping", "--degree-mode",
        "--betweenness-mode", "--format", "--output",
    ] {
        assert!(help.contains(flag), "{flag} missing from help");
    }
    assert!(ok(&["--help"]).contains("HTLOCATE_THREADS"));
}

#[test]
fn corpus_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c17 = c17();
    for (dir, threads) in [(a.path(), "1"), (b.path(), "3")] {
        let out = htlocate(&["corpus", &c17, "-n", "10", "--seed", "1", "-o", dir.to_str().unwrap()], Some(threads));
        assert!(out.status.success());
    }
    let (fa, fb) = (read_dir_sorted(a.path()), read_dir_sorted(b.path()));
    assert_eq!(fa.len(), 12);
    assert_eq!(fa, fb);
}

#[test]
fn inject_and_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    ok(&["inject", &c17(), "--triggers", "N8->N11,N9->N12", "--victim", "N12->N13", "-o", d]);
    let infected = fs::read_to_string(dir.path().join("c17_ht.bench")).unwrap();
    assert!(infected.contains("HTT = AND(N8, N9)"));
    assert!(infected.contains("HTP = XOR(N12, HTT)"));

    let csv = ok(&["evaluate", d, "--target", "host", "--k", "2"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "design,instances,htt_tp,htt_fp,htt_fn,htp_tp,htp_fp,htp_fn");
    assert_eq!(lines[1], "c17,1,100.00,0.00,0.00,100.00,0.00,0.00");

    let out = htlocate(&["inject", &c17(), "--triggers", "N8->N11", "--victim", "N13->PO:N13", "-o", d], None);
    assert_eq!(out.status.code(), Some(1));

    let imp = tempfile::tempdir().unwrap();
    ok(&["inject", &c17(), "--edge", "N8->N9", "--victim-gate", "N13", "-o", imp.path().to_str().unwrap()]);
    let infected = fs::read_to_string(imp.path().join("c17_ht.bench")).unwrap();
    assert!(infected.contains("N13 = NAND(N10, N12, N9)"));
    let out = htlocate(&["inject", &c17(), "--edge", "N11->N12", "--victim-gate", "N13", "-o", d], None);
    assert!(String::from_utf8_lossy(&out.stderr).contains("creates back-edge"));
}

#[test]
fn simulate_outputs() {
    let csv = ok(&["simulate", &c17()]);
    assert!(csv.starts_with("net,signal_prob,toggle_prob\n"));
    assert!(csv.contains("\nN8,0.75,0.375\n"));

    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    ok(&["inject", &c17(), "--triggers", "N8->N11,N9->N12", "--victim", "N12->N13", "-o", d]);
    let infected = dir.path().join("c17_ht.bench");
    let cmp = ok(&["simulate", &c17(), "--compare", infected.to_str().unwrap(), "--trigger", "HTT"]);
    assert!(cmp.starts_with("vectors,32\n"));
    assert!(cmp.contains("differing_within_trigger,true"));
}

#[test]
fn analyze_is_deterministic_across_threads() {
    let path = benchmark("c3540.bench");
    let p = path.to_str().unwrap();
    let one = htlocate(&["analyze", p], Some("1"));
    let four = htlocate(&["analyze", p], Some("4"));
    let again = htlocate(&["analyze", p], Some("4"));
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(four.stdout, again.stdout);
}
