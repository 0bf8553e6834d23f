use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn opfactor(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opfactor"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn dir() -> tempfile::TempDir {
    tempfile::tempdir().unwrap()
}

#[test]
fn gen_counts() {
    let d = dir();
    let g = json(&opfactor(d.path(), &["gen", "--family", "diamond", "--n", "2"]));
    assert_eq!(g["vertices"].as_array().unwrap().len(), 12);
    assert_eq!(g["edges"].as_array().unwrap().len(), 16);
    let l = json(&opfactor(d.path(), &["gen", "--family", "laakso", "--n", "0"]));
    assert_eq!(l["vertices"], serde_json::json!(["0", "1"]));
    assert_eq!(l["edges"], serde_json::json!([[0, 1]]));
    let t = json(&opfactor(d.path(), &["gen", "--family", "tree", "--n", "3"]));
    assert_eq!(t["vertices"].as_array().unwrap().len(), 15);
    assert_eq!(t["provenance"]["seed"], 0);
}

#[test]
fn bound_values() {
    let d = dir();
    let out = opfactor(d.path(), &["bound", "--family", "diamond", "--n", "1", "--modulus", "l2-analytic"]);
    assert!(out.status.success());
    let v: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!((v - 2f64.sqrt()).abs() < 1e-9);
    let out = opfactor(d.path(), &["bound", "--family", "diamond", "--n", "3", "--modulus", "constant:0"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "1.0000000000000000");
}

#[test]
fn malformed_json_exits_two() {
    let d = dir();
    std::fs::write(d.path().join("bad.json"), "{\"graph\": [1,").unwrap();
    let out = opfactor(d.path(), &["report", "--embedding", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8(out.stderr).unwrap();
    assert!(msg.contains("bad.json") && msg.contains("line 1"), "{msg}");
}

#[test]
fn bad_arguments_exit_two() {
    let d = dir();
    for args in [
        vec!["gen", "--family", "hypercube", "--n", "1"],
        vec!["bound", "--family", "diamond", "--n", "1", "--modulus", "wobbly"],
        vec!["modulus", "--space", "l2", "--dim", "2", "--eps", "0"],
        vec!["dist"],
    ] {
        let out = opfactor(d.path(), &args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn cap_exceeded_exits_three() {
    let d = dir();
    let out = opfactor(d.path(), &["gen", "--family", "laakso", "--n", "3", "--laakso-cap", "2"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8(out.stderr).unwrap().contains("--laakso-cap"));
    let out = opfactor(d.path(), &["embed", "--construction", "baudier", "--level", "4"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn pipeline_round_trip() {
    let d = dir();
    let p = d.path();
    assert!(opfactor(p, &["gen", "--family", "diamond", "--n", "1", "--out", "g.json"]).status.success());
    let csv = opfactor(p, &["dist", "--graph", "g.json"]);
    assert_eq!(String::from_utf8(csv.stdout).unwrap(), "00,01,10,11\n0,1,1,2\n1,0,2,1\n1,2,0,1\n2,1,1,0\n");
    assert!(opfactor(p, &["embed", "--construction", "js", "--graph", "g.json", "--space", "l2", "--out", "e.json"])
        .status
        .success());
    let r = json(&opfactor(p, &["report", "--embedding", "e.json"]));
    assert_eq!(r["lip"], 1.0);
    assert!((r["D"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-12);
    let c = json(&opfactor(p, &["certify", "--embedding", "e.json"]));
    assert_eq!(c["holds"], true);
    assert_eq!(c["family"], "diamond");
}

#[test]
fn certify_rescales_long_maps() {
    let d = dir();
    let p = d.path();
    // A 3× stretched square.
    let emb = r#"{"graph": {"family": "diamond", "n": 1,
        "vertices": ["00", "01", "10", "11"], "edges": [[0,1],[0,2],[1,3],[2,3]]},
        "space": {"kind": "l2", "dim": 2},
        "map": {"00": [0,0], "01": [0,3], "10": [3,0], "11": [3,3]}}"#;
    std::fs::write(p.join("e.json"), emb).unwrap();
    let c = json(&opfactor(p, &["certify", "--embedding", "e.json"]));
    assert!((c["scale"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(c["holds"], true);
}

#[test]
fn modulus_csv() {
    let d = dir();
    let out = opfactor(d.path(), &["modulus", "--space", "l1", "--dim", "2", "--eps", "0.25,0.5"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "eps,delta,sup_midpoint");
    assert_eq!(lines[1], "0.25000000000000000,0.0,1.0000000000000000");
    assert_eq!(lines.len(), 3);
}

#[test]
fn witness_output() {
    let d = dir();
    std::fs::write(d.path().join("v.json"), "[[1,0,0],[0,1,0],[0,0,1]]").unwrap();
    let w = json(&opfactor(d.path(), &["witness", "--vectors", "v.json", "--space", "l1"]));
    assert!((w["psi"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!(w["c"].as_f64().unwrap() >= 1.0);
}

#[test]
fn thread_count_does_not_change_output() {
    let d = dir();
    let args = ["search", "--family", "laakso", "--n", "1", "--restarts", "6", "--steps", "150"];
    let one = opfactor(d.path(), &[&args[..], &["--threads", "1"]].concat());
    let four = opfactor(d.path(), &[&args[..], &["--threads", "4"]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn seed_changes_random_embeddings() {
    let d = dir();
    let args = ["embed", "--construction", "bourgain", "--n", "3", "--space", "l2", "--dim", "4", "--random-signs"];
    let a = opfactor(d.path(), &[&args[..], &["--seed", "1"]].concat());
    let b = opfactor(d.path(), &[&args[..], &["--seed", "2"]].concat());
    assert_ne!(a.stdout, b.stdout);
}
