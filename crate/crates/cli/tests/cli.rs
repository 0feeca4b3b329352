use std::path::Path;
use std::process::{Command, Output};

use z2harm::leafspace::{LeafEdge, LeafGraph, LeafVertex};
use z2harm_cli::export::{export_graph, import_graph, GraphFormat};
use z2harm_cli::json;

fn z2harm(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_z2harm"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn segment() -> LeafGraph {
    let v = |level, c: usize| LeafVertex { level, components: vec![c], zeros: vec![] };
    LeafGraph { vertices: vec![v(0.0, 0), v(0.5, 1)], edges: vec![LeafEdge { ends: [0, 1], length: 0.5 }] }
}

#[test]
fn graph_export_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let g = segment();
    export_graph(&g, GraphFormat::Json, &dir.path().join("g.json")).unwrap();
    assert_eq!(import_graph(&dir.path().join("g.json")).unwrap(), g);
    export_graph(&g, GraphFormat::Dot, &dir.path().join("g.dot")).unwrap();
    let dot = std::fs::read_to_string(dir.path().join("g.dot")).unwrap();
    assert!(dot.contains("v0 -- v1 [label=\"0.500000\"]"), "{dot}");
}

#[test]
fn malformed_json_exits_with_parse_code() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ \"cells\": [").unwrap();
    let out = z2harm(dir.path(), &["cover", "--complex", bad.to_str().unwrap(), "--locus", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "PARSE");
}

#[test]
fn unknown_preset_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(z2harm(dir.path(), &["cover", "--preset", "klein-bottle"]).status.code(), Some(2));
}

#[test]
fn hopf_link_is_obstructed() {
    let dir = tempfile::tempdir().unwrap();
    let out = z2harm(dir.path(), &["pipeline", "--preset", "hopf"]);
    assert_eq!(out.status.code(), Some(5));
    let report: serde_json::Value = json::read(&dir.path().join("report.json")).unwrap();
    assert_eq!(report["exit_code"], 5);
    assert_eq!(report["verdicts"]["obstruction"]["passes"], false);
    assert!(!dir.path().join("form.json").exists());
}

#[test]
fn pillowcase_pipeline_gives_a_half_segment() {
    let dir = tempfile::tempdir().unwrap();
    let out = z2harm(dir.path(), &["pipeline", "--preset", "pillowcase"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let report: serde_json::Value = json::read(&dir.path().join("report.json")).unwrap();
    assert_eq!(report["verdicts"]["tree"], true);
    assert_eq!(report["verdicts"]["commensurable"], true);
    let g = import_graph(&dir.path().join("leaf_graph.json")).unwrap();
    assert_eq!(g.edges.len(), 1);
    assert!((g.edges[0].length - 0.5).abs() < 1e-8);
}

#[test]
fn subcommands_chain_through_a_form_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(z2harm(d, &["harmonic", "--preset", "unlink"]).status.code(), Some(0));
    let form = d.join("form.json");
    let form = form.to_str().unwrap();
    let fit = z2harm(d, &["fit", "--preset", "unlink", "--form", form]);
    assert_eq!(fit.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&fit.stdout).contains("Σ2"));
    let leaves = z2harm(d, &["leafspace", "--preset", "unlink", "--form", form, "--oracle", "0", "1"]);
    assert_eq!(leaves.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&leaves.stdout).contains("d_v(0, 1) <="));
    let report = d.join("mine.json");
    let prune = z2harm(d, &["prune", "--preset", "unlink", "--form", form, "--pair", "Σ1,Σ2", "--report", report.to_str().unwrap()]);
    assert_eq!(prune.status.code(), Some(0), "{}", String::from_utf8_lossy(&prune.stderr));
    let p: serde_json::Value = json::read(&report).unwrap();
    assert_eq!(p["result"]["transitivity"]["transitive"], true);
}

#[test]
fn a_form_for_another_cover_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(z2harm(d, &["harmonic", "--preset", "unlink"]).status.code(), Some(0));
    let form = d.join("form.json");
    let out = z2harm(d, &["fit", "--preset", "pillowcase", "--form", form.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}
