use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use loose3::{Hypergraph3, LooseTree};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_loose3"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json output")
}

fn ok_text(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn check_value(report: &Value, name: &str) -> Value {
    report["table"]["rows"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r[0] == name)
        .map(|r| r[1].clone())
        .unwrap_or_else(|| panic!("no check {name}"))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn gen_binary_writes_a_fifteen_vertex_tree() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.lt");
    let v = ok_json(&["gen", "binary", "--levels", "4", "--out", p(&out)]);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["n"], 15);
    let t = LooseTree::from_lt(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(t.n(), 15);
    assert_eq!(t.to_lt(), fs::read_to_string(&out).unwrap());
    let meta: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("b.lt.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["format"], "LT v1");
    assert_eq!(meta["seed"], 0);
}

#[test]
fn gen_pm_free_records_the_small_side() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("h.h3");
    ok_json(&["gen", "pm-free", "--n", "9", "--out", p(&out)]);
    let meta: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("h.h3.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["a_size"], 2);
    let h = Hypergraph3::from_h3(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(h.n(), 9);
    assert_eq!(h.to_h3(), fs::read_to_string(&out).unwrap());
}

#[test]
fn every_generator_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[(&str, &[&str])] = &[
        ("path", &["--n", "7"]),
        ("binary", &["--levels", "3"]),
        ("random-tree", &["--n", "21"]),
        ("pm-free", &["--n", "12"]),
        ("parity", &["--n", "10"]),
        ("low-codeg", &["--n", "9", "--a", "3"]),
        ("ap-tree", &["--n", "8"]),
        ("ap-host", &["--n", "8", "--f", "5"]),
        ("planted", &["--t", "4", "--m", "5", "--exceptional", "1"]),
    ];
    for (kind, extra) in cases {
        let out = dir.path().join(kind);
        let mut args = vec!["gen", kind, "--seed", "3", "--out", p(&out)];
        args.extend_from_slice(extra);
        let v = ok_json(&args);
        let text = fs::read_to_string(&out).unwrap();
        if v["format"] == "LT v1" {
            assert_eq!(LooseTree::from_lt(&text).unwrap().to_lt(), text, "{kind}");
        } else {
            assert_eq!(Hypergraph3::from_h3(&text).unwrap().to_h3(), text, "{kind}");
        }
        // Same seed, same file.
        let again = dir.path().join(format!("{kind}.2"));
        args[5] = p(&again);
        ok_json(&args);
        assert_eq!(fs::read_to_string(&again).unwrap(), text, "{kind}");
    }
}

#[test]
fn gen_path_rejects_even_n() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["gen", "path", "--n", "4", "--out", p(&dir.path().join("x.lt"))]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("odd"));
}

#[test]
fn unknown_flags_are_rejected() {
    assert!(!run(&["scan", "--family", "path", "--n", "9", "--density", "0.5", "--frobnicate"]).status.success());
}

#[test]
fn check_finds_the_berge_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("c.h3");
    fs::write(&file, "5 2\n1 2 3\n2 3 4\n").unwrap();
    let v = ok_json(&["check", p(&file)]);
    assert_eq!(check_value(&v, "berge-cycle"), "yes");
    assert_eq!(check_value(&v, "loose-tree"), "no");
}

#[test]
fn check_collapses_the_progression_tree() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("a.h3");
    ok_json(&["gen", "ap-tree", "--n", "6", "--out", p(&file)]);
    let v = ok_json(&["check", p(&file)]);
    assert_eq!(check_value(&v, "faces"), 10);
    assert_eq!(check_value(&v, "collapse"), "success");
    let csv = ok_text(&["check", p(&file), "--format", "csv"]);
    assert!(csv.starts_with("check,value\n"));
    assert!(csv.contains("collapse,success\n"));
}

#[test]
fn check_reverifies_tree_files() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("t.lt");
    ok_json(&["gen", "random-tree", "--n", "31", "--seed", "8", "--out", p(&file)]);
    let v = ok_json(&["check", p(&file)]);
    assert_eq!(check_value(&v, "valid-ordering"), "pass");
    assert_eq!(check_value(&v, "loose-tree"), "yes");
}

#[test]
fn check_reports_parse_errors_with_lines() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.h3");
    fs::write(&file, "4 1\n# comment\n0 1 9\n").unwrap();
    let out = run(&["check", p(&file)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn exact_embed_proves_absence_for_the_matching_obstruction() {
    let dir = tempfile::tempdir().unwrap();
    let (t, h) = (dir.path().join("b.lt"), dir.path().join("p.h3"));
    ok_json(&["gen", "binary", "--levels", "4", "--out", p(&t)]);
    ok_json(&["gen", "pm-free", "--n", "15", "--out", p(&h)]);
    let v = ok_json(&["embed", "--tree", p(&t), "--host", p(&h), "--seed", "12"]);
    assert_eq!(v["status"], "proven-absent");
    assert_eq!(v["seed"], 12);
    assert!(v["timing"].get("stats.elapsed_ms").is_some());
}

#[test]
fn pipeline_embeds_into_a_planted_host() {
    let dir = tempfile::tempdir().unwrap();
    let (t, h) = (dir.path().join("t.lt"), dir.path().join("h.h3"));
    ok_json(&["gen", "planted", "--seed", "5", "--out", p(&h)]);
    ok_json(&["gen", "random-tree", "--n", "283", "--seed", "5", "--out", p(&t)]);
    let meta = dir.path().join("h.h3.meta.json");
    let args = ["embed", "--method", "pipeline", "--tree", p(&t), "--host", p(&h), "--partition", p(&meta), "--seed", "5"];
    let mut v = ok_json(&args);
    assert_eq!(v["status"], "found", "{}", v["detail"]);
    assert_eq!(v["verified"], true);
    let mut w = ok_json(&args);
    v.as_object_mut().unwrap().remove("timing");
    w.as_object_mut().unwrap().remove("timing");
    assert_eq!(v, w);
}

#[test]
fn assign_verifies_its_output() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.lt");
    ok_json(&["gen", "random-tree", "--n", "61", "--seed", "2", "--out", p(&t)]);
    let v = ok_json(&["assign", "--tree", p(&t), "--t", "7", "--piece-target", "5"]);
    assert_eq!(v["verified"], true, "{}", v["report"]);
    assert_eq!(v["loads"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).sum::<u64>(), 61);
}

#[test]
fn absorb_demo_completes_and_repeats() {
    for policy in ["fixed", "adaptive"] {
        let mut a = ok_json(&["absorb-demo", "--seed", "4", "--policy", policy]);
        assert_eq!(a["verified"], true);
        let mut b = ok_json(&["absorb-demo", "--seed", "4", "--policy", policy]);
        a.as_object_mut().unwrap().remove("timing");
        b.as_object_mut().unwrap().remove("timing");
        assert_eq!(a, b);
    }
}

#[test]
fn collapse_reports_the_face_count() {
    let v = ok_json(&["collapse", "--n", "9"]);
    assert_eq!(v["faces"], 28);
    assert_eq!(v["collapse"], "success");
    assert_eq!(v["verified"], true);
    assert_eq!(v["fallback_from"], Value::Null);
}

#[test]
fn scan_with_no_trials_is_just_the_header() {
    let csv = ok_text(&["scan", "--family", "path", "--n", "9", "--density", "0.3,0.5", "--trials", "0", "--format", "csv"]);
    assert_eq!(csv, "schema,n,density,family,trials,successes,mean_runtime_ms\n");
}

fn scan_rows(family: &str, workers: &str) -> Vec<Vec<String>> {
    let out = bin()
        .args(["scan", "--family", family, "--n", "15", "--density", "0.03,0.05,0.08", "--trials", "12", "--seed", "7"])
        .args(["--format", "csv"])
        .env("LOOSE3_WORKERS", workers)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let mut cells: Vec<String> = l.split(',').map(String::from).collect();
            cells.pop(); // runtime
            cells
        })
        .collect()
}

#[test]
fn scan_is_independent_of_the_worker_count() {
    assert_eq!(scan_rows("path", "1"), scan_rows("path", "4"));
}

#[test]
fn binary_even_trees_embed_no_more_often_than_paths() {
    let successes = |rows: Vec<Vec<String>>| -> u64 { rows.iter().map(|r| r[5].parse::<u64>().unwrap()).sum() };
    let path = scan_rows("path", "2");
    let binary = scan_rows("binary-even", "2");
    for r in path.iter().chain(&binary) {
        assert!(r[5].parse::<u64>().unwrap() <= r[4].parse::<u64>().unwrap());
    }
    assert!(successes(binary) <= successes(path));
}

#[test]
fn scan_rejects_oversized_exact_runs() {
    let out = run(&["scan", "--family", "random", "--n", "41", "--density", "0.5"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap"));
}
