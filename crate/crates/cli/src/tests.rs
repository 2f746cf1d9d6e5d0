use clap::Parser;
use qc_cartan::chart::{chart_to_file, heisenberg};
use qc_cartan::cochain::{write_components, CurvatureComponents};
use qc_cartan::random::rng;
use qc_cartan::tensor::make_constants;
use serde_json::{json, Value};

use super::{execute, Cli};
use crate::report::Report;

fn go(args: &[&str]) -> (u8, Option<Report>) {
    let cli = Cli::try_parse_from(std::iter::once("qc-cartan").chain(args.iter().copied())).unwrap();
    execute(&cli)
}

fn report(args: &[&str]) -> (u8, Value) {
    let (code, rep) = go(args);
    (code, serde_json::to_value(rep.unwrap()).unwrap())
}

fn parse_error(args: &[&str]) -> i32 {
    let e = Cli::try_parse_from(std::iter::once("qc-cartan").chain(args.iter().copied())).err().unwrap();
    e.exit_code()
}

#[test]
fn flat_n1_passes_with_17_generators() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let (code, _) = go(&["verify", "flat", "--n", "1", "--json", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["schema"], "qc-cartan/report/1");
    assert_eq!(v["passed"], true);
    assert_eq!(v["n"], json!([1]));
    assert_eq!(v["checks"][0]["detail"]["generators_conjugate_pairs_once"], 17);
    assert_eq!(v["checks"][0]["detail"]["generators"], 21);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(go(&["verify", "flat", "--n", "0"]).0, 2);
    assert_eq!(go(&["lie", "jacobi", "--n", "0"]).0, 2);
    assert_eq!(go(&["verify", "flat", "--n", "1", "--signature", "2,0"]).0, 2);
    assert_eq!(go(&["example", "heisenberg", "--n", "2"]).0, 2);
    assert_eq!(go(&["example", "heisenberg", "--gauge", "0"]).0, 2);
    assert_eq!(parse_error(&["verify", "flat", "--signature", "1"]), 2);
    assert_eq!(parse_error(&["nonsense"]), 2);
    assert_eq!(parse_error(&["verify", "flat", "--n", "-1"]), 2);
}

#[test]
fn unwritable_json_path_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("r.json");
    assert_eq!(go(&["verify", "flat", "--n", "1", "--json", path.to_str().unwrap()]).0, 2);
}

#[test]
fn killing_exits_one_and_lists_discrepancies() {
    let (code, v) = report(&["lie", "killing", "--n", "1"]);
    assert_eq!(code, 1);
    assert_eq!(v["passed"], false);
    let notes = v["known_discrepancies"].as_array().unwrap();
    let gamma = notes.iter().find(|d| d["what"].as_str().unwrap().contains("Gamma.Gamma")).unwrap();
    assert_eq!(gamma["printed"], "-7");
    assert_eq!(gamma["derived"], "-8");
    // trace-fitted closed formula is green
    let fitted = v["checks"].as_array().unwrap().iter().find(|c| c["name"].as_str().unwrap().contains("trace-fitted")).unwrap();
    assert_eq!(fitted["pass"], true);
}

#[test]
fn normality_n2_fifty_trials() {
    let (code, v) = report(&["verify", "normality", "--n", "2", "--trials", "50", "--seed", "7", "--cochains", "10"]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["checks"][0]["detail"]["passed"], 50);
    assert_eq!(v["seed"], 7);
    assert_eq!(v["trials"], 50);
}

#[test]
fn reports_are_deterministic_apart_from_timings() {
    let args = ["lie", "jacobi", "--n", "2", "--trials", "20", "--seed", "3"];
    let (_, mut a) = report(&args);
    let (_, mut b) = report(&args);
    assert!(a["timings_ms"].is_object());
    a.as_object_mut().unwrap().remove("timings_ms");
    b.as_object_mut().unwrap().remove("timings_ms");
    assert_eq!(a, b);
    // another seed samples other triples
    let (_, mut c) = report(&["lie", "jacobi", "--n", "2", "--trials", "20", "--seed", "4"]);
    c.as_object_mut().unwrap().remove("timings_ms");
    assert_ne!(a, c);
}

#[test]
fn components_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let c = make_constants(1, (1, 0)).unwrap();
    let comps = CurvatureComponents::random(&mut rng(5), &c);
    let path = dir.path().join("k.json");
    std::fs::write(&path, write_components(&comps, (1, 0))).unwrap();
    let (code, v) = report(&["verify", "normality", "--components", path.to_str().unwrap()]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["n"], json!([1]));
}

#[test]
fn bad_components_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k.json");
    for text in ["", "{}", "not json", "{\"n\": 1}", "{\"n\": 1, \"signature\": [1, 0], \"R\": [[[], \"1\", \"1\"]]}"] {
        std::fs::write(&path, text).unwrap();
        assert_eq!(go(&["verify", "normality", "--components", path.to_str().unwrap()]).0, 2, "accepted {text:?}");
    }
    let missing = dir.path().join("missing.json");
    assert_eq!(go(&["verify", "normality", "--components", missing.to_str().unwrap()]).0, 2);
}

#[test]
fn heisenberg_chart_file_and_gauge() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.json");
    let p = path.to_str().unwrap();
    std::fs::write(&path, serde_json::to_string_pretty(&chart_to_file(&heisenberg())).unwrap()).unwrap();
    assert_eq!(go(&["example", "heisenberg", "--chart", p]).0, 0);
    let (code, rep) = go(&["example", "heisenberg", "--gauge", "3/5"]);
    assert_eq!(code, 0);
    assert!(rep.unwrap().summary().contains("\"m\":\"3/5\""));

    // doubled metric: a readable chart that fails the contact axiom
    let mut f = chart_to_file(&heisenberg());
    f.g = (0..4).map(|i| (0..4).map(|j| if i == j { "1".into() } else { "0".into() }).collect()).collect();
    std::fs::write(&path, serde_json::to_string(&f).unwrap()).unwrap();
    assert_eq!(go(&["example", "heisenberg", "--chart", p]).0, 1);

    std::fs::write(&path, "{\"coordinates\": []}").unwrap();
    assert_eq!(go(&["example", "heisenberg", "--chart", p]).0, 2);
}

#[test]
fn summary_lines() {
    let (code, rep) = go(&["lie", "maurer-cartan", "--n", "1"]);
    assert_eq!(code, 0);
    let s = rep.unwrap().summary();
    assert!(s.lines().any(|l| l.starts_with("PASS ")));
    assert!(s.trim_end().ends_with("lie maurer-cartan: all checks passed"));
}
