//! One line per acceptance criterion. Runs the release-style certificates
//! through the binary and exits nonzero if any criterion is red.

use std::process::Command;
use std::time::{Duration, Instant};

use serde_json::Value;

struct Run {
    code: i32,
    report: Value,
    wall: Duration,
}

fn run(args: &[&str]) -> Run {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    let t0 = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_qc-cartan"))
        .args(args)
        .arg("--json")
        .arg(&json)
        .output()
        .expect("spawn qc-cartan");
    let wall = t0.elapsed();
    let code = out.status.code().unwrap_or(-1);
    let report = std::fs::read_to_string(&json)
        .ok()
        .and_then(|t| serde_json::from_str(&t).ok())
        .unwrap_or(Value::Null);
    Run { code, report, wall }
}

fn checks(r: &Run) -> &[Value] {
    r.report["checks"].as_array().map_or(&[], Vec::as_slice)
}

fn failing(r: &Run) -> Vec<String> {
    checks(r)
        .iter()
        .filter(|c| c["pass"] != Value::Bool(true))
        .map(|c| c["name"].as_str().unwrap_or("?").to_string())
        .collect()
}

fn check_ms(r: &Run, needle: &str) -> u64 {
    r.report["timings_ms"]
        .as_object()
        .map_or(0, |m| m.iter().filter(|(k, _)| k.contains(needle)).filter_map(|(_, v)| v.as_u64()).sum())
}

fn all_green(r: &Run, expect: usize) -> Result<String, String> {
    let bad = failing(r);
    if r.code == 0 && bad.is_empty() && checks(r).len() >= expect {
        Ok(format!("{} checks", checks(r).len()))
    } else {
        Err(format!("exit {} failing {:?}", r.code, bad))
    }
}

fn jacobi() -> Result<String, String> {
    let r = run(&["lie", "jacobi", "--trials", "100"]);
    all_green(&r, 3)?;
    let ms = check_ms(&r, "Jacobi");
    if ms >= 5000 {
        return Err(format!("{ms} ms for 300 triples"));
    }
    Ok(format!("300 triples over n=1,2,3 exactly zero in {ms} ms (wall {} ms)", r.wall.as_millis()))
}

fn killing() -> Result<String, String> {
    let r = run(&["lie", "killing"]);
    let notes: Vec<String> = r.report["known_discrepancies"]
        .as_array()
        .map_or(vec![], |v| v.iter().map(|d| format!("{} printed {} derived {}", d["what"].as_str().unwrap_or("?"), d["printed"], d["derived"])).collect());
    let duality: Vec<String> = checks(&r)
        .iter()
        .filter(|c| c["name"].as_str().is_some_and(|s| s.contains("duality")) && c["pass"] != Value::Bool(true))
        .map(|c| format!("{} {}", c["name"].as_str().unwrap_or("?"), c["detail"]))
        .collect();
    all_green(&r, 12).map_err(|e| format!("{e}; {}; {}", duality.join("; "), notes.join("; ")))
}

fn maurer_cartan() -> Result<String, String> {
    all_green(&run(&["lie", "maurer-cartan"]), 2)
}

fn flat() -> Result<String, String> {
    let r = run(&["verify", "flat"]);
    all_green(&r, 2)?;
    let c = checks(&r);
    let g1 = &c[0]["detail"]["generators_conjugate_pairs_once"];
    if g1 != 17 {
        return Err(format!("n=1 generator count {g1}"));
    }
    let ms = check_ms(&r, "d^2");
    if ms >= 60_000 {
        return Err(format!("{ms} ms"));
    }
    Ok(format!("n=1 (17 generators) and n=2 (28) exactly zero in {ms} ms"))
}

fn bianchi() -> Result<String, String> {
    let r = run(&["verify", "bianchi"]);
    all_green(&r, 4)?;
    Ok(format!("curved d^2, Bianchi combinations, negative control; {} ms", r.wall.as_millis()))
}

fn normality() -> Result<String, String> {
    let r = run(&["verify", "normality", "--trials", "50", "--cochains", "100"]);
    all_green(&r, 4)?;
    Ok("50 component sets and 100 cochains per n=1,2".into())
}

fn g1() -> Result<String, String> {
    all_green(&run(&["lie", "g1", "--trials", "100"]), 2)
}

fn heisenberg() -> Result<String, String> {
    all_green(&run(&["example", "heisenberg"]), 10)
}

fn homogeneity() -> Result<String, String> {
    all_green(&run(&["classify", "homogeneity"]), 4)
}

fn main() {
    let criteria: [(&str, fn() -> Result<String, String>); 9] = [
        ("Jacobi identity", jacobi),
        ("Killing form calibration", killing),
        ("Maurer-Cartan consistency", maurer_cartan),
        ("flat d^2 = 0", flat),
        ("curved Bianchi certificate", bianchi),
        ("normality", normality),
        ("G1 group laws", g1),
        ("Heisenberg example", heisenberg),
        ("homogeneity table", homogeneity),
    ];
    let mut red = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(d) => println!("criterion {} PASS {name}: {d}", i + 1),
            Err(d) => {
                red += 1;
                println!("criterion {} FAIL {name}: {d}", i + 1);
            }
        }
    }
    println!("{} of {} criteria green", criteria.len() - red, criteria.len());
    if red > 0 {
        std::process::exit(1);
    }
}
