// Replays the fuzz seed corpora on stable with the same invariants as the
// libFuzzer targets.
use std::path::PathBuf;

use qc_cartan::chart::{chart_to_file, parse_chart};
use qc_cartan::cochain::{read_components, write_components};

fn corpus(name: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(name);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| {
            let t = std::fs::read_to_string(&p).unwrap();
            (p, t)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty());
    out
}

#[test]
fn component_seeds() {
    let mut accepted = 0;
    for (p, text) in corpus("components") {
        if let Ok((comps, c)) = read_components(&text) {
            accepted += 1;
            let again = write_components(&comps, c.signature);
            let (back, _) = read_components(&again).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            assert_eq!(write_components(&back, c.signature), again);
        }
    }
    assert_eq!(accepted, 5);
}

#[test]
fn chart_seeds() {
    let mut passed = 0;
    for (p, text) in corpus("chart") {
        if let Ok(chart) = parse_chart(&text) {
            passed += chart.certify().passed() as usize;
            let again = serde_json::to_string(&chart_to_file(&chart)).unwrap();
            let back = parse_chart(&again).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            assert_eq!(back.eta, chart.eta);
        }
    }
    // only the Heisenberg seed is a valid qc chart
    assert_eq!(passed, 1);
}
