use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA: &str = "qc-cartan/report/1";

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub detail: Value,
}

/// A printed value that the engine does not reproduce. Listed, never failed
/// silently and never patched over.
#[derive(Debug, Serialize)]
pub struct Discrepancy {
    pub what: String,
    pub printed: Value,
    pub derived: Value,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub version: &'static str,
    pub command: String,
    pub n: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub signature: Option<(usize, usize)>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    pub passed: bool,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub known_discrepancies: Vec<Discrepancy>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub killing_calibration: Vec<Value>,
    /// Wall-clock milliseconds per check; the only nondeterministic field.
    pub timings_ms: BTreeMap<String, u128>,
}

impl Report {
    pub fn new(command: &str, n: Vec<usize>, signature: Option<(usize, usize)>, seed: u64, trials: Option<usize>) -> Self {
        Report {
            schema: SCHEMA,
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            n,
            signature,
            seed,
            trials,
            passed: true,
            checks: Vec::new(),
            known_discrepancies: Vec::new(),
            killing_calibration: Vec::new(),
            timings_ms: BTreeMap::new(),
        }
    }

    pub fn check(&mut self, name: impl Into<String>, pass: bool, detail: Value) {
        self.passed &= pass;
        self.checks.push(Check { name: name.into(), pass, detail });
    }

    /// Runs `f`, records its time under `name`, and adds the check it returns.
    pub fn timed<F: FnOnce() -> (bool, Value)>(&mut self, name: impl Into<String>, f: F) {
        let name = name.into();
        let t0 = Instant::now();
        let (pass, detail) = f();
        self.timings_ms.insert(name.clone(), t0.elapsed().as_millis());
        self.check(name, pass, detail);
    }

    pub fn discrepancy(&mut self, what: impl Into<String>, printed: Value, derived: Value) {
        self.known_discrepancies.push(Discrepancy { what: what.into(), printed, derived });
    }

    pub fn print_summary(&self) {
        print!("{}", self.summary());
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let detail = match &c.detail {
                Value::Null => String::new(),
                d => {
                    let s = d.to_string();
                    if s.len() > 160 {
                        format!(" {}…", &s[..s.char_indices().take_while(|(i, _)| *i < 160).last().map_or(0, |(i, _)| i)])
                    } else {
                        format!(" {s}")
                    }
                }
            };
            out += &format!("{} {}{}\n", if c.pass { "PASS" } else { "FAIL" }, c.name, detail);
        }
        for d in &self.known_discrepancies {
            out += &format!("NOTE {}: printed {} derived {}\n", d.what, d.printed, d.derived);
        }
        out += &format!("{}: {}\n", self.command, if self.passed { "all checks passed" } else { "certificate failure" });
        out
    }
}
