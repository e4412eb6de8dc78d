//! Recompute `expected_keys` for every corpus case from its reference JQL,
//! using the brute-force filter over the bundled fixture.
//!
//! Usage: freeze-corpus [CORPUS] [--check]

use std::process::ExitCode;

use jiragpt_core::fixture::Fixture;
use jiragpt_core::jql::{parse_jql, validate};
use jiragpt_oracle::brute_force;
use serde_json::Value;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let check = args.iter().any(|a| a == "--check");
    let path = args
        .iter()
        .find(|a| !a.starts_with("--"))
        .cloned()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/corpus.json").to_string());

    let text = std::fs::read_to_string(&path).expect("read corpus");
    let mut corpus: Value = serde_json::from_str(&text).expect("corpus is JSON");
    let fx = Fixture::bundled();
    let mut changed = 0;
    for case in corpus.as_array_mut().expect("corpus is an array") {
        let id = case["id"].as_str().unwrap_or("?").to_string();
        let jql = case["reference_jql"].as_str().expect("reference_jql");
        let query = match parse_jql(jql) {
            Ok(q) => q,
            Err(e) => {
                eprintln!("{id}: reference does not parse: {e}");
                return ExitCode::FAILURE;
            }
        };
        if let Err(e) = validate(&query) {
            eprintln!("{id}: reference does not type-check: {e}");
            return ExitCode::FAILURE;
        }
        let keys: Vec<Value> = brute_force(&query, &fx.issues, fx.clock)
            .into_iter()
            .map(Value::String)
            .collect();
        let mut sorted = keys.clone();
        sorted.sort_by_key(|k| {
            let s = k.as_str().unwrap();
            s.rsplit_once('-').and_then(|(_, n)| n.parse::<u32>().ok()).unwrap_or(0)
        });
        if case["expected_keys"] != Value::Array(sorted.clone()) {
            changed += 1;
            if check {
                eprintln!("{id}: expected_keys out of date");
            }
            case["expected_keys"] = Value::Array(sorted);
        }
    }
    if check {
        return if changed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE };
    }
    let mut out = serde_json::to_string_pretty(&corpus).unwrap();
    out.push('\n');
    std::fs::write(&path, out).expect("write corpus");
    eprintln!("{changed} case(s) updated in {path}");
    ExitCode::SUCCESS
}
