//! Replays the checked-in fuzz seeds through the fuzz target invariants.

use std::fs;
use std::path::PathBuf;

use mechfluid::expr::{parse_expr, Bindings, Var};
use mechfluid::scenario::Scenario;

fn seeds(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|entry| {
            let path = entry.unwrap().path();
            let text = fs::read_to_string(&path).unwrap();
            (path, text)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

#[test]
fn expression_seeds_round_trip() {
    let x = [0.3, -0.7, 1.1, 0.5];
    let b = Bindings::new(Some(0.25), &x);
    for (path, src) in seeds("parse_expr") {
        let e = parse_expr(&src).unwrap_or_else(|err| panic!("{}: {err}", path.display()));
        assert_eq!(parse_expr(&e.to_string()).unwrap(), e, "{}", path.display());
        e.eval(&b).unwrap();
        for v in [Var::T, Var::X(1), Var::X(2)] {
            e.differentiate(v).eval(&b).unwrap();
        }
    }
}

#[test]
fn scenario_seeds_round_trip() {
    for (path, src) in seeds("scenario_toml") {
        let s = Scenario::from_toml(&src).unwrap_or_else(|err| panic!("{}: {err}", path.display()));
        assert_eq!(Scenario::from_toml(&s.to_toml()).unwrap(), s, "{}", path.display());
    }
}
