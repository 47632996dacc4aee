use std::fs;
use std::process::{Command, Output};

fn mechfluid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mechfluid"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn check_bundled_scenario_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let res = mechfluid(&["check", "--scenario", "steady-rotation", "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let json = fs::read_to_string(&out).unwrap();
    assert!(json.contains("\"schema_version\": 1"));
    assert!(json.contains("\"passed\": true"));
    assert!(String::from_utf8_lossy(&res.stderr).contains("all checks passed"));
}

#[test]
fn check_file_as_csv_and_seed_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("s.toml");
    fs::write(
        &scenario,
        r#"
name = "file"
[metric]
builtin = "polar"
dim = 2
[[check]]
name = "compat"
kind = "metric-compatibility"
tolerance = 1e-12
"#,
    )
    .unwrap();
    let run = |seed: &str| {
        let res = mechfluid(&[
            "check",
            "--scenario",
            scenario.to_str().unwrap(),
            "--format",
            "csv",
            "--seed",
            seed,
        ]);
        assert!(res.status.success());
        String::from_utf8(res.stdout).unwrap()
    };
    let a = run("4");
    assert!(a.starts_with("type,name,item,samples,value,mean,tolerance,passed,error\ncheck,compat,"));
    assert_eq!(a, run("4"));
}

#[test]
fn failing_check_exits_one() {
    let res = mechfluid(&["check", "--scenario", "steady-rotation", "--tol", "0"]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn invalid_input_exits_two() {
    let res = mechfluid(&["check", "--scenario", "/nonexistent/scenario.toml"]);
    assert_eq!(res.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "name = \"x\"\n[metric]\nbuiltin = \"euclidean\"\n[field]\ncomponents = [\"x1 +\", \"1\"]\n").unwrap();
    let res = mechfluid(&["check", "--scenario", bad.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("field.components[0]"));
}

#[test]
fn integrate_writes_trajectory_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traj.csv");
    let res = mechfluid(&[
        "integrate",
        "--scenario",
        "flrw-decay",
        "--trajectory",
        "comoving",
        "--dt",
        "0.01",
        "--t-end",
        "0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "s,x0,x1,xdot0,xdot1,T,tdot");
    assert_eq!(lines.len(), 1 + 51);
    let last: Vec<f64> = lines[51].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(last[0], 0.5);
    // t = 1 + s and x' = 1/t^2, so x(s) = 1 - 1/(1 + s)
    assert!((last[1] - 1.5).abs() < 1e-12);
    assert!((last[2] - (1.0 - 1.0 / 1.5)).abs() < 1e-8);
    assert_eq!(last[6], 1.0);
}

#[test]
fn integrate_unknown_trajectory_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let res = mechfluid(&[
        "integrate", "--scenario", "lorentz", "--trajectory", "nope", "--dt", "0.1", "--t-end", "1", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn identities_pass_on_sphere() {
    let res = mechfluid(&["identities", "--metric", "sphere", "--dim", "2", "--trials", "50"]);
    assert!(res.status.success());
    let stdout = String::from_utf8(res.stdout).unwrap();
    for suite in ["vorticity", "metric-compatibility", "bernoulli-from-euler-static", "bernoulli-from-euler-flrw"] {
        assert!(stdout.contains(suite), "{stdout}");
    }
    assert!(!stdout.contains("FAIL"));
}

#[test]
fn lists_bundled_scenarios() {
    let res = mechfluid(&["scenarios"]);
    assert!(res.status.success());
    let stdout = String::from_utf8(res.stdout).unwrap();
    assert!(stdout.contains("steady-rotation") && stdout.contains("relativistic-boost"));
}
