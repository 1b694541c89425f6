use assert_cmd::Command;
use predicates::prelude::*;
use std::io::Write;

fn scenario_file(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn ksline() -> Command {
    Command::cargo_bin("ksline").unwrap()
}

#[test]
fn integrate_constant_against_tent_is_zero() {
    // int 1 dG = G(1) and tent(1) = 0
    let f = scenario_file(
        r#"{"line":{"family":"real","lo":0,"hi":1},"integrand":"1","integrator":"tent"}"#,
    );
    let out = ksline()
        .args(["integrate", "--scenario"])
        .arg(f.path())
        .assert()
        .success()
        .get_output()
        .stdout
        .clone();
    let v: serde_json::Value = serde_json::from_slice(&out).unwrap();
    assert_eq!(v["schema"], "1");
    assert_eq!(v["verdict"], "converged");
    assert_eq!(v["value"].as_f64().unwrap(), 0.0);
}

#[test]
fn integrate_x_against_x_squared() {
    let f = scenario_file(
        r#"{"line":{"family":"real","lo":0,"hi":1},"integrand":"x",
            "integrator":{"expression":"x^2","derivative":"2*x"}}"#,
    );
    let out = ksline()
        .args(["integrate", "--tol", "1e-9", "--scenario"])
        .arg(f.path())
        .assert()
        .success()
        .get_output()
        .stdout
        .clone();
    let v: serde_json::Value = serde_json::from_slice(&out).unwrap();
    let value = v["value"].as_f64().unwrap();
    assert!((value - 2.0 / 3.0).abs() < 1e-8, "got {value}");
}

#[test]
fn csv_has_increasing_levels_and_is_deterministic() {
    let text =
        r#"{"line":{"family":"real","lo":0,"hi":1},"integrand":"x","integrator":"identity"}"#;
    let f = scenario_file(text);
    let dir = tempfile::tempdir().unwrap();
    let csv1 = dir.path().join("a.csv");
    let csv2 = dir.path().join("b.csv");
    for p in [&csv1, &csv2] {
        ksline()
            .args(["integrate", "--scenario"])
            .arg(f.path())
            .arg("--csv")
            .arg(p)
            .assert()
            .success();
    }
    let a = std::fs::read_to_string(&csv1).unwrap();
    let b = std::fs::read_to_string(&csv2).unwrap();
    assert_eq!(a, b, "CSV output must be reproducible");
    let levels: Vec<i64> = a
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(!levels.is_empty());
    assert!(levels.windows(2).all(|w| w[0] < w[1]), "levels strictly increase: {levels:?}");
}

#[test]
fn hake_diverging_exits_3() {
    let f = scenario_file(
        r#"{"line":{"family":"real","lo":0,"hi":1},
            "integrand":"recip_sq",
            "integrator":"variation_of sin_inv_sq_primitive",
            "engine":{"tol":1e-6,"singular_points":[0.0],"divergence_bound":5.0},
            "max_approach":20}"#,
    );
    let out = ksline()
        .args(["hake", "--direction", "backward", "--scenario"])
        .arg(f.path())
        .assert()
        .code(3)
        .get_output()
        .stdout
        .clone();
    let v: serde_json::Value = serde_json::from_slice(&out).unwrap();
    assert_eq!(v["verdict"], "diverging");
    let last = v["approach_points"].as_array().unwrap().last().unwrap().clone();
    assert!(last["partial"].as_f64().unwrap() > 5.0);
}

#[test]
fn usage_errors_exit_1() {
    // unsorted splits: semantic error
    let f = scenario_file(
        r#"{"line":{"family":"split","lo":0,"hi":1,"splits":[0.7,0.3]},"integrator":"identity"}"#,
    );
    ksline()
        .args(["integrate", "--scenario"])
        .arg(f.path())
        .assert()
        .code(1)
        .stderr(predicate::str::contains("sorted"));
    // recip_sq is unbounded: not usable as an integrator
    let f = scenario_file(
        r#"{"line":{"family":"real","lo":0,"hi":1},"integrand":"1","integrator":"recip_sq"}"#,
    );
    ksline().args(["integrate", "--scenario"]).arg(f.path()).assert().code(1);
    // missing scenario file
    ksline().args(["integrate", "--scenario", "/nonexistent.json"]).assert().code(1);
}

#[test]
fn measure_step_integrator_on_split_line() {
    let f = scenario_file(
        r#"{"line":{"family":"split","lo":0,"hi":1,"splits":[0.5]},
            "integrator":{"step":{"initial":0.25,"jumps":[
                {"at":{"x":0.5,"side":"minus"},"jump":1.0},
                {"at":{"x":0.5,"side":"plus"},"jump":-2.0}]}},
            "intervals":[{"left":0.25,"right":0.75}]}"#,
    );
    let out = ksline()
        .args(["measure", "--scenario"])
        .arg(f.path())
        .assert()
        .success()
        .get_output()
        .stdout
        .clone();
    let v: serde_json::Value = serde_json::from_slice(&out).unwrap();
    let row = &v["intervals"][0];
    // mu over (0.25, 0.75] = +1 - 2 = -1; variation measure = 3
    assert_eq!(row["mu"].as_f64().unwrap(), -1.0);
    assert_eq!(row["variation_measure"].as_f64().unwrap(), 3.0);
}

#[test]
fn approx_meets_epsilon() {
    let f = scenario_file(
        r#"{"line":{"family":"real","lo":0,"hi":1},"integrator":"tent","epsilon":0.01}"#,
    );
    let out = ksline()
        .args(["approx", "--scenario"])
        .arg(f.path())
        .assert()
        .success()
        .get_output()
        .stdout
        .clone();
    let v: serde_json::Value = serde_json::from_slice(&out).unwrap();
    assert_eq!(v["within_epsilon"], true);
}

#[test]
fn decompose_reports_small_reconstruction_error() {
    let f = scenario_file(
        r#"{"line":{"family":"real","lo":0,"hi":1},"integrator":"tent"}"#,
    );
    let out = ksline()
        .args(["decompose", "--scenario"])
        .arg(f.path())
        .assert()
        .success()
        .get_output()
        .stdout
        .clone();
    let v: serde_json::Value = serde_json::from_slice(&out).unwrap();
    assert!(v["max_reconstruction_error"].as_f64().unwrap() < 1e-10);
    assert!((v["total_variation"].as_f64().unwrap() - 1.0).abs() < 1e-8);
}

#[test]
fn selftest_passes() {
    let out = ksline().arg("selftest").assert().success().get_output().stdout.clone();
    let v: serde_json::Value = serde_json::from_slice(&out).unwrap();
    assert_eq!(v["ok"], true);
}

#[test]
fn lab_reports_full_convergence_for_identity() {
    let f = scenario_file(
        r#"{"line":{"family":"real","lo":0,"hi":1},"integrand":"x","integrator":"identity",
            "engine":{"tol":1e-7}}"#,
    );
    let out = ksline()
        .args(["lab", "--depth", "10", "--sample", "16", "--scenario"])
        .arg(f.path())
        .assert()
        .success()
        .get_output()
        .stdout
        .clone();
    let v: serde_json::Value = serde_json::from_slice(&out).unwrap();
    assert_eq!(v["fraction"].as_f64().unwrap(), 1.0);
}
