use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn powermix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_powermix"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(dir: &Path) -> Value {
    let text = std::fs::read_to_string(dir.join("report.json")).expect("report written");
    serde_json::from_str(&text).expect("report is JSON")
}

#[test]
fn solve_matches_exponential_and_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = powermix(&[
        "solve",
        "--set",
        "family=compound_exponential",
        "--set",
        r#"T={"atom":[0,1]}"#,
        "--set",
        "mu=1",
        "--set",
        r#"golden={"exponential":{"mu":1}}"#,
        "--out",
        out,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let r = report(dir.path());
    assert_eq!(r["tool"], "powermix");
    assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(r["config"]["problem"]["grid"]["nodes"], 512);
    assert_eq!(r["tolerances"]["solver_tol"], 1e-10);
    assert!(r["result"]["golden_sup_error"].as_f64().unwrap() < 1e-9);

    let csv = std::fs::read_to_string(dir.path().join("nodes.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("s,F,reference,abs_gap"));
    let row: Vec<&str> = lines.nth(5).unwrap().split(',').collect();
    assert_eq!(row.len(), 4);
    // 17 significant digits
    let mantissa = row[1].split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17, "{}", row[1]);
}

#[test]
fn violated_condition_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = powermix(&[
        "conditions",
        "--set",
        "family=theorem1",
        "--set",
        r#"A={"atom":[2,1]}"#,
        "--set",
        "mu=1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("E[A]=1 violated"), "{stdout}");
    let r = report(dir.path());
    assert_eq!(r["passed"], false);
    assert_eq!(r["result"]["defaulted_to_zero_atom"][0], "T");
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = powermix(&["solve", "--set", "family=theorem9", "--set", "mu=1", "--out", out]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("theorem9"));

    let o = powermix(&["--out", out]);
    assert_eq!(o.status.code(), Some(1));

    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{\n  \"command\": \"solve\",\n  \"problem\": {\n}").unwrap();
    let o = powermix(&["--config", cfg.to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.json:4"));
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"command": "residual",
            "problem": {"family": {"id": "compound_poisson"}, "mu": 1.0, "T": {"beta_tail": 2.0}},
            "candidate": {"exponential": {"mu": 1.0}}}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = powermix(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "wrong candidate must fail");

    let o = powermix(&[
        "--config",
        cfg.to_str().unwrap(),
        "--set",
        r#"candidate={"gamma":{"a":2,"b":0.5}}"#,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&out);
    assert!(r["result"]["sup"].as_f64().unwrap() < 1e-6);
    assert_eq!(r["tolerances"]["residual_tol"], 1e-6);
    let csv = std::fs::read_to_string(out.join("nodes.csv")).unwrap();
    assert!(csv.starts_with("s,F,mapped,abs_gap\n"));
}

#[test]
fn simulate_is_reproducible_by_seed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        let o = powermix(&[
            "simulate",
            "--seed",
            "11",
            "--set",
            r#"simulate={"equation":"example3","solution":{"exponential":{"mu":1}},"T":{"degenerate":{"c":0}},"n":20000}"#,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        report(&out)["result"].clone()
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn moments_and_catalog_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = powermix(&[
        "moments",
        "--set",
        r#"moments={"law":{"gamma":{"shape":2,"scale":0.5}},"order":2}"#,
        "--out",
        out,
    ]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(dir.path());
    let eq = &r["result"]["equilibrium"];
    for k in 0..2 {
        let predicted = eq[k]["predicted_mean"].as_f64().unwrap();
        assert!(predicted > 0.0);
    }
    assert!((r["result"]["extracted"]["mean"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-9);

    let o = powermix(&["catalog", "--out", out]);
    assert_eq!(o.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("scaled_sinh") && stdout.contains("theorem5"));
}
