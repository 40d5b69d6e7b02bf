//! Drive a run from a JSON config with overrides, as the command line does,
//! without writing any files.

use powermix::cli::run;
use powermix::config::{apply_overrides, RunConfig};

fn main() -> powermix::Result<()> {
    let mut doc = serde_json::json!({
        "command": "solve",
        "problem": { "family": { "id": "compound_exponential" }, "mu": 1.0, "T": { "atom": [0.0, 1.0] } },
        "golden": { "exponential": { "mu": 1.0 } }
    });
    apply_overrides(&mut doc, &["grid.nodes=256".to_string(), "solver.tol=1e-12".to_string()])?;
    let cfg = RunConfig::from_value(doc)?;
    let outcome = run(&cfg)?;
    println!("{}", outcome.summary);
    println!("passed: {}", outcome.passed);
    let csv = outcome.nodes_csv.unwrap_or_default();
    for line in csv.lines().take(4) {
        println!("{line}");
    }
    Ok(())
}
