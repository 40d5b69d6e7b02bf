//! Monte Carlo check of a distributional equation: both sides are sampled,
//! their empirical transforms compared, and the gap judged against a
//! bootstrap threshold.

use powermix::law::Law;
use powermix::simulate::{verify_equation, Equation, EquationSpec};

fn main() -> powermix::Result<()> {
    let n = 200_000;
    let cases = [
        ("exponential, T = 0", Equation::Example1, Law::Exponential { mu: 1.0 }, Law::Degenerate { c: 0.0 }),
        ("atom + exponential, T ~ U[1/2, 1]", Equation::Example2, Law::exp_mixture(0.5, 1.0), Law::Uniform { lo: 0.5, hi: 1.0 }),
        ("gamma(2, 1/2), T ~ Beta(1, 2)", Equation::Example2, Law::Gamma { shape: 2.0, scale: 0.5 }, Law::beta_tail(2.0)),
        ("exponential, T ~ Beta(1, 2) (wrong)", Equation::Example2, Law::Exponential { mu: 1.0 }, Law::beta_tail(2.0)),
    ];
    for (name, eq, solution, t) in cases {
        let r = verify_equation(&EquationSpec::new(eq, solution, t, n, 7))?;
        println!(
            "{:<38} {:<24} gap {:.2e}  threshold {:.2e}  {}",
            name,
            eq.describe(),
            r.gap,
            r.threshold,
            if r.passed { "pass" } else { "FAIL" }
        );
    }
    Ok(())
}
