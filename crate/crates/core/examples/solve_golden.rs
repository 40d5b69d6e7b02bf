//! Solve a compound-Poisson equation and compare with its known closed form.
//!
//! With T ~ Beta(1, 2) and mean 1 the solution is Gamma(2, 1/2), i.e.
//! F(s) = (1 + s/2)^-2.

use powermix::solver::{solve, Family, ProblemSpec};
use powermix::{CatalogEntry, MixingLaw, Transform};

fn main() -> powermix::Result<()> {
    let problem = ProblemSpec::new(Family::CompoundPoisson, 1.0)
        .with_t(MixingLaw::BetaTail(2.0))
        .build()?;
    let report = solve(&problem)?;
    let reference = Transform::catalog(CatalogEntry::Gamma { a: 2.0, b: 0.5 })?;

    println!("converged after {} iterations", report.iterations);
    println!("sup error vs (1+s/2)^-2: {:.2e}", report.sup_error_against(&reference)?);
    println!(
        "variance: extracted {:.10}, formula {:.10}",
        report.variance_extracted.unwrap_or(f64::NAN),
        report.variance_formula
    );

    let f = report.solution();
    for s in [0.1, 1.0, 5.0, 20.0] {
        println!("F({s:>4}) = {:.12}  reference {:.12}", f.eval(s)?, reference.eval(s)?);
    }
    Ok(())
}
