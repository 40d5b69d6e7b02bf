//! Degenerate mixing T = p gives an exponential law with an atom at zero.
//! Also checks the envelope 1 - c + c/(1 + λs) for T uniform.

use powermix::solver::{mixture_envelope, solve, Family, ProblemSpec};
use powermix::{CatalogEntry, MixingLaw, Transform};

fn main() -> powermix::Result<()> {
    let mu = 1.0;
    for p in [0.0, 0.3, 0.7] {
        let problem = ProblemSpec::new(Family::CompoundExponential, mu)
            .with_t(MixingLaw::point(p))
            .build()?;
        let report = solve(&problem)?;
        let exact = Transform::catalog(CatalogEntry::exp_mixture_with_atom(p, mu)?)?;
        println!(
            "p = {p}: {} iterations, sup error {:.2e}",
            report.iterations,
            report.sup_error_against(&exact)?
        );
    }

    // T ~ U[0, 1], p = 1/2: F_T(p) = 1/2
    let p = 0.5;
    let problem = ProblemSpec::new(Family::CompoundExponential, mu)
        .with_t(MixingLaw::Uniform(0.0, 1.0))
        .build()?;
    let report = solve(&problem)?;
    let envelope = mixture_envelope(mu, 0.5, p)?;
    let g = &report.transform;
    let mut worst = f64::NEG_INFINITY;
    for (&s, &v) in g.nodes().iter().zip(g.values()).take(report.core_len) {
        worst = worst.max(v - envelope.eval(s)?);
    }
    println!("T ~ U[0,1]: max(F - envelope) = {worst:.2e} (should be <= 0)");
    Ok(())
}
