//! Residual of a candidate transform under a family map, without iterating.

use powermix::solver::{residual, Family, ProblemSpec};
use powermix::{CatalogEntry, MixingLaw, Transform};

fn main() -> powermix::Result<()> {
    // (1/cosh sqrt(mu s))^2 solves F = exp(-σ*) when T = U^2
    let mu = 1.0;
    let problem = ProblemSpec::new(Family::SigmaStar, mu)
        .with_t(MixingLaw::USquared)
        .build()?;
    let candidate = Transform::scaled(Transform::catalog(CatalogEntry::CoshFamily { t: 2.0 })?, mu / 2.0)?;
    let r = residual(&problem, &candidate)?;
    println!("σ*, cosh^2 candidate: sup residual {:.2e} at s = {:.3}", r.sup, r.at);

    let problem = ProblemSpec::new(Family::CompoundPoisson, 1.0)
        .with_t(MixingLaw::BetaTail(2.0))
        .build()?;
    for (name, entry) in [
        ("gamma(2, 1/2)", CatalogEntry::Gamma { a: 2.0, b: 0.5 }),
        ("exponential ", CatalogEntry::Exponential { mu: 1.0 }),
    ] {
        let r = residual(&problem, &Transform::catalog(entry)?)?;
        println!("compound Poisson, {name}: sup residual {:.2e}", r.sup);
    }
    Ok(())
}
