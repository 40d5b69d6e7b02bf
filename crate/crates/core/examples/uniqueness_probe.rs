//! Solve from two different starts with the same mean and compare limits.

use powermix::solver::{two_start_uniqueness_probe, Family, ProblemSpec};
use powermix::{CatalogEntry, MixingLaw, Transform};

fn main() -> powermix::Result<()> {
    let mu = 1.0;
    let cases = [
        ("corollary1, A ~ Exp(1), T ~ U[0,1]", ProblemSpec::new(Family::Corollary1, mu)
            .with_t(MixingLaw::Uniform(0.0, 1.0))
            .with_a(MixingLaw::Exp(1.0))),
        ("corollary4, p = 0.4, A two-point", ProblemSpec::new(Family::Corollary4 { p: 0.4 }, mu)
            .with_a(MixingLaw::Atoms(vec![(0.5, 0.5), (1.5, 0.5)]))),
    ];
    for (name, spec) in cases {
        let problem = spec.build()?;
        let alternate = Transform::catalog(CatalogEntry::Gamma { a: 3.0, b: mu / 3.0 })?;
        let probe = two_start_uniqueness_probe(&problem, &alternate)?;
        println!(
            "{name}: distance {:.1e} ({} and {} iterations)",
            probe.distance, probe.canonical.iterations, probe.alternate.iterations
        );
    }
    Ok(())
}
