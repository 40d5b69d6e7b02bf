//! Moment conditions each family imposes on its mixing laws.

use powermix::solver::{Family, ProblemSpec};
use powermix::MixingLaw;

fn main() -> powermix::Result<()> {
    let specs = [
        ProblemSpec::new(Family::PowerMixtureExp, 1.0)
            .with_t(MixingLaw::Uniform(0.0, 1.0))
            .with_a(MixingLaw::Exp(1.0)),
        ProblemSpec::new(Family::PowerMixtureExp, 1.0)
            .with_t(MixingLaw::point(0.0))
            .with_a(MixingLaw::point(2.0)),
        ProblemSpec::new(Family::ParetoMixA { lambda: 2.0 }, 1.0)
            .with_t(MixingLaw::point(0.2))
            .with_a(MixingLaw::point(0.5)),
        ProblemSpec::new(Family::CompoundPoisson, 1.0).with_t(MixingLaw::point(1.0)),
    ];
    for spec in specs {
        let record = spec.build()?.check_conditions()?;
        let detail: Vec<String> = record
            .checks
            .iter()
            .map(|c| format!("{} {}", c.name, if c.passed { "ok" } else { "FAILS" }))
            .collect();
        println!("{:<12} {}", record.family, detail.join(", "));
    }
    Ok(())
}
