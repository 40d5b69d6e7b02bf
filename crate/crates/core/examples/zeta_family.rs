//! Riemann zeta values and the zeta-mixture equation.

use powermix::solver::{solve, Family, ProblemSpec};
use powermix::zeta::{zeta, zeta_triple};
use powermix::MixingLaw;

fn main() -> powermix::Result<()> {
    for a in [2.0, 3.0, 1.5] {
        let z = zeta_triple(a)?;
        println!(
            "a = {a}: ζ = {:.15}  ζ' = {:.15}  ζ'' = {:.15}  (bound {:.1e})",
            z.zeta, z.dzeta, z.d2zeta, z.truncation_error_bound
        );
    }
    println!("π²/6 - ζ(2) = {:.2e}", std::f64::consts::PI.powi(2) / 6.0 - zeta(2.0)?);

    // Λ must have mean -ζ(a)/ζ'(a)
    let a = 2.0;
    let z = zeta_triple(a)?;
    let lambda = -z.zeta / z.dzeta;
    let mu = 1.5;
    let problem = ProblemSpec::new(Family::ZetaFamily { a }, mu)
        .with_t(MixingLaw::point(0.0))
        .with_lambda(MixingLaw::point(lambda))
        .build()?;
    let report = solve(&problem)?;
    let m1 = report.m1.as_ref().map(|m| m.value).unwrap_or(f64::NAN);
    println!(
        "zeta family, a = {a}, Λ = {lambda:.6}: {} iterations, recovered mean {m1:.9} (target {mu})",
        report.iterations
    );
    Ok(())
}
