//! Moments recovered from a transform, and the length-biased and
//! equilibrium laws built from a base law.

use powermix::law::Law;
use powermix::moments::{
    equilibrium, equilibrium_iterate, equilibrium_mean_prediction, length_biased, mean_from_transform,
    second_moment_from_transform,
};

fn main() -> powermix::Result<()> {
    let base = Law::Gamma { shape: 2.0, scale: 0.5 };
    let mu = base.mean().expect("finite mean");
    let t = base.transform().expect("closed form");
    let m1 = mean_from_transform(&t)?;
    let m2 = second_moment_from_transform(&t, mu)?;
    println!("gamma(2, 1/2): mean {:.12} (±{:.1e}), second moment {:.10} (exact {})", m1.value, m1.error_estimate, m2.value, base.moment(2).unwrap());

    let lb = length_biased(&base, mu)?;
    let eq = equilibrium(&base, mu)?;
    println!("length-biased: {lb:?}, mean {:?}", lb.mean());
    println!("equilibrium:   {eq:?}, mean {:?}", eq.mean());

    for k in 1..=3 {
        let law = equilibrium_iterate(&base, k)?;
        println!(
            "order {k}: mean {:?}, predicted {:?}",
            law.mean(),
            equilibrium_mean_prediction(&base, k as u32 + 1)
        );
    }
    Ok(())
}
