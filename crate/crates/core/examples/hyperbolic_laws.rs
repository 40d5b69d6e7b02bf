//! The hyperbolic transforms: C_t splits as S_t plus an independent T_t, and
//! each family passes a finite-difference complete-monotonicity check.

use powermix::transforms::{check_complete_monotonicity, log_grid, product};
use powermix::{CatalogEntry, Transform};

fn main() -> powermix::Result<()> {
    for t in [1.0, 2.0, 5.0] {
        let c = Transform::catalog(CatalogEntry::CoshFamily { t })?;
        let st = product(
            Transform::catalog(CatalogEntry::SinhFamily { t })?,
            Transform::catalog(CatalogEntry::TanhFamily { t })?,
        );
        let mut worst = 0.0f64;
        for i in 0..=400 {
            let s = i as f64 * 0.05;
            worst = worst.max((c.eval(s)? - st.eval(s)?).abs());
        }
        println!("t = {t}: sup |C_t - S_t T_t| = {worst:.1e}");
    }

    let grid = log_grid(0.01, 10.0, 40);
    for (name, entry) in [
        ("sinh_t", CatalogEntry::SinhFamily { t: 2.0 }),
        ("cosh_t", CatalogEntry::CoshFamily { t: 2.0 }),
        ("tanh_t", CatalogEntry::TanhFamily { t: 2.0 }),
    ] {
        let f = Transform::catalog(entry)?;
        let r = check_complete_monotonicity(|s| f.eval(s), &grid, 4)?;
        println!("{name}: completely monotone to order 4: {}", r.passed());
    }
    // not a transform: fails at some order
    let r = check_complete_monotonicity(|s| Ok((1.0 - s).max(0.0)), &log_grid(0.1, 2.0, 40), 4)?;
    println!("max(0, 1-s): first violated order {:?}", r.first_violated_order());
    Ok(())
}
