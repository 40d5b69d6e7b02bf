use powermix::config::{apply_overrides, RunConfig};
use powermix::grid::GridTransform;
use powermix::mixing::{sigma, MixingLaw};
use powermix::solver::{iterate_once, solve, Family, ProblemSpec};
use powermix::transforms::{log_grid, two_point_bound};
use powermix::zeta::{zeta, zeta_transform};
use powermix::{CatalogEntry, Transform};
use proptest::prelude::*;

fn catalog_entry() -> impl Strategy<Value = CatalogEntry> {
    prop_oneof![
        (0.1..5.0f64).prop_map(|mu| CatalogEntry::Exponential { mu }),
        (0.2..5.0f64, 0.1..3.0f64).prop_map(|(a, b)| CatalogEntry::Gamma { a, b }),
        (0.0..0.95f64, 0.2..3.0f64).prop_map(|(p, beta)| CatalogEntry::ExpMixtureWithAtom { p, beta, mu: None }),
        (0.2..4.0f64).prop_map(|t| CatalogEntry::SinhFamily { t }),
        (0.2..4.0f64).prop_map(|t| CatalogEntry::CoshFamily { t }),
        (0.2..4.0f64).prop_map(|t| CatalogEntry::TanhFamily { t }),
        (1.2..6.0f64).prop_map(|a| CatalogEntry::ZetaDist { a }),
        (0.1..3.0f64).prop_map(|mu| CatalogEntry::ScaledSinhSolution { mu }),
    ]
}

fn mixing_law() -> impl Strategy<Value = MixingLaw> {
    prop_oneof![
        (0.0..0.95f64).prop_map(MixingLaw::point),
        (0.0..0.5f64, 0.1..1.0f64).prop_map(|(lo, w)| MixingLaw::Uniform(lo, lo + w)),
        (1.5..6.0f64).prop_map(MixingLaw::BetaTail),
        Just(MixingLaw::Example2d),
        Just(MixingLaw::USquared),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn catalog_transforms_are_decreasing_in_unit_interval(entry in catalog_entry(), s in 0.0..40.0f64, ds in 1e-3..5.0f64) {
        let f = Transform::catalog(entry).unwrap();
        let (a, b) = (f.eval(s).unwrap(), f.eval(s + ds).unwrap());
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b <= a + 1e-15);
        prop_assert_eq!(f.eval(0.0).unwrap(), 1.0);
        let c = f.complement(s).unwrap();
        prop_assert!((c - (1.0 - a)).abs() <= 1e-14);
    }

    #[test]
    fn two_point_start_dominates_same_moment_laws(mu in 0.2..3.0f64, shape in 0.5..6.0f64, s in 0.0..30.0f64) {
        // the two-point law has the largest transform for given (m1, m2)
        let gamma = Transform::catalog(CatalogEntry::Gamma { a: shape, b: mu / shape }).unwrap();
        let m2 = mu * mu * (1.0 + 1.0 / shape);
        let bound = two_point_bound(mu, m2).unwrap();
        prop_assert!(gamma.eval(s).unwrap() <= bound.eval(s).unwrap() + 1e-14);
    }

    #[test]
    fn sigma_is_zero_at_origin_and_nondecreasing(t in mixing_law(), mu in 0.3..3.0f64, s in 0.0..20.0f64, ds in 1e-3..5.0f64) {
        let f = Transform::catalog(CatalogEntry::Exponential { mu }).unwrap();
        let d = t.build().unwrap();
        prop_assert_eq!(sigma(&f, &d, 0.0).unwrap(), 0.0);
        let (a, b) = (sigma(&f, &d, s).unwrap(), sigma(&f, &d, s + ds).unwrap());
        prop_assert!(b >= a - 1e-12);
        // σ(s) <= mu s since the integrand is at most mu
        prop_assert!(a <= mu * s * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn zeta_is_decreasing_and_transform_normalized(a in 1.05..20.0f64, d in 1e-3..5.0f64) {
        prop_assert!(zeta(a + d).unwrap() < zeta(a).unwrap());
        prop_assert!(zeta(a).unwrap() > 1.0);
        prop_assert_eq!(zeta_transform(a, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn overrides_reach_the_parsed_config(nodes in 64usize..2048, mu in 0.1..10.0f64, tol in 1e-12..1e-6f64) {
        let mut doc = serde_json::json!({});
        let sets = vec![
            "command=solve".to_string(),
            "family=compound_poisson".to_string(),
            r#"T={"uniform":[0,1]}"#.to_string(),
            format!("mu={mu}"),
            format!("grid.nodes={nodes}"),
            format!("solver.tol={tol}"),
        ];
        apply_overrides(&mut doc, &sets).unwrap();
        let cfg = RunConfig::from_value(doc).unwrap();
        let p = cfg.problem.as_ref().unwrap();
        prop_assert_eq!(p.grid.nodes, Some(nodes));
        prop_assert_eq!(p.mu, mu);
        prop_assert_eq!(p.solver.tol, tol);
        prop_assert_eq!(RunConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn one_iteration_never_ascends_and_keeps_the_mean(t in mixing_law(), mu in 0.3..3.0f64) {
        let mut spec = ProblemSpec::new(Family::CompoundPoisson, mu).with_t(t);
        spec.grid.nodes = Some(192);
        let problem = spec.build().unwrap();
        let start = problem.grid.build().unwrap();
        let (m1, m2) = problem.init_moments().unwrap();
        let bound = two_point_bound(m1, m2).unwrap();
        let g0 = GridTransform::sample_complement(start, Some(mu), |s| bound.complement(s)).unwrap();
        let g1 = iterate_once(&problem, &g0).unwrap();
        let (ascent, _) = g1.max_ascent_over(&g0);
        prop_assert!(ascent <= 1e-9, "ascent {ascent}");
        prop_assert!(g1.is_nonincreasing(1e-12));
        // slope at the origin is the mean
        let s = g1.nodes()[1];
        prop_assert!(((g1.complement(s).unwrap() / s) / mu - 1.0).abs() < 1e-4);
    }

    #[test]
    fn solutions_sit_below_their_start(p in 0.0..0.9f64, mu in 0.3..3.0f64) {
        let spec = ProblemSpec::new(Family::CompoundExponential, mu).with_t(MixingLaw::point(p));
        let r = solve(&spec.build().unwrap()).unwrap();
        prop_assert!(r.converged);
        prop_assert!(r.bound_violation <= 4.0 * f64::EPSILON);
        let exact = Transform::catalog(CatalogEntry::exp_mixture_with_atom(p, mu).unwrap()).unwrap();
        prop_assert!(r.sup_error_against(&exact).unwrap() < 1e-6);
    }
}

#[test]
fn log_grid_endpoints() {
    let g = log_grid(0.1, 10.0, 5);
    assert!((g[0] - 0.1).abs() < 1e-15 && (g[4] - 10.0).abs() < 1e-12);
    assert!((g[2] - 1.0).abs() < 1e-14);
}
