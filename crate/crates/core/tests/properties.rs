use std::sync::Arc;

use cfcert_core::catalog;
use cfcert_core::certify::{self, Estimate, Verdict};
use cfcert_core::document;
use cfcert_core::fractions::{self, exact_vector};
use cfcert_core::hvm;
use cfcert_core::lp::Scalar;
use cfcert_core::{EmpiricalModel, MeasurementScenario, Normalization};
use proptest::prelude::*;

const GAP: f64 = 1e-8;

fn scenarios() -> Vec<Arc<MeasurementScenario>> {
    vec![
        catalog::chsh_scenario(),
        catalog::ncycle_scenario(3).unwrap(),
        catalog::ncycle_scenario(5).unwrap(),
        ternary_bell(),
    ]
}

/// Bell scenario with a three-outcome measurement on one side.
fn ternary_bell() -> Arc<MeasurementScenario> {
    let outcomes = vec![
        ("x", vec!["0", "1", "2"]),
        ("x'", vec!["0", "1"]),
        ("y", vec!["0", "1"]),
        ("y'", vec!["0", "1"]),
    ];
    Arc::new(
        MeasurementScenario::new(
            &["x", "x'", "y", "y'"],
            &[vec!["x", "y"], vec!["x", "y'"], vec!["x'", "y"], vec!["x'", "y'"]],
            &outcomes,
        )
        .unwrap(),
    )
}

fn model(scenario_index: usize, seed: u64, kind: u8) -> EmpiricalModel {
    let s = &scenarios()[scenario_index];
    let random = catalog::random_model(s, seed);
    match kind % 3 {
        0 => random,
        // Partly non-signalling, partly contextual.
        1 => {
            let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
            let nc = catalog::random_noncontextual(s, 5, &mut rng);
            EmpiricalModel::mix(&nc, &random, 0.7).unwrap()
        }
        _ => {
            let n = s.context_count();
            if s.measurements().len() == n && n >= 3 && s.outcome_count(0) == 2 {
                let boxed = catalog::ncycle_box(n).unwrap();
                let boxed = EmpiricalModel::new(s.clone(), boxed.tables().to_vec()).unwrap();
                EmpiricalModel::mix(&boxed, &random, 0.6).unwrap()
            } else {
                random
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fractions_are_ordered(idx in 0usize..4, seed in any::<u64>(), kind in any::<u8>()) {
        let e = model(idx, seed, kind);
        let ncf = fractions::noncontextual_fraction(&e).unwrap().value;
        let nsf = fractions::nonsignalling_fraction(&e).unwrap().value;
        prop_assert!((0.0..=1.0).contains(&ncf));
        prop_assert!((0.0..=1.0).contains(&nsf));
        prop_assert!(ncf <= nsf + GAP);
    }

    #[test]
    fn mim_is_below_sf(idx in 0usize..4, seed in any::<u64>(), kind in any::<u8>()) {
        let e = model(idx, seed, kind);
        let sf = fractions::signalling_fraction(&e).unwrap();
        prop_assert!(e.mim() <= sf + GAP);
        prop_assert!(hvm::sigma_star(&e).unwrap() >= e.mim() - GAP);
    }

    #[test]
    fn cf_is_convex(idx in 0usize..4, s1 in any::<u64>(), s2 in any::<u64>(), lambda in 0.0f64..=1.0) {
        let a = model(idx, s1, 2);
        let b = model(idx, s2, 0);
        let mixed = EmpiricalModel::mix(&a, &b, lambda).unwrap();
        let lhs = fractions::contextual_fraction(&mixed).unwrap();
        let rhs = lambda * fractions::contextual_fraction(&a).unwrap()
            + (1.0 - lambda) * fractions::contextual_fraction(&b).unwrap();
        prop_assert!(lhs <= rhs + GAP);
    }

    #[test]
    fn cf_is_continuous(idx in 0usize..4, seed in any::<u64>(), eps in 0.0f64..0.2) {
        let e = model(idx, seed, 1);
        let p = e.perturb(eps, seed ^ 0x5eed).unwrap();
        let v = e.total_variation(&p).unwrap();
        prop_assert!(v <= eps + 1e-12);
        let contexts = e.scenario().context_count() as f64;
        let diff = (fractions::contextual_fraction(&e).unwrap()
            - fractions::contextual_fraction(&p).unwrap()).abs();
        prop_assert!(diff <= contexts * v + GAP);
    }

    #[test]
    fn strong_duality(idx in 0usize..4, seed in any::<u64>(), kind in any::<u8>()) {
        let e = model(idx, seed, kind);
        let primal = fractions::noncontextual_fraction(&e).unwrap().value;
        let (dual, _) = fractions::dual_noncontextual_fraction(&e).unwrap();
        prop_assert!((primal - dual).abs() <= GAP);
    }

    #[test]
    fn decompositions_reconstruct(idx in 0usize..4, seed in any::<u64>(), kind in any::<u8>()) {
        let e = model(idx, seed, kind);
        for d in [fractions::nc_decomposition(&e).unwrap(), fractions::ns_decomposition(&e).unwrap()] {
            let back = match (&d.part_a, &d.part_b) {
                (Some(a), Some(b)) => EmpiricalModel::mix(a, b, d.weight).unwrap(),
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(),
            };
            let worst = back.tables().iter().flatten().zip(e.tables().iter().flatten())
                .map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            prop_assert!(worst <= 1e-8, "reconstruction error {worst}");
        }
    }

    #[test]
    fn eta_star_matches_enumeration(idx in 0usize..4, seed in any::<u64>(), kind in any::<u8>()) {
        let e = model(idx, seed, kind);
        let oracle = hvm::eta_star_by_enumeration(&e, 1 << 20).unwrap();
        prop_assert!((hvm::eta_star(&e) - oracle).abs() <= 1e-15);
    }

    #[test]
    fn exact_and_float_backends_agree(seed in any::<u64>()) {
        let e = catalog::random_model(&catalog::chsh_scenario(), seed);
        let float = fractions::noncontextual_fraction(&e).unwrap().value;
        let exact = fractions::noncontextual_fraction_exact(e.scenario(), &exact_vector(&e)).unwrap();
        prop_assert!((float - exact.value.to_f64()).abs() <= 1e-9);
    }

    #[test]
    fn certification_is_monotone_in_eta(cf in 0.0f64..=1.0, eta1 in 0.0f64..0.5, delta in 0.0f64..0.5, sigma in 0.0f64..1.0) {
        let eta2 = (eta1 + delta).min(1.0);
        let r1 = certify::certify_value(cf, Estimate::new(eta1, "t"), Estimate::new(sigma, "t")).unwrap();
        let r2 = certify::certify_value(cf, Estimate::new(eta2, "t"), Estimate::new(sigma, "t")).unwrap();
        if r2.condition_holds && r2.verdict == Verdict::GenuineContextuality {
            prop_assert_eq!(r1.verdict, Verdict::GenuineContextuality);
        }
    }

    #[test]
    fn corrected_bound_round_trips(beta_cl in -10.0f64..10.0, width in 0.01f64..10.0, eta in 0.0f64..=1.0) {
        let beta_max = beta_cl + width;
        let bound = certify::corrected_inequality_bound(beta_cl, beta_max, eta).unwrap();
        let cf = certify::cf_from_inequality(bound, beta_cl, beta_max).unwrap();
        prop_assert!((cf - eta).abs() <= 1e-9);
    }

    #[test]
    fn documents_round_trip(idx in 0usize..4, seed in any::<u64>()) {
        let e = catalog::random_model(&scenarios()[idx], seed);
        let text = document::write_model(&e);
        let parsed = document::parse_model(&text, Normalization::Strict).unwrap().model;
        prop_assert_eq!(document::write_model(&parsed), text);
        prop_assert!(parsed.total_variation(&e).unwrap() < 1e-11);
    }
}
