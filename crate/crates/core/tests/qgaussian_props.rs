use coopinf::qgaussian::{build_regression_matrix, QGaussian, RegressionScenario};
use coopinf::sinkhorn::{cooperative_index, CiMode};
use proptest::prelude::*;

fn q_value() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), Just(1.0), Just(1.5), -1.0f64..1.6]
}

proptest! {
    #[test]
    fn density_is_symmetric_about_its_centre(q in q_value(), mu in -64i32..64, z in -512i32..512) {
        // Dyadic inputs keep z and 2μ − z exact.
        let (mu, z) = (mu as f64 / 16.0, z as f64 / 64.0);
        let n = QGaussian::new(q, mu).unwrap();
        prop_assert_eq!(n.density(z), n.density(2.0 * mu - z));
    }

    #[test]
    fn density_is_nonnegative_and_peaks_at_centre(q in q_value(), z in -20.0f64..20.0) {
        let n = QGaussian::standard(q).unwrap();
        prop_assert!(n.density(z) >= 0.0);
        prop_assert!(n.density(z) <= n.density(0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn linear_and_quadratic_fit_first_dataset_equally(
        q in q_value(), a in 0.05f64..3.0, delta in 0.05f64..3.0
    ) {
        let s = RegressionScenario::with_fit_step(a, delta, q, 1e-2).unwrap();
        let r = build_regression_matrix(&s).unwrap();
        prop_assert_eq!(r.matrix.get(0, 0), r.matrix.get(0, 1));
    }

    #[test]
    fn compact_noise_rejects_wide_data(a in 0.05f64..2.2, extra in 0.01f64..2.0) {
        // The horizontal fit needs every response within √5 of one offset,
        // i.e. a spread Δ + 2a below 2√5.
        let delta = 2.0 * 5f64.sqrt() - 2.0 * a + extra;
        let s = RegressionScenario::with_fit_step(a, delta, 0.0, 1e-2).unwrap();
        let r = build_regression_matrix(&s).unwrap();
        prop_assert_eq!(r.matrix.get(1, 0), 0.0);
        prop_assert!(r.matrix.get(1, 1) > 0.0);
        prop_assert_eq!(cooperative_index(&r.matrix, CiMode::Structural, 1000, 1e-10).unwrap(), 1.0);
    }

    #[test]
    fn compact_noise_accepts_narrow_data(a in 0.05f64..2.0, frac in 0.05f64..0.9) {
        let delta = (2.0 * 5f64.sqrt() - 2.0 * a) * frac;
        let s = RegressionScenario::with_fit_step(a, delta, 0.0, 1e-3).unwrap();
        let r = build_regression_matrix(&s).unwrap();
        prop_assert!(r.matrix.get(1, 0) > 0.0);
    }
}
