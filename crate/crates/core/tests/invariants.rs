use proptest::prelude::*;
use qd_emission::dynamics::{propagate, zero_mode_count};
use qd_emission::operators::{identity, max_abs, sigma_z};
use qd_emission::pipeline::{full_model, DetuningSpec};
use qd_emission::{Complex64, PhysicalParams};

fn params() -> impl Strategy<Value = (PhysicalParams, f64)> {
    (0.05f64..3.0, 0.0f64..0.06, 1.0f64..20.0, 100.0f64..1000.0, -1.0f64..1.0).prop_map(
        |(omega, alpha, t, t1, x)| {
            let p = PhysicalParams::new(0.0, omega, alpha, 2.2, t, 1.0 / t1).unwrap();
            (p, x * omega)
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn model_point_is_physical((p, eps) in params()) {
        let m = full_model(&p, DetuningSpec::Renormalized(eps)).unwrap();
        let s = &m.solution;
        prop_assert!(s.f_values.iter().all(|f| (0.0..=1.0).contains(f)));
        prop_assert!(s.omega_r > 0.0 && s.omega_r <= p.omega * (1.0 + 1e-12));
        prop_assert!((s.epsilon - eps).abs() < 1e-9);

        let l = &m.liouvillian;
        prop_assert!(l.trace_defect() < 1e-12);
        let rho = *m.steady_state.matrix();
        prop_assert!(max_abs(&l.apply(&rho)) < 1e-10);
        let ev = m.steady_state.eigenvalues();
        prop_assert!(ev[0] > -1e-10);

        let modes = m.modes().unwrap();
        prop_assert_eq!(zero_mode_count(&modes.eigenvalues).0, 1);
        prop_assert!(modes.eigenvalues.iter().all(|v| v.re < 1e-10));

        let pop = m.steady_state.excited_population();
        prop_assert!((modes.g1(0.0) - Complex64::new(pop, 0.0)).norm() < 1e-10);
        prop_assert!(m.g1_coh() <= pop + 1e-12);
        let frac = m.coherent_fraction();
        prop_assert!(frac > 0.0 && frac <= 1.0 + 1e-12);
    }

    #[test]
    fn propagation_relaxes_to_steady_state((p, eps) in params()) {
        let m = full_model(&p, DetuningSpec::Renormalized(eps)).unwrap();
        let ground = (identity() - sigma_z()) * Complex64::new(0.5, 0.0);
        let t = 40.0 / p.gamma1;
        let late = propagate(&m.liouvillian, &ground, t);
        prop_assert!((late.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        prop_assert!(max_abs(&(late - m.steady_state.matrix())) < 1e-8);
    }
}
