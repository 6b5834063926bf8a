use proptest::prelude::*;

use quietlaser_core::analytics::detected_noise_level;
use quietlaser_core::design::{
    design_for_operating_point, designs_from_steady_state, steady_state_roots, transition_frequency,
};
use quietlaser_core::Error;

proptest! {
    #[test]
    fn operating_point_designs_close(
        log_nu in 8.0f64..13.0,
        log_tau in -9.0f64..-3.0,
        mu in 0.1f64..100.0,
        a in 0.01f64..50.0,
    ) {
        let des = design_for_operating_point(10f64.powf(log_nu), 10f64.powf(log_tau), mu, a).unwrap();
        prop_assert!(des.closure_residual() <= 1e-9, "{}", des.closure_residual());
        let omega = transition_frequency(des.d).unwrap();
        prop_assert!((omega / des.omega() - 1.0).abs() <= 1e-12);
        let p = des.rate_params().unwrap();
        prop_assert!((detected_noise_level(&p) - des.detected_level()).abs() <= 1e-9 * des.detected_level());
    }

    #[test]
    fn steady_roots_solve_the_balance(j in 1e3f64..1e9, ratio in 2.83f64..1e3) {
        // rabi > 2 sqrt(2) J guarantees real roots
        let rabi = ratio * j;
        let roots = steady_state_roots(j, rabi).unwrap();
        prop_assert!(!roots.is_empty() && roots.len() <= 2);
        for r in &roots {
            let residual = (j * (1.0 + 2.0 * r.gamma * r.gamma / (rabi * rabi)) - r.gamma).abs();
            prop_assert!(residual <= 1e-12 * r.gamma, "{} at gamma {}", residual / r.gamma, r.gamma);
        }
        if roots.len() == 2 {
            prop_assert!(roots[0].gamma < roots[1].gamma);
            prop_assert!(roots[0].a < 1.0 && roots[1].a > 1.0);
        }
    }

    #[test]
    fn below_threshold_has_no_steady_state(j in 1e3f64..1e9, ratio in 0.01f64..2.8) {
        let err = steady_state_roots(j, ratio * j).unwrap_err();
        prop_assert!(matches!(err, Error::NoSteadyState { .. }), "{:?}", err);
    }

    #[test]
    fn steady_state_designs_close(log_j in 4.0f64..8.0, log_v in -13.0f64..-9.0) {
        let (j, v, tau_p) = (10f64.powf(log_j), 10f64.powf(log_v), 1e-6);
        match designs_from_steady_state(1.42e9, j, tau_p, v) {
            Ok(designs) => {
                for d in designs {
                    prop_assert!(d.closure_residual() <= 1e-9, "{}", d.closure_residual());
                }
            }
            Err(Error::NoSteadyState { .. }) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}
