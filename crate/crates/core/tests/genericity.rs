//! Cross-cutting tests: the library works at `f32` precision end to
//! end, and a few structural invariants hold over random inputs.

use nalgebra::DVector;
use proptest::prelude::*;

use saddlescar::critical::{find_critical_point, SaddleFrame};
use saddlescar::dynamics::{
    analytic_saddle_coefficients, coefficients_from_monodromy, integrate_monodromy,
    IntegratorOrder, SaddleOrbitSpec,
};
use saddlescar::potential::PotentialField;
use saddlescar::quantum::solve_periodic_1d;
use saddlescar::scar::{transverse_first_node, transverse_scar_factor, ScarDensityModel};

#[test]
fn monodromy_pipeline_runs_at_single_precision() {
    let p = PotentialField::<f32>::quadratic_saddle(&[1.0, -0.25]);
    let cp = find_critical_point(&p, &DVector::zeros(2), 1e-6).unwrap();
    let frame = SaddleFrame::from_critical_point(&p, &cp, &[1.0, 1.0], 1.0).unwrap();
    let stable = frame.stable_axes()[0];
    let unstable = frame.unstable_axes()[0];
    let analytic = analytic_saddle_coefficients(&frame, stable, unstable).unwrap();
    let spec = SaddleOrbitSpec::new(frame, stable, 0.5).unwrap();
    let m = integrate_monodromy(&p, &spec, spec.period * 1e-3, IntegratorOrder::Fourth).unwrap();
    let numeric = coefficients_from_monodromy(&m).unwrap();
    // single precision leaves roughly five significant digits here
    assert!((numeric.w_scalar() - analytic.w_scalar()).abs() < 1e-3 * analytic.w_scalar());
    assert!((numeric.theta - analytic.theta).abs() < 1e-3 * analytic.theta);
}

#[test]
fn periodic_solver_runs_at_single_precision() {
    let single = solve_periodic_1d::<f32>(0.5, 1.0, &[(1, 100.0)], 64, 10).unwrap();
    let double = solve_periodic_1d::<f64>(0.5, 1.0, &[(1, 100.0)], 64, 10).unwrap();
    assert_eq!(single.eigenvalues.len(), 10);
    for (s, d) in single.eigenvalues.iter().zip(&double.eigenvalues) {
        assert!(
            (*s as f64 - d).abs() < 1e-3 * (1.0 + d.abs()),
            "f32 level {s} drifts from the f64 value {d}"
        );
    }
    let (_, dens) = single.density_on_grid(0, 128).unwrap();
    assert!(dens.iter().all(|&d| d >= 0.0));
}

fn saddle_model(sigma2: f64, n: usize, w: f64) -> ScarDensityModel<f64> {
    let p = PotentialField::quadratic_saddle(&[1.0, -sigma2]);
    let cp = find_critical_point(&p, &DVector::zeros(2), 1e-12).unwrap();
    let frame = SaddleFrame::from_critical_point(&p, &cp, &[1.0, 1.0], 1.0).unwrap();
    let stable = frame.stable_axes()[0];
    ScarDensityModel::new(frame, stable, n, w).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // the transverse factor is even in x2, bounded by 1, and positive
    // strictly inside the first node
    #[test]
    fn transverse_factor_is_even_and_positive_inside_the_node(
        w in 0.1f64..10.0,
        x2 in -5.0f64..5.0,
    ) {
        let f = transverse_scar_factor(w, 1.0, x2);
        let g = transverse_scar_factor(w, 1.0, -x2);
        prop_assert!((f - g).abs() < 1e-12);
        prop_assert!(f <= 1.0);
        let node = transverse_first_node(w, 1.0).unwrap();
        if x2.abs() < 0.999 * node {
            prop_assert!(f > 0.0);
        }
    }

    // the model density is even under reflection of either coordinate
    #[test]
    fn scar_density_has_saddle_parity(
        sigma2 in 0.05f64..1.0,
        n in 0usize..4,
        x1 in -3.0f64..3.0,
        // stay inside the modeled tube: the first node sits at sqrt(pi)
        x2 in -1.7f64..1.7,
    ) {
        let model = saddle_model(sigma2, n, 1.0);
        let d = model.density(x1, x2).unwrap();
        let d1 = model.density(-x1, x2).unwrap();
        let d2 = model.density(x1, -x2).unwrap();
        prop_assert!(d >= 0.0);
        prop_assert!((d - d1).abs() <= 1e-12 * (1.0 + d));
        prop_assert!((d - d2).abs() <= 1e-12 * (1.0 + d));
    }
}
