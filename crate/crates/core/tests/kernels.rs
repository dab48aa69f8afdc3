use std::f64::consts::PI;

use nls_core::kernels::{char_exponent, check_domination, moments, nu_integral, JumpKernelSpec, LevyMeasureSpec, LevyVariant};
use proptest::prelude::*;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(1e-300)
}

#[test]
fn isotropic_moments_closed_form() {
    // σ is counting measure on {±1} in d = 1 and arc length in d = 2.
    for alpha in [0.3, 1.0, 1.7] {
        let m = moments(&LevyMeasureSpec::isotropic(1, alpha)).unwrap();
        assert!(close(m.gamma0, 2.0 / (2.0 - alpha), 1e-10), "{}", m.gamma0);
        assert!(close(m.c1, 2.0 / (4.0 - alpha), 1e-10), "{}", m.c1);
        let m = moments(&LevyMeasureSpec::isotropic(2, alpha)).unwrap();
        assert!(close(m.gamma0, 2.0 * PI / (2.0 - alpha), 1e-9), "{}", m.gamma0);
        let diag = PI / (2.0 - alpha);
        assert!(close(m.q[0], diag, 1e-9) && close(m.q[3], diag, 1e-9));
        assert!(m.q[1].abs() < 1e-9 * diag && m.q[2] == m.q[1]);
        assert!(m.nondegenerate && close(m.q_min_eigenvalue, diag, 1e-8));
    }
}

#[test]
fn cone_and_axis_covariances() {
    // Double cone around e1 with half-angle a: Q11 = (a + sin(2a)/2)·2/(2−α) over both nappes.
    let a = 0.4;
    let alpha = 1.0;
    let spec = LevyMeasureSpec::new(2, LevyVariant::Cone { alpha, axis: vec![1.0, 0.0], half_angle: a });
    let m = moments(&spec).unwrap();
    let q11 = (a + 0.5 * (2.0 * a).sin()) * 2.0 / (2.0 - alpha);
    let q22 = (a - 0.5 * (2.0 * a).sin()) * 2.0 / (2.0 - alpha);
    assert!(close(m.q[0], q11, 1e-8) && close(m.q[3], q22, 1e-8), "{:?}", m.q);
    assert!(m.nondegenerate);

    let spec = LevyMeasureSpec::new(2, LevyVariant::Axis { alphas: vec![0.5, 1.5] });
    let m = moments(&spec).unwrap();
    assert!(close(m.q[0], 2.0 / 1.5, 1e-10) && close(m.q[3], 2.0 / 0.5, 1e-10), "{:?}", m.q);
    assert_eq!(m.q[1], 0.0);
}

#[test]
fn truncation_is_dominated_by_full_range_kernel() {
    let j = JumpKernelSpec::isotropic(1, 1.0);
    let nu = j.truncated();
    let boxes = vec![(vec![0.2], vec![0.6]), (vec![-0.9], vec![-0.5]), (vec![0.5], vec![3.0]), (vec![2.0], vec![5.0])];
    let margins = check_domination(&j, &nu, &boxes).unwrap();
    assert!(margins[0].abs() < 1e-9 && margins[1].abs() < 1e-9, "{margins:?}");
    // Mass of [1, 3] and [2, 5] under |z|^{-2}.
    assert!(close(margins[2], 1.0 - 1.0 / 3.0, 1e-8) && close(margins[3], 0.5 - 0.2, 1e-8), "{margins:?}");
}

/// `2 ∫_0^1 (1 − cos(rξ)) r^{-1-α} dr` by the midpoint rule.
fn symbol_oracle_1d(xi: f64, alpha: f64) -> f64 {
    let n = 200_000;
    let h = 1.0 / n as f64;
    (0..n)
        .map(|k| {
            let r = (k as f64 + 0.5) * h;
            2.0 * (1.0 - (r * xi).cos()) * r.powf(-1.0 - alpha) * h
        })
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn symbol_matches_riemann_sum(xi in -60.0f64..60.0, alpha in 0.2f64..1.0) {
        let got = char_exponent(&[xi], &LevyMeasureSpec::isotropic(1, alpha)).unwrap();
        let want = symbol_oracle_1d(xi, alpha);
        prop_assert!((got - want).abs() <= 1e-6 * want.max(1e-6), "{} vs {}", got, want);
    }

    #[test]
    fn symbol_is_even_nonnegative_and_below_quadratic(x in -30.0f64..30.0, y in -30.0f64..30.0, alpha in 0.1f64..1.9) {
        let spec = LevyMeasureSpec::isotropic(2, alpha);
        let a = char_exponent(&[x, y], &spec).unwrap();
        let b = char_exponent(&[-x, -y], &spec).unwrap();
        prop_assert!(a >= 0.0);
        prop_assert!((a - b).abs() <= 1e-8 * a.max(1e-12));
        // 1 − cos t ≤ t²/2 gives φ(ξ) ≤ ⟨Qξ, ξ⟩/2.
        let q = PI / (2.0 - alpha);
        prop_assert!(a <= 0.5 * q * (x * x + y * y) * (1.0 + 1e-8) + 1e-12);
    }

    #[test]
    fn odd_functions_integrate_to_zero(a in -5.0f64..5.0, b in -5.0f64..5.0, alpha in 0.1f64..1.9) {
        let spec = LevyMeasureSpec::isotropic(2, alpha);
        let v = nu_integral(|z| a * z[0] + b * z[1] * z[1] * z[1] + a * b * z[0] * z[1] * z[1], &spec, 1e-10).unwrap();
        prop_assert!(v.abs() <= 1e-10 * (a.abs() + b.abs() + 1.0), "{}", v);
    }

    #[test]
    fn second_moment_integral_agrees_with_moment_set(alpha in 0.1f64..1.9, c in 0.1f64..3.0) {
        let spec = LevyMeasureSpec::isotropic(1, alpha);
        let g0 = moments(&spec).unwrap().gamma0;
        let v = nu_integral(|z| c * z[0] * z[0], &spec, 1e-12).unwrap();
        prop_assert!(close(v, c * g0, 1e-9));
    }
}
