use nls_core::diagnostics::{
    certificate_constants, cutoff_family, cutoff_value, generator_ratio, loglog_slope, verdict, BumpQuotient, DiagnosticsReport, PsiSpec, RatioCertificate,
    TestProfile, Verdict,
};
use nls_core::grid::GridSpec;
use nls_core::kernels::LevyMeasureSpec;
use nls_core::weights::{DichotomySide, VLambdaSpec};
use nls_core::Error;
use proptest::prelude::*;

/// Midpoint rule for the 1-d generator `∫ (φ(x+z) − φ(x))(V(x)+V(x+z)) |z|^{-1-α} dz`, `|z| < 1`,
/// folded onto `z > 0` so the integrand stays bounded.
fn ratio_oracle_1d(x: f64, delta: f64, alpha: f64, v: &VLambdaSpec, panels: usize) -> f64 {
    let phi = |t: f64| (1.0 + t * t).powf(-0.5 * delta);
    let vv = |t: f64| v.eval(t.abs());
    let h = 1.0 / panels as f64;
    let mut acc = 0.0;
    for k in 0..panels {
        let z = (k as f64 + 0.5) * h;
        let plus = (phi(x + z) - phi(x)) * (vv(x) + vv(x + z));
        let minus = (phi(x - z) - phi(x)) * (vv(x) + vv(x - z));
        acc += (plus + minus) * z.powf(-1.0 - alpha) * h;
    }
    -acc / phi(x)
}

#[test]
fn generator_ratio_matches_riemann_oracle() {
    // R0 = 4: probes in the floor, the blend and the quadratic piece, up to 4·R0.
    let v = VLambdaSpec::new(2.0, 4.0, 1.5);
    for alpha in [0.5, 1.0] {
        let nu = LevyMeasureSpec::isotropic(1, alpha);
        for x in [0.7, 3.0, 5.0, 16.0] {
            let got = generator_ratio(&[x], &TestProfile::new(0.5).unwrap(), &nu, &v, 1e-11).unwrap();
            let want = ratio_oracle_1d(x, 0.5, alpha, &v, 400_000);
            assert!((got - want).abs() <= 1e-6 * want.abs().max(1.0), "alpha={alpha} x={x}: {got} vs {want}");
        }
    }
}

#[test]
fn generator_ratio_is_even_and_rotation_invariant() {
    let v = VLambdaSpec::new(1.0, 2.0, 0.5);
    let p = TestProfile::default();
    let nu1 = LevyMeasureSpec::isotropic(1, 1.2);
    for x in [0.3, 1.5, 2.5, 9.0] {
        let a = generator_ratio(&[x], &p, &nu1, &v, 1e-10).unwrap();
        let b = generator_ratio(&[-x], &p, &nu1, &v, 1e-10).unwrap();
        assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{a} vs {b}");
    }
    let nu2 = LevyMeasureSpec::isotropic(2, 1.0);
    let a = generator_ratio(&[3.0, 4.0], &p, &nu2, &v, 1e-9).unwrap();
    let b = generator_ratio(&[5.0, 0.0], &p, &nu2, &v, 1e-9).unwrap();
    let c = generator_ratio(&[0.0, -5.0], &p, &nu2, &v, 1e-9).unwrap();
    assert!((a - b).abs() <= 1e-7 * b.abs() && (c - b).abs() <= 1e-7 * b.abs(), "{a} {b} {c}");
}

#[test]
fn generator_ratio_checks_dimension() {
    let v = VLambdaSpec::new(1.0, 2.0, 0.5);
    let nu = LevyMeasureSpec::isotropic(2, 1.0);
    assert!(matches!(generator_ratio(&[1.0], &TestProfile::default(), &nu, &v, 1e-8), Err(Error::DimensionMismatch { expected: 2, found: 1 })));
}

#[test]
fn test_profile_rejects_delta_outside_unit_interval() {
    for d in [0.0, 1.0, -0.2, f64::NAN] {
        assert!(TestProfile::new(d).is_err(), "{d}");
    }
    let p = TestProfile::new(0.5).unwrap();
    assert_eq!(p.eval(&[0.0, 0.0]), 1.0);
    assert!((p.eval(&[3.0]) - 10f64.powf(-0.25)).abs() < 1e-15);
}

#[test]
fn certificate_constants_known_value() {
    // δ = 1/2, γ0 = 2 (α = 1, d = 1): ε = 1/16, bracket = 5/8 − 17/32 = 3/32.
    let (eps, lambda) = certificate_constants(10.0, 0.5, 2.0);
    assert_eq!(eps, 1.0 / 16.0);
    assert!((lambda - 10.0 / (0.5 * 2.0 * 3.0 / 32.0)).abs() < 1e-12);
}

proptest! {
    // The bracket (1−6ε) − (1+ε)δ equals (1−δ)(2−δ)/8, so λ is positive for every δ in (0, 1).
    #[test]
    fn certificate_lambda_closed_form(c in 0.01f64..1e3, delta in 0.001f64..0.999, gamma0 in 0.01f64..100.0) {
        let (eps, lambda) = certificate_constants(c, delta, gamma0);
        prop_assert!((eps - (1.0 - delta) / 8.0).abs() < 1e-15);
        prop_assert!(lambda > 0.0);
        let want = 8.0 * c / (delta * gamma0 * (1.0 - delta) * (2.0 - delta));
        prop_assert!((lambda - want).abs() <= 1e-9 * want);
    }

    #[test]
    fn cutoff_is_monotone_with_bounded_slope(l in 0.1f64..50.0, a in 0.0f64..3.0, b in 0.0f64..3.0) {
        let (ra, rb) = (a.min(b) * l, a.max(b) * l);
        let (fa, fb) = (cutoff_value(l, ra), cutoff_value(l, rb));
        prop_assert!((0.0..=1.0).contains(&fa) && fb <= fa);
        prop_assert!(fa - fb <= 1.5 / l * (rb - ra) + 1e-12);
    }

    #[test]
    fn loglog_slope_recovers_power_laws(c in 0.01f64..100.0, s in -3.0f64..3.0) {
        let pts: Vec<(f64, f64)> = [8.0, 16.0, 32.0, 64.0].iter().map(|&l: &f64| (l, c * l.powf(s))).collect();
        prop_assert!((loglog_slope(&pts) - s).abs() < 1e-10);
    }
}

#[test]
fn cutoff_family_support_and_gradient() {
    let g = GridSpec::restricted(2, 8.0, 0.25).unwrap();
    let l = 3.0;
    let f = cutoff_family(l, &g).unwrap();
    let radii = g.radii();
    for (v, r) in f.iter().zip(&radii) {
        if *r <= l {
            assert_eq!(*v, 1.0);
        }
        if *r >= 2.0 * l {
            assert_eq!(*v, 0.0);
        }
    }
    // Discrete gradient along each axis: 1.5/l analytically, checked against 2/l plus a grid term.
    let m = g.per_side();
    let mut worst: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            let k = i * m + j;
            if j + 1 < m {
                worst = worst.max((f[k + 1] - f[k]).abs() / g.h);
            }
            if i + 1 < m {
                worst = worst.max((f[k + m] - f[k]).abs() / g.h);
            }
        }
    }
    assert!(worst <= 2.0 / l + g.h, "gradient {worst}");
    assert!(matches!(cutoff_family(4.5, &g), Err(Error::OutOfBox { .. })));
    assert!(cutoff_family(0.0, &g).is_err());
}

#[test]
fn psi_spec_validation_and_values() {
    assert!(PsiSpec::Poly { theta: 1.0 }.issues().is_empty());
    assert_eq!(PsiSpec::Poly { theta: 0.0 }.issues()[0].0, "/theta");
    let bad: Vec<_> = PsiSpec::Exp { c: -1.0, theta: f64::NAN }.issues().into_iter().map(|i| i.0).collect();
    assert_eq!(bad, ["/c", "/theta"]);
    let p = PsiSpec::Poly { theta: 1.0 };
    assert!((p.eval(&[3.0, 4.0]) - 6f64.powi(-3)).abs() < 1e-15);
    assert!((p.sup_inverse_on_ball(5.0, 2) - 216.0).abs() < 1e-9);
    let e = PsiSpec::Exp { c: 0.5, theta: 2.0 };
    assert!((e.eval(&[2.0]) - (-2f64).exp()).abs() < 1e-15);
    assert!((e.sup_inverse_on_ball(2.0, 1) - 2f64.exp()).abs() < 1e-12);
}

fn cert(valid: bool) -> RatioCertificate {
    RatioCertificate {
        c: 10.0,
        delta: 0.5,
        epsilon: 1.0 / 16.0,
        lambda: 106.0,
        gamma0: 2.0,
        r0: 512.0,
        r_max: 5120.0,
        min_ratio_observed: if valid { 20.0 } else { 5.0 },
        argmin_norm: 512.0,
        samples: 80,
        valid,
    }
}

fn report(counts: &[usize], certificate: Option<RatioCertificate>, slope: f64) -> DiagnosticsReport {
    DiagnosticsReport {
        schema_version: 1,
        sss_table: Vec::new(),
        sss_slope: slope,
        ratio_certificate: certificate,
        certificate_error: None,
        hardy_margins: Vec::new(),
        beta_profile: Vec::new(),
        weyl_counts: [8.0, 16.0, 32.0].iter().copied().zip(counts.iter().copied()).collect(),
        level: 10.0,
        bump_quotients: vec![BumpQuotient { half_width: 8.0, center: 4.0, quotient: 1.0 }],
        verdict: Verdict::default(),
    }
}

#[test]
fn verdict_sides() {
    assert_eq!(verdict(&report(&[2, 2, 2], Some(cert(true)), 0.7)).side, DichotomySide::CompactIndicated);
    assert_eq!(verdict(&report(&[6, 10, 18], None, 0.7)).side, DichotomySide::NoncompactIndicated);
    assert_eq!(verdict(&report(&[2, 3, 3], Some(cert(false)), -0.5)).side, DichotomySide::NoncompactIndicated);
    // Stable counts without a certificate are not enough.
    assert_eq!(verdict(&report(&[2, 2, 2], Some(cert(false)), 0.7)).side, DichotomySide::Inconclusive);
    // Conflicting evidence.
    let v = verdict(&report(&[2, 2, 2], Some(cert(true)), 0.0));
    assert_eq!(v.side, DichotomySide::Inconclusive);
    assert!(v.reasons.iter().any(|r| r.contains("conflict")));
    assert_eq!(verdict(&report(&[4], Some(cert(true)), f64::NAN)).side, DichotomySide::Inconclusive);
}

#[test]
fn verdict_ignores_stored_verdict() {
    let mut r = report(&[2, 2, 2], Some(cert(true)), 0.7);
    let first = verdict(&r);
    r.verdict = Verdict { side: DichotomySide::NoncompactIndicated, reasons: vec!["stale".into()] };
    assert_eq!(verdict(&r), first);
    r.verdict = first.clone();
    assert_eq!(verdict(&r), first);
}
