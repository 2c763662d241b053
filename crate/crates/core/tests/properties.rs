use proptest::prelude::*;
use vglab::comparison::{interpolate_ip, psi_at, theorem_a_bound, ComparisonInputs};
use vglab::geometry::{appu_gap, ball_volume, curvature_at, ModelMetric};
use vglab::profile::{integrate, QuadratureSpec};
use vglab::report::{Check, Outcome, VerificationReport};
use vglab::spectral::{radial_bottom_spectrum, RadialOperator};

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn quadrature_is_additive(a in -3.0..0.0f64, len in 0.5..6.0f64, split in 0.01..0.99f64, k in 0.5..8.0f64) {
        let g = |x: f64| (-0.3 * x).exp() * (k * x).sin() + 1.5;
        let b = a + len;
        let c = a + split * len;
        let s = spec();
        let whole = integrate(g, a, b, &s, &[]).unwrap();
        let parts = integrate(g, a, c, &s, &[]).unwrap() + integrate(g, c, b, &s, &[]).unwrap();
        prop_assert!((whole - parts).abs() <= 2.0 * s.rel_tol.max(s.abs_tol) * whole.abs().max(1.0));
    }

    #[test]
    fn curvature_scales_inversely_with_the_metric(
        n in 3usize..6, eps in -0.05..0.05f64, w in 0.5..3.0f64, c in 0.2..5.0f64, u in 0.05..1.5f64,
    ) {
        let m = ModelMetric::bump_cone(n, eps, w).unwrap();
        let t = u * w;
        prop_assume!((t - w).abs() > 1e-6);
        let a = curvature_at(&m, t).unwrap();
        let b = curvature_at(&m.rescaled(c), c * t).unwrap();
        for (x, y) in [(a.k_rad, b.k_rad), (a.k_tan, b.k_tan), (a.ricm, b.ricm)] {
            prop_assert!((x / (c * c) - y).abs() <= 1e-9 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn ball_volume_scales_like_the_dimension(n in 2usize..5, c in 0.25..4.0f64, r in 0.1..3.0f64) {
        let m = ModelMetric::hyperbolic(n);
        let a = ball_volume(&m, r, &spec()).unwrap();
        let b = ball_volume(&m.rescaled(c), c * r, &spec()).unwrap();
        prop_assert!(close(b, c.powi(n as i32) * a, 1e-8));
    }

    #[test]
    fn volume_bound_is_scale_equivariant(
        n in 3usize..6, dnu in 0.1..1.0f64, i_n in 0.0..50.0f64, i_nu in 1e-3..50.0f64,
        c in 0.1..10.0f64, r in 1e-2..1e3f64,
    ) {
        let inputs = ComparisonInputs::new(n, n as f64 + dnu, i_n, i_nu).unwrap();
        let a = theorem_a_bound(&inputs, r).unwrap();
        let b = theorem_a_bound(&inputs.rescaled(c).unwrap(), r / c).unwrap();
        prop_assert!(close(a, c.powi(n as i32) * b, 1e-9));
    }

    #[test]
    fn euclidean_space_has_no_mean_curvature_excess(n in 3usize..7, r in 1e-3..1e3f64) {
        let s = psi_at(&ModelMetric::euclidean(n), r).unwrap();
        prop_assert_eq!(s.psi, 0.0);
        prop_assert_eq!(s.ricm, 0.0);
    }

    #[test]
    fn area_inequality_holds_on_bumped_cones(n in 3usize..6, eps in -0.05..0.05f64, w in 0.5..3.0f64, u in 0.05..1.5f64) {
        let m = ModelMetric::bump_cone(n, eps, w).unwrap();
        let r = u * w;
        prop_assume!(m.knot_distance(r) > 1e-3);
        prop_assert!(appu_gap(&m, r).unwrap() >= -1e-8);
    }

    #[test]
    fn fail_dominates_inconclusive(states in proptest::collection::vec(0u8..3, 1..12)) {
        let checks: Vec<Check> = states
            .iter()
            .enumerate()
            .map(|(i, s)| match s {
                0 => Check::flag(format!("c{i}"), true),
                1 => Check::flag(format!("c{i}"), false),
                _ => Check::flag(format!("c{i}"), true).inconclusive(),
            })
            .collect();
        let want = if states.contains(&1) {
            Outcome::Fail
        } else if states.contains(&2) {
            Outcome::Inconclusive
        } else {
            Outcome::Pass
        };
        prop_assert_eq!(VerificationReport::combine(&checks), want);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn holder_interpolation_dominates_quadrature(t in 1.0..4.0f64, dnu in 0.2..1.0f64, u in 0.0..1.0f64) {
        let m = ModelMetric::truncated_hyperbolic(3, t, t + 1.0).unwrap();
        let inputs = ComparisonInputs::from_metric(&m, 3.0 + dnu, &spec()).unwrap();
        let ip = interpolate_ip(&inputs, 3.0 + u * dnu).unwrap();
        prop_assert!(ip.quadrature.unwrap() <= ip.holder * (1.0 + 1e-9));
    }

    #[test]
    fn bottom_spectrum_decreases_with_the_domain(lam in 0.0..0.5f64, l in 2.0..20.0f64, grow in 1.1..3.0f64) {
        let op = RadialOperator::shifted(&ModelMetric::hyperbolic(2), lam).unwrap();
        let small = radial_bottom_spectrum(&op, l, 200).unwrap();
        let large = radial_bottom_spectrum(&op, grow * l, 200).unwrap();
        prop_assert!(large <= small + 1e-9 * small.abs().max(1.0));
    }

    #[test]
    fn higher_angular_sectors_dominate(eps in -0.05..0.05f64, lam in 0.0..2.0f64, l in 1.0..10.0f64, k in 1u32..4) {
        let op = RadialOperator::rho(&ModelMetric::bump_cone(3, eps, 1.0).unwrap(), lam).unwrap();
        let radial = radial_bottom_spectrum(&op, l, 200).unwrap();
        let sector = radial_bottom_spectrum(&op.with_angular(k), l, 200).unwrap();
        prop_assert!(sector >= radial - 1e-9 * radial.abs().max(1.0));
    }
}
