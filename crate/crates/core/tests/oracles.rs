//! Brute-force and closed-form oracles, evaluated independently of the
//! library's numerical kernel.

use std::f64::consts::PI;
use vglab::comparison::{scaling_radius, ComparisonInputs};
use vglab::constructions::{
    assemble_thm_b, build_lemma1_metric, conformal_factor_profile, eval_bubble_field, lemma1_cone_reduction,
    thm_b_bubble_count,
};
use vglab::geometry::{
    ball_volume, curvature_at, curvature_lp_integral, curvature_lp_integral_on, CurvatureQuantity, ModelMetric,
};
use vglab::profile::{integrate, QuadratureSpec};
use vglab::spectral::{davies_simon_operator, radial_gauge};

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

#[test]
fn adaptive_quadrature_matches_fine_trapezoid() {
    let g = |t: f64| t.ln().powf(1.5) * t.sqrt();
    let (a, b, panels) = (2.0, 100.0, 1_000_000);
    let h = (b - a) / panels as f64;
    let mut trap = 0.5 * (g(a) + g(b));
    for i in 1..panels {
        trap += g(a + i as f64 * h);
    }
    trap *= h;
    let adaptive = integrate(g, a, b, &spec(), &[]).unwrap();
    assert!((adaptive - trap).abs() < 1e-8 * trap, "{adaptive} vs {trap}");
}

#[test]
fn conformal_factor_matches_fixed_step_euler() {
    let m = build_lemma1_metric(3, 100.0).unwrap();
    let phi = conformal_factor_profile(&m, &spec()).unwrap();
    let w = &m.metric.warp;
    let rhs = |t: f64| {
        let j = w.jet_raw(t);
        (j.d1 - 1.0) / j.value
    };
    let t_hi = phi.tail_start();
    let probes = [0.75 * t_hi, 0.5 * t_hi, 0.25 * t_hi, 0.0];
    // Explicit Euler from the tail start down to each probe.
    let euler = |steps: usize| -> Vec<f64> {
        let h = t_hi / steps as f64;
        let mut y = 0.0;
        let mut out = vec![];
        for i in 0..steps {
            y -= h * rhs(t_hi - i as f64 * h);
            if (i + 1) % (steps / 4) == 0 {
                out.push(y);
            }
        }
        out
    };
    let (coarse, fine) = (euler(1_000_000), euler(2_000_000));
    for ((t, c), f) in probes.iter().zip(coarse).zip(fine) {
        let oracle = 2.0 * f - c;
        let got = phi.phi_at_t(*t);
        assert!((got - oracle).abs() < 1e-6, "t = {t}: {got} vs {oracle}");
    }
}

#[test]
fn truncated_hyperbolic_curvature_integral() {
    let (n, p, t) = (3usize, 3.0, 4.0);
    let m = ModelMetric::truncated_hyperbolic(n, t, 5.0).unwrap();
    let sigma = 4.0 * PI;
    // ∫₀^T sinh² = (sinh 2T − 2T)/4
    let closed = sigma * (n as f64 - 1.0).powf(p / 2.0) * ((2.0 * t).sinh() - 2.0 * t) / 4.0;
    let on_core = curvature_lp_integral_on(&m, p, CurvatureQuantity::Ricm, 0.0, t, &spec()).unwrap();
    assert!((on_core - closed).abs() < 1e-9 * closed, "{on_core} vs {closed}");
}

#[test]
fn hyperbolic_volume_scales_with_the_metric() {
    let h = ModelMetric::hyperbolic(3);
    let scaled = h.rescaled(2.0);
    for r in [0.3, 1.0, 2.5] {
        let a = ball_volume(&h, r, &spec()).unwrap();
        let b = ball_volume(&scaled, 2.0 * r, &spec()).unwrap();
        assert!((b - 8.0 * a).abs() < 1e-8 * b, "r = {r}");
        let closed = 4.0 * PI * ((2.0 * r).sinh() / 4.0 - r / 2.0);
        assert!((a - closed).abs() < 1e-10 * closed);
    }
}

#[test]
fn scaling_radius_round_trip() {
    let cone = lemma1_cone_reduction(3, 100.0).unwrap().metric;
    let nu = 3.5;
    let inputs = ComparisonInputs::from_metric(&cone, nu, &spec()).unwrap();
    let r0 = inputs.scaling_radius().unwrap();
    // Substitute back: C(ν,3)·R₀^{ν−3}·I_ν against (ν−3)^{ν−1}(2^{1/(ν−1)}−1)^{ν−1}·4π.
    let c = 2.0 * (2.5f64 / 3.5).powf(1.75) * (2.0 * 1.5 / 0.5f64).powf(0.75);
    let lhs = c * r0.powf(nu - 3.0) * inputs.i_nu;
    let rhs = 0.5f64.powf(2.5) * (2f64.powf(1.0 / 2.5) - 1.0).powf(2.5) * 4.0 * PI;
    assert!((lhs - rhs).abs() < 1e-9 * rhs, "{lhs} vs {rhs}");
    assert_eq!(scaling_radius(3, nu, 0.0).unwrap(), f64::INFINITY);
}

#[test]
fn bubble_field_reproduces_model_curvature() {
    let c = assemble_thm_b(3, 1e3, &spec()).unwrap();
    assert_eq!(c.bubbles.len(), thm_b_bubble_count(3, 1e3));
    let b = &c.bubbles[0];
    for t in [0.5, 2.0, 0.7 * b.factor.tail_start()] {
        let r = b.factor.r_of_t(t);
        let mut x = b.center.clone();
        x[1] += r;
        let s = eval_bubble_field(&c, &x).unwrap();
        let k = curvature_at(b.factor.model(), t).unwrap();
        assert_eq!(s.bubble, Some(0));
        assert!((s.sigma_minus - k.sigma_minus).abs() <= 1e-9 * (1.0 + k.sigma_minus), "t = {t}");
    }
}

#[test]
fn sigma_integral_decays_like_inverse_root_log() {
    let mut ratios = vec![];
    for r in [1e2, 1e4, 1e8, 1e16] {
        let m = build_lemma1_metric(3, r).unwrap();
        let i = curvature_lp_integral(&m.metric, 3.0, CurvatureQuantity::SigmaMinus, &spec()).unwrap();
        ratios.push(i * f64::ln(r).sqrt());
    }
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0f64), |(a, b), &x| (a.min(x), b.max(x)));
    assert!(hi / lo < 2.0, "{ratios:?}");
}

#[test]
fn subcritical_inverse_square_gauge_is_bounded() {
    let op = davies_simon_operator(4, 0.5).unwrap();
    let g = radial_gauge(&op, 100.0, &spec()).unwrap();
    assert!(g.gamma.is_finite() && g.gamma >= 1.0);
    let mut prev = f64::INFINITY;
    for r in [1.0, 2.0, 5.0, 10.0, 50.0, 100.0] {
        let h = g.profile.value(r);
        assert!(h >= 1.0 && h <= prev);
        prev = h;
    }
    // Beyond the core the solution decays like r^{−α}, α = 1 − √(1 − λ).
    let alpha = 1.0 - 0.5f64.sqrt();
    let slope = (g.profile.value(100.0) / g.profile.value(50.0)).ln() / 2f64.ln();
    assert!((slope + alpha).abs() < 0.01, "{slope}");
}
