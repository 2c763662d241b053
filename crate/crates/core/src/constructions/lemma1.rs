use super::conformal::{factor_diagnostics, ConformalFactor};
use super::ell::{build_j, ell};
use super::smoothing::{build_j_smoothed, delta_star, smoothed_bound_violations, SmoothedProfile};
use super::lemma1_constant;
use crate::error::{param, Result};
use crate::geometry::{curvature_at, curvature_lp_integral, CurvatureQuantity, ModelMetric};
use crate::profile::QuadratureSpec;
use crate::report::{Check, VerificationReport};
use std::sync::Arc;

/// The two-ended model `h_R = dt² + J(t)² dθ²` with `J = J_{δ*,T}`,
/// `T = R^{1/(1+δ*)}`: a thin neck of radius `1/log T` opening into two
/// Euclidean ends beyond `|t| = R`.
#[derive(Clone)]
pub struct Lemma1Metric {
    pub n: usize,
    pub r: f64,
    pub delta: f64,
    pub t_scale: f64,
    pub metric: ModelMetric,
    /// Euclidean radius of the region where the conformal factor is nonzero.
    pub rho_r: f64,
    /// `T^{1+δ*} = R`; the warp is linear beyond.
    pub tail_knot: f64,
    /// `sup_{[0,2]} ℓ''`, which bounds `σ₋` everywhere.
    pub sigma_bound: f64,
    pub smoothed: SmoothedProfile,
}

impl std::fmt::Debug for Lemma1Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Lemma1Metric")
            .field("n", &self.n)
            .field("R", &self.r)
            .field("T", &self.t_scale)
            .field("rho_R", &self.rho_r)
            .finish()
    }
}

pub fn build_lemma1_metric(n: usize, r: f64) -> Result<Lemma1Metric> {
    build_lemma1_metric_with_delta(n, r, delta_star())
}

/// The two-ended model with a mollifier width other than `δ*`.
pub fn build_lemma1_metric_with_delta(n: usize, r: f64, delta: f64) -> Result<Lemma1Metric> {
    if n < 3 {
        return param("the two-ended model needs n >= 3");
    }
    if !(r > 3.0) || !r.is_finite() {
        return param(format!("the two-ended model needs R > 3, got {r}"));
    }
    let t_scale = r.powf(1.0 / (1.0 + delta));
    let smoothed = build_j_smoothed(delta, t_scale)?;
    let tail_knot = smoothed.outer;
    let rho_r = smoothed.profile.value(tail_knot);
    let metric = ModelMetric::line(n, smoothed.profile.clone(), Some(tail_knot), "lemma1")?;
    Ok(Lemma1Metric { n, r, delta, t_scale, metric, rho_r, tail_knot, sigma_bound: ell().sup_second_derivative(), smoothed })
}

/// The conformal factor `φ(r)` realizing the model on `ℝⁿ∖{0}`.
pub fn conformal_factor_profile(m: &Lemma1Metric, spec: &QuadratureSpec) -> Result<ConformalFactor> {
    ConformalFactor::new(Arc::new(m.metric.clone()), m.tail_knot, spec)
}

/// Dense parameter samples on `[0, hi]`: linear on the core, geometric beyond.
pub(crate) fn core_and_tail_samples(hi: f64, count: usize) -> Vec<f64> {
    let half = count / 2;
    let mut out: Vec<f64> = (0..half).map(|i| 4.0 * i as f64 / half as f64).collect();
    let m = count - half;
    out.extend((0..m).map(|i| 4.0 * (hi / 4.0).powf(i as f64 / (m - 1).max(1) as f64)));
    out
}

pub fn lemma1_certificate(n: usize, r: f64, spec: &QuadratureSpec) -> Result<VerificationReport> {
    lemma1_certificate_for(&build_lemma1_metric(n, r)?, spec)
}

pub fn lemma1_certificate_for(m: &Lemma1Metric, spec: &QuadratureSpec) -> Result<VerificationReport> {
    let (n, r) = (m.n, m.r);
    let mut rep = VerificationReport::new("lemma1");
    rep.input("n", n).input("R", r);
    let c1 = lemma1_constant(n);
    let log_r = r.ln();
    rep.constant("delta_star", m.delta)
        .constant("T", m.t_scale)
        .constant("sigma_bound", m.sigma_bound)
        .constant("C1", c1)
        .constant("rho_R", m.rho_r)
        .constant("rho_over_R", m.rho_r / m.tail_knot);
    rep.tolerance("quad_rel", spec.rel_tol).tolerance("round_trip", 1e-7).tolerance("tail", 1e-9);

    let mut sup_sigma = 0f64;
    for t in core_and_tail_samples(1.5 * m.tail_knot, 4000) {
        sup_sigma = sup_sigma.max(curvature_at(&m.metric, t)?.sigma_minus);
    }
    rep.push(Check::le("sup_sigma_minus", sup_sigma, m.sigma_bound, 1e-12));

    let integral = curvature_lp_integral(&m.metric, n as f64, CurvatureQuantity::SigmaMinus, spec)?;
    rep.constant("curvature_integral", integral);
    rep.push(Check::le("curvature_integral_ratio", integral * log_r.powf(n as f64 / 2.0 - 1.0), c1, 0.0));

    let offset = m.tail_knot - m.rho_r;
    let mut tail = 0f64;
    for k in [1.0, 2.0, 10.0] {
        let t = k * m.tail_knot;
        tail = tail.max((m.metric.warp.value(t) - (t - offset)).abs() / t.max(1.0));
        tail = tail.max((m.metric.warp.value(-t) - (t - offset)).abs() / t.max(1.0));
    }
    rep.push(Check::le("tail_residual", tail, 1e-9, 0.0));
    rep.push(Check::lt("rho_below_tail_knot", m.rho_r, m.tail_knot));

    let v = smoothed_bound_violations(&m.smoothed, 10_000)?;
    let jt = build_j(m.t_scale)?;
    let core = m.smoothed.inner;
    let core_gap = [0.5, 0.9, 1.0].iter().map(|k| (m.metric.warp.value(k * core) - jt.value(k * core)).abs()).fold(0.0, f64::max);
    rep.push(Check::le("warp_below_j", v[0], 0.0, 1e-12));
    rep.push(Check::le("slope_at_most_one", v[1], 0.0, 1e-12));
    rep.push(Check::le("warp_convex", v[2], 0.0, 0.0));
    rep.push(Check::le("second_derivative_bound", v[3], 0.0, 1e-12));
    rep.push(Check::le("core_equals_j", core_gap, 0.0, 1e-12));

    let phi = conformal_factor_profile(m, spec)?;
    let d = factor_diagnostics(&phi, 400, spec)?;
    rep.push(Check::ge("phi_nonnegative", d.min_phi, 0.0, 1e-12));
    rep.push(Check::le("phi_zero_beyond_support", d.max_phi_outside, 0.0, 0.0));
    rep.push(Check::le("phi_nonincreasing", d.max_increase, 0.0, 1e-12));
    rep.push(Check::le("phi_round_trip", d.round_trip, 1e-7, 0.0));
    rep.push(Check::le("phi_ode_vs_quadrature", d.ode_vs_quadrature, 1e-6, 0.0));
    let neck = 1.0 / m.t_scale.ln();
    rep.push(Check::ge("completeness_witness", d.min_scaled_radius, neck, 1e-9 * neck));
    Ok(rep)
}
