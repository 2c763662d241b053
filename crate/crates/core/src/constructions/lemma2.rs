use super::conformal::{factor_diagnostics, ConformalFactor};
use super::ell::{build_j, ell};
use super::lemma1::core_and_tail_samples;
use super::lemma2_constant;
use super::smoothing::{build_j_smoothed, delta_star};
use crate::error::{param, Error, Result};
use crate::geometry::{ball_volume, curvature_at, curvature_lp_integral, CurvatureQuantity, ModelMetric};
use crate::profile::{bracket_root, Jet, PieceFn, Profile, QuadratureSpec};
use crate::report::{Check, VerificationReport};
use std::f64::consts::PI;
use std::sync::Arc;

/// A round cap of radius `R̄` glued along a latitude to a shifted copy of
/// an even convex profile, ending in a Euclidean cone beyond `r_star`.
#[derive(Clone)]
pub struct Lemma2Metric {
    pub n: usize,
    pub rbar: f64,
    pub r: f64,
    pub tau: f64,
    pub theta: f64,
    pub r_star: f64,
    /// Warp value at `r_star`; the Euclidean radius of the bump support.
    pub rho_out: f64,
    pub metric: ModelMetric,
    log_scale: f64,
}

impl std::fmt::Debug for Lemma2Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Lemma2Metric")
            .field("n", &self.n)
            .field("rbar", &self.rbar)
            .field("R", &self.r)
            .field("tau", &self.tau)
            .field("theta", &self.theta)
            .field("r_star", &self.r_star)
            .finish()
    }
}

fn tau_equation(rbar: f64, log_s: f64, tau: f64) -> f64 {
    let e = ell();
    let d = e.d1(tau);
    rbar * (log_s * log_s - d * d).max(0.0).sqrt() - e.value(tau)
}

fn solve_tau_in(rbar: f64, log_s: f64, hi: f64) -> Result<f64> {
    if !(rbar > 1.0 / log_s) {
        return param(format!("cap radius must exceed 1/log R = {}, got {rbar}", 1.0 / log_s));
    }
    bracket_root(|t| tau_equation(rbar, log_s, t), 0.0, hi, 0.0)
        .map_err(|_| Error::Param(format!("cap radius {rbar} is too large for the gluing zone [0, {hi}]")))
}

/// The gluing parameter: `R̄ = ℓ(τ)/√(log²R − ℓ'(τ)²)`.
pub fn solve_tau(rbar: f64, r: f64) -> Result<f64> {
    if !(r >= 3.0) {
        return param(format!("outer scale must be at least 3, got {r}"));
    }
    solve_tau_in(rbar, r.ln(), r)
}

/// Glues the cap to `outer`, an even profile equal to `ℓ/log_s` on
/// `[−zone, zone]` and linear beyond `tail`.
fn glue(n: usize, rbar: f64, r: f64, outer: Profile, log_s: f64, zone: f64, tail: f64) -> Result<Lemma2Metric> {
    if n < 3 {
        return param("the capped cone needs n >= 3");
    }
    let tau = solve_tau_in(rbar, log_s, zone)?;
    let e = ell();
    let (sin, cos) = (e.value(tau) / (rbar * log_s), -e.d1(tau) / log_s);
    let theta = sin.atan2(cos);
    let join = theta * rbar;
    let shift = join + tau;
    let cap: PieceFn = Arc::new(move |t: f64| {
        let (s, c) = (t / rbar).sin_cos();
        Jet::new(rbar * s, c, -s / rbar)
    });
    let body = outer.shifted(shift).as_piece();
    let mut knots = vec![join];
    knots.extend(outer.knots().iter().map(|k| k + shift).filter(|&k| k > join));
    let mut pieces = vec![cap];
    pieces.extend(std::iter::repeat_n(body, knots.len()));
    let warp = Profile::new(0.0, f64::INFINITY, knots, pieces, 2, 1)?;
    let r_star = tail + shift;
    let rho_out = warp.value(r_star);
    let metric = ModelMetric::cone(n, warp, -1.0 / (6.0 * rbar * rbar), Some(r_star), "lemma2")?;
    Ok(Lemma2Metric { n, rbar, r, tau, theta, r_star, rho_out, metric, log_scale: log_s })
}

pub fn build_lemma2_metric(n: usize, rbar: f64, r: f64) -> Result<Lemma2Metric> {
    if !(r >= 3.0) || !r.is_finite() {
        return param(format!("outer scale must be at least 3, got {r}"));
    }
    glue(n, rbar, r, build_j(r)?, r.ln(), r, r)
}

/// The two-ended model with one end replaced by a unit cap: a cone metric
/// on `ℝⁿ` with the same neck, used wherever a cone is required.
pub fn lemma1_cone_reduction(n: usize, r: f64) -> Result<Lemma2Metric> {
    lemma1_cone_reduction_with_delta(n, r, delta_star())
}

pub fn lemma1_cone_reduction_with_delta(n: usize, r: f64, d: f64) -> Result<Lemma2Metric> {
    if !(r > 3.0) || !r.is_finite() {
        return param(format!("the two-ended model needs R > 3, got {r}"));
    }
    let t = r.powf(1.0 / (1.0 + d));
    let j = build_j_smoothed(d, t)?;
    glue(n, 1.0, r, j.profile, t.ln(), j.inner, j.outer)
}

/// The conformal factor `ψ(r)` of the capped cone.
pub fn lemma2_factor(m: &Lemma2Metric, spec: &QuadratureSpec) -> Result<ConformalFactor> {
    ConformalFactor::new(Arc::new(m.metric.clone()), m.r_star, spec)
}

pub fn lemma2_certificate(n: usize, rbar: f64, r: f64, spec: &QuadratureSpec) -> Result<VerificationReport> {
    let m = build_lemma2_metric(n, rbar, r)?;
    let mut rep = VerificationReport::new("lemma2");
    rep.input("n", n).input("Rbar", rbar).input("R", r);
    let c2 = lemma2_constant(n);
    let dims = m.metric.constants();
    rep.constant("tau", m.tau)
        .constant("theta", m.theta)
        .constant("r_star", m.r_star)
        .constant("rho_out", m.rho_out)
        .constant("C2", c2);
    rep.tolerance("quad_rel", spec.rel_tol).tolerance("junction", 1e-9).tolerance("round_trip", 1e-7);

    let join = m.theta * m.rbar;
    let (mut cap_sigma, mut cap_dev) = (0f64, 0f64);
    let k = 1.0 / (m.rbar * m.rbar);
    for i in 1..200 {
        let c = curvature_at(&m.metric, join * i as f64 / 200.0)?;
        cap_sigma = cap_sigma.max(c.sigma_minus);
        cap_dev = cap_dev.max(((c.k_rad - k).abs()).max((c.k_tan - k).abs()) / k);
    }
    rep.push(Check::le("cap_sigma_minus", cap_sigma, 0.0, 0.0));
    rep.push(Check::le("cap_curvature_deviation", cap_dev, 1e-8, 0.0));

    let integral = curvature_lp_integral(&m.metric, n as f64, CurvatureQuantity::SigmaMinus, spec)?;
    rep.constant("curvature_integral", integral);
    rep.push(Check::le("curvature_integral_ratio", integral * r.ln().powf(n as f64 / 2.0 - 1.0), c2, 0.0));

    rep.push(Check::lt("r_star_above_R", r, m.r_star));
    rep.push(Check::lt("r_star_below_2R_plus_pi_rbar", m.r_star, 2.0 * r + PI * rbar));
    rep.push(Check::le("diameter_surrogate", 2.0 * m.r_star, 2.0 * PI * (rbar + r), 0.0));

    let mut tail = 0f64;
    for k in [1.0, 2.0, 10.0] {
        let t = k * m.r_star;
        tail = tail.max((m.metric.warp.value(t) - (m.rho_out + t - m.r_star)).abs() / t);
    }
    rep.push(Check::le("tail_residual", tail, 1e-9, 0.0));

    let (l, rt) = (m.metric.warp.jet_left(join)?, m.metric.warp.jet(join)?);
    rep.push(Check::le("junction_mismatch", (l.value - rt.value).abs() + (l.d1 - rt.d1).abs(), 1e-9, 0.0));
    let e = ell();
    let ls = m.log_scale;
    let trig = (e.value(m.tau) / (rbar * ls)).powi(2) + (e.d1(m.tau) / ls).powi(2);
    rep.push(Check::close("trig_consistency", trig, 1.0, 1e-10));
    let resid = (e.value(m.tau) / (ls * ls - e.d1(m.tau).powi(2)).sqrt() - rbar).abs();
    rep.push(Check::le("tau_residual", resid, 1e-10 * rbar, 0.0));
    rep.push(Check::flag("theta_in_open_quadrant", m.theta > PI / 2.0 && m.theta < PI));

    let hemi = ball_volume(&m.metric, PI * rbar / 2.0, spec)?;
    let expect = dims.sigma_n / 2.0 * rbar.powi(n as i32);
    rep.constant("hemisphere_volume", hemi);
    rep.push(Check::close("hemisphere_volume", hemi / expect, 1.0, 1e-8));

    let mut worst_slope = 0f64;
    for t in core_and_tail_samples(1.5 * m.r_star, 2000) {
        worst_slope = worst_slope.max(m.metric.warp.jet(t)?.d1.abs() - 1.0);
    }
    rep.push(Check::le("slope_at_most_one", worst_slope, 0.0, 1e-12));

    let psi = lemma2_factor(&m, spec)?;
    let d = factor_diagnostics(&psi, 400, spec)?;
    rep.push(Check::ge("psi_nonnegative", d.min_phi, 0.0, 1e-12));
    rep.push(Check::le("psi_zero_beyond_support", d.max_phi_outside, 0.0, 0.0));
    rep.push(Check::le("psi_nonincreasing", d.max_increase, 0.0, 1e-12));
    rep.push(Check::le("psi_round_trip", d.round_trip, 1e-7, 0.0));
    rep.push(Check::le("psi_ode_vs_quadrature", d.ode_vs_quadrature, 1e-6, 0.0));
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_is_monotone_in_cap_radius() {
        let (a, b) = (solve_tau(1.0, 100.0).unwrap(), solve_tau(2.0, 100.0).unwrap());
        assert!(0.0 < a && a < b && b < 100.0);
        assert!(solve_tau(1.0 / 100f64.ln(), 100.0).is_err());
        let tiny = solve_tau(1.0 / 100f64.ln() + 1e-9, 100.0).unwrap();
        assert!(tiny < 1e-3);
    }

    #[test]
    fn hemisphere_volume_closed_form() {
        let m = build_lemma2_metric(3, 2.0, 100.0).unwrap();
        let v = ball_volume(&m.metric, PI, &QuadratureSpec::default()).unwrap();
        assert!((v - PI * PI * 8.0).abs() < 1e-8 * v);
    }

    #[test]
    fn junction_is_c1() {
        let m = build_lemma2_metric(3, 5.0, 100.0).unwrap();
        let j = m.theta * m.rbar;
        let (l, r) = (m.metric.warp.jet_left(j).unwrap(), m.metric.warp.jet(j).unwrap());
        assert!((l.value - r.value).abs() < 1e-10 && (l.d1 - r.d1).abs() < 1e-10);
    }

    #[test]
    fn certificate_passes() {
        let rep = lemma2_certificate(3, 5.0, 100.0, &QuadratureSpec::default()).unwrap();
        assert!(rep.failures().is_empty(), "{:?}", rep.failures());
    }

    #[test]
    fn cone_reduction_keeps_the_neck() {
        let m = lemma1_cone_reduction(3, 100.0).unwrap();
        assert!(m.tau < 100f64.powf((1.0 - delta_star()) / (1.0 + delta_star())));
        assert!(m.metric.warp.knot_mismatch() < 1e-9);
    }
}
