use super::{nonnegativity_verdict, RadialOperator, SpectralVerdict, DEFAULT_VERDICT_TOL as VERDICT_TOL};
use crate::error::{param, Error, Result};
use crate::geometry::{
    appu_gap, area_second_derivative, ball_volume, curvature_at, integration_breaks, MetricKind, ModelMetric,
};
use crate::profile::{integrate, QuadratureSpec};
use crate::report::{Check, VerificationReport};
use std::f64::consts::PI;

/// Radial integrals against the test function `φ_R = (R − r)₊^α`.
struct TestIntegrals {
    /// `∫ A'' ξ²`.
    area_second: f64,
    /// `∫ |dφ_R|² = α² ∫ A (R−r)^{2α−2}`.
    dirichlet: f64,
    /// `∫ ρ φ_R²`.
    rho_mass: f64,
    /// `∫ f^{n−3} (R−r)^{2α}`.
    low_power: f64,
    /// `vol B(o, R/2)`.
    half_ball: f64,
}

fn test_integrals(m: &ModelMetric, alpha: f64, r: f64, spec: &QuadratureSpec) -> Result<TestIntegrals> {
    let sigma = m.constants().sigma_nm1;
    let n = m.n as i32;
    let breaks = integration_breaks(m, 0.0, r);
    let area = |t: f64| sigma * m.warp.value(t).powi(n - 1);
    let xi2 = |t: f64| (r - t).max(0.0).powf(2.0 * alpha);
    let area_second = integrate(|t| area_second_derivative(m, m.warp.jet_raw(t)) * xi2(t), 0.0, r, spec, &breaks)?;
    let dirichlet = alpha
        * alpha
        * integrate(|t| area(t) * (r - t).max(0.0).powf(2.0 * alpha - 2.0), 0.0, r, spec, &breaks)?;
    let rho_mass = integrate(
        |t| curvature_at(m, t).map(|c| c.rho).unwrap_or(f64::NAN) * area(t) * xi2(t),
        0.0,
        r,
        spec,
        &breaks,
    )?;
    let low_power = integrate(|t| m.warp.value(t).powi(n - 3) * xi2(t), 0.0, r, spec, &breaks)?;
    let half_ball = ball_volume(m, r / 2.0, spec)?;
    Ok(TestIntegrals { area_second, dirichlet, rho_mass, low_power, half_ball })
}

fn spectral_gate(m: &ModelMetric, lambda: f64, rep: &mut VerificationReport) -> Result<SpectralVerdict> {
    let v = nonnegativity_verdict(&RadialOperator::rho(m, lambda)?, VERDICT_TOL)?;
    rep.constant("spectral_margin", v.margin).constant("spectral_relative_margin", v.relative_margin);
    rep.tolerance("spectral", VERDICT_TOL);
    match v.nonneg {
        Some(false) => Err(Error::Hypothesis(format!(
            "Δ + {lambda}ρ has negative spectrum (relative margin {:.3e})",
            v.relative_margin
        ))),
        Some(true) => {
            rep.push(Check::ge("spectral_nonnegative", v.relative_margin, VERDICT_TOL, 0.0));
            Ok(v)
        }
        None => {
            rep.push(Check::ge("spectral_nonnegative", v.relative_margin, VERDICT_TOL, 0.0).inconclusive());
            Ok(v)
        }
    }
}

fn sample_top(m: &ModelMetric, r: f64) -> f64 {
    let last = m.flat_from.or_else(|| m.knots().last().copied()).unwrap_or(0.0);
    r.max(2.0 * last)
}

/// Each link of the argument bounding `vol B(o, R/2)` by `c·R³` on a
/// three-dimensional Cartan–Hadamard cone with `Δ + λρ >= 0`.
pub fn theorem_d_chain(m: &ModelMetric, lambda: f64, alpha: f64, r: f64, spec: &QuadratureSpec) -> Result<VerificationReport> {
    if m.kind != MetricKind::Cone || m.n != 3 {
        return Err(Error::Hypothesis("the chain needs a three-dimensional cone".into()));
    }
    if !(r > 0.0) || !r.is_finite() {
        return param(format!("radius must be positive, got {r}"));
    }
    if !(lambda > 0.5) {
        return Err(Error::Hypothesis(format!("need lambda > 1/2, got {lambda}")));
    }
    if !(alpha > 0.5) || !(1.0 / alpha + 1.0 / lambda < 2.0) {
        return Err(Error::Hypothesis(format!("need alpha > 1/2 with 1/alpha + 1/lambda < 2, got alpha = {alpha}")));
    }
    let top = sample_top(m, r);
    for i in 0..=2000 {
        let c = curvature_at(m, top * i as f64 / 2000.0)?;
        if c.k_rad > 1e-12 || c.k_tan > 1e-12 {
            return Err(Error::Hypothesis(format!("positive sectional curvature at t = {}", top * i as f64 / 2000.0)));
        }
    }
    let mut rep = VerificationReport::new("thm-d");
    rep.input("n", 3).input("lambda", lambda).input("alpha", alpha).input("R", r).input("metric", m.label.clone());
    spectral_gate(m, lambda, &mut rep)?;

    let ti = test_integrals(m, alpha, r, spec)?;
    let xi_sq = r.powf(2.0 * alpha + 1.0) / (2.0 * alpha + 1.0);
    let ratio = 2.0 * (2.0 * alpha - 1.0) / alpha;
    let stated = 2f64.powf(2.0 * alpha) * PI * lambda / (alpha * (2.0 * alpha + 1.0) * (lambda * (2.0 * alpha - 1.0) - 1.0));
    let chained = 2f64.powf(2.0 * alpha) * PI * lambda / (alpha * (2.0 * alpha + 1.0) * (lambda * (2.0 * alpha - 1.0) - alpha));
    rep.constant("dirichlet", ti.dirichlet)
        .constant("rho_mass", ti.rho_mass)
        .constant("half_ball_volume", ti.half_ball)
        .constant("c_stated", stated)
        .constant("c_chain", chained);
    rep.tolerance("identity_rel", 1e-8).tolerance("quad_rel", spec.rel_tol);

    let scale = |x: f64, y: f64| 1e-9 * (x.abs() + y.abs());
    rep.push(Check::close("integration_by_parts", ti.area_second / (ratio * ti.dirichlet), 1.0, 1e-8));
    let gb = 8.0 * PI * xi_sq - 2.0 * ti.rho_mass;
    rep.push(Check::le("gauss_bonnet", ti.area_second, gb, scale(ti.area_second, gb)));
    rep.push(Check::le("spectral_step", -ti.rho_mass, ti.dirichlet / lambda, scale(ti.rho_mass, ti.dirichlet)));
    let combined = (2.0 - 1.0 / alpha - 1.0 / lambda) * ti.dirichlet;
    rep.push(Check::le("combined", combined, 4.0 * PI * xi_sq, scale(combined, xi_sq)));
    let lower = alpha * alpha * (r / 2.0).powf(2.0 * alpha - 2.0) * ti.half_ball;
    rep.push(Check::le("dirichlet_lower_bound", lower, ti.dirichlet, scale(lower, ti.dirichlet)));
    rep.push(Check::le("final_bound", ti.half_ball, stated * r.powi(3), 0.0));
    rep.push(Check::le("final_bound_chain", ti.half_ball, chained * r.powi(3), 0.0));
    Ok(rep)
}

/// Each link of the argument bounding `vol B(o, R/2)` by `c·Rⁿ` on a cone
/// with `Δ + λρ >= 0`, `n >= 3`.
pub fn theorem_e_chain(m: &ModelMetric, lambda: f64, alpha: f64, r: f64, spec: &QuadratureSpec) -> Result<VerificationReport> {
    if m.kind != MetricKind::Cone || m.n < 3 {
        return Err(Error::Hypothesis("the chain needs a cone of dimension >= 3".into()));
    }
    if !(r > 0.0) || !r.is_finite() {
        return param(format!("radius must be positive, got {r}"));
    }
    let nf = m.n as f64;
    let kappa = 4.0 - 2.0 / alpha - (nf - 1.0) / lambda;
    if !(alpha > 0.5) || !(kappa > 0.0) {
        return Err(Error::Hypothesis(format!("need alpha > 1/2 and 4 - 2/alpha - (n-1)/lambda > 0, got {kappa}")));
    }
    let mut rep = VerificationReport::new("thm-e");
    rep.input("n", m.n).input("lambda", lambda).input("alpha", alpha).input("R", r).input("metric", m.label.clone());
    spectral_gate(m, lambda, &mut rep)?;

    let sigma = m.constants().sigma_nm1;
    let gamma = (nf - 1.0) * (nf - 2.0);
    let h = (nf - 1.0) / 2.0;
    let q = r.powf(2.0 * alpha + nf - 2.0) / (2.0 * alpha + nf - 2.0);
    let c = sigma * gamma.powf(h) * 2f64.powf(2.0 * alpha - 2.0) / (alpha.powf(nf - 1.0) * kappa.powf(h) * (2.0 * alpha + nf - 2.0));
    rep.constant("kappa", kappa).constant("gamma_n", gamma).constant("c", c);
    rep.tolerance("pointwise", 1e-8).tolerance("consistency", 1e-7).tolerance("quad_rel", spec.rel_tol);

    let (mut worst_gap, mut worst_mismatch) = (f64::INFINITY, 0f64);
    for i in 1..=200 {
        let t = r * i as f64 / 200.0;
        if m.knot_distance(t) < 1e-6 {
            continue;
        }
        let j = m.warp.jet(t)?;
        let a = sigma * j.value.powi(m.n as i32 - 1);
        let rho = curvature_at(m, t)?.rho;
        let sphere = sigma * gamma * j.value.powi(m.n as i32 - 3);
        let rhs = sphere - (nf - 1.0) * a * rho;
        let a2 = area_second_derivative(m, j);
        let rel = (rhs - a2) / (1.0 + sphere + ((nf - 1.0) * a * rho).abs() + a2.abs());
        let g = appu_gap(m, t)?;
        worst_gap = worst_gap.min(g);
        worst_mismatch = worst_mismatch.max((rel - g).abs());
    }
    rep.push(Check::ge("pointwise_area_inequality", worst_gap, 0.0, 1e-8));
    rep.push(Check::le("pointwise_consistency", worst_mismatch, 1e-7, 0.0));

    let ti = test_integrals(m, alpha, r, spec)?;
    rep.constant("dirichlet", ti.dirichlet).constant("rho_mass", ti.rho_mass).constant("half_ball_volume", ti.half_ball);
    let scale = |x: f64, y: f64| 1e-9 * (x.abs() + y.abs());
    let lhs_b = (4.0 - 2.0 / alpha) * ti.dirichlet + (nf - 1.0) * ti.rho_mass;
    let rhs_b = sigma * gamma * ti.low_power;
    rep.push(Check::le("integrated_inequality", lhs_b, rhs_b, scale(lhs_b, rhs_b)));
    let holder = (ti.dirichlet / (alpha * alpha * sigma)).powf((nf - 3.0) / (nf - 1.0)) * q.powf(2.0 / (nf - 1.0));
    rep.push(Check::le("holder", ti.low_power, holder, scale(ti.low_power, holder)));
    rep.push(Check::le("spectral_step", -ti.rho_mass, ti.dirichlet / lambda, scale(ti.rho_mass, ti.dirichlet)));
    let lhs_d = kappa.powf(h) * ti.dirichlet;
    let rhs_d = gamma.powf(h) / alpha.powf(nf - 3.0) * sigma * q;
    rep.push(Check::le("dirichlet_bound", lhs_d, rhs_d, scale(lhs_d, rhs_d)));
    rep.push(Check::le("final_bound", ti.half_ball, c * r.powf(nf), 0.0));
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_dirichlet_matches_beta_form() {
        // α²σ∫₀^R (R−r)^{2α−2} r² dr = α²σ·R^{2α+1}·Γ(2α−1)Γ(3)/Γ(2α+2).
        let m = ModelMetric::euclidean(3);
        let (alpha, r) = (1.5, 10.0);
        let ti = test_integrals(&m, alpha, r, &QuadratureSpec::default()).unwrap();
        let beta = 2.0 / ((2.0 * alpha - 1.0) * (2.0 * alpha) * (2.0 * alpha + 1.0));
        let closed = alpha * alpha * 4.0 * PI * r.powf(2.0 * alpha + 1.0) * beta;
        assert!((ti.dirichlet / closed - 1.0).abs() < 1e-9);
    }

    #[test]
    fn stated_constant_for_euclidean_example() {
        let rep = theorem_d_chain(&ModelMetric::euclidean(3), 1.0, 1.5, 10.0, &QuadratureSpec::default()).unwrap();
        assert!((rep.constants_used["c_stated"] - 4.0 * PI / 3.0).abs() < 1e-12);
        assert!(rep.failures().is_empty(), "{:?}", rep.failures());
    }

    #[test]
    fn gates() {
        let e = ModelMetric::euclidean(3);
        let s = QuadratureSpec::default();
        assert!(matches!(theorem_d_chain(&e, 0.4, 5.0, 1.0, &s), Err(Error::Hypothesis(_))));
        assert!(matches!(theorem_d_chain(&ModelMetric::sphere(3), 1.0, 5.0, 1.0, &s), Err(Error::Hypothesis(_))));
        assert!(matches!(theorem_e_chain(&e, 0.5, 5.0, 1.0, &s), Err(Error::Hypothesis(_))));
    }
}
