//! Volume comparison under integral Ricci bounds: the excess mean
//! curvature `Ψ`, its differential inequalities, the scale normalization
//! and the resulting volume bound, plus a Bishop–Gromov checker.

mod bound;

pub use bound::{
    bishop_gromov_check, interpolate_ip, theorem_a_bound, thm_a_certificate, ComparisonInputs, IpInterpolation,
};

use crate::error::{param, Error, Result};
use crate::geometry::{curvature_at, MetricKind, ModelMetric};
use crate::profile::{bracket_root, Jet};
use crate::report::{Check, VerificationReport};
use serde::{Deserialize, Serialize};

/// `C(p, n) = 2((p−1)/p)^{p/2}((n−1)(p−2)/(p−n))^{p/2−1}`.
pub fn comparison_constant(p: f64, n: usize) -> Result<f64> {
    let nf = n as f64;
    if n < 3 {
        return param("comparison constant needs n >= 3");
    }
    if !(p > nf) || !p.is_finite() {
        return param(format!("comparison constant needs p > n, got p = {p}, n = {n}"));
    }
    Ok(2.0 * ((p - 1.0) / p).powf(p / 2.0) * ((nf - 1.0) * (p - 2.0) / (p - nf)).powf(p / 2.0 - 1.0))
}

/// The radius `R₀` at which `C(ν,n)·R₀^{ν−n}·I_ν` equals
/// `(ν−n)^{ν−1}(2^{1/(ν−1)}−1)^{ν−1}σ_{n−1}`; `+∞` when `I_ν = 0`.
pub fn scaling_radius(n: usize, nu: f64, i_nu: f64) -> Result<f64> {
    if !(i_nu >= 0.0) || !i_nu.is_finite() {
        return param(format!("I_nu must be finite and nonnegative, got {i_nu}"));
    }
    let c = comparison_constant(nu, n)?;
    if i_nu == 0.0 {
        return Ok(f64::INFINITY);
    }
    let nf = n as f64;
    let sigma = crate::geometry::DimensionConstants::new(n).sigma_nm1;
    let rhs = (nu - nf).powf(nu - 1.0) * (2f64.powf(1.0 / (nu - 1.0)) - 1.0).powf(nu - 1.0) * sigma;
    Ok((rhs / (c * i_nu)).powf(1.0 / (nu - nf)))
}

/// Level-sphere mean curvature and its excess over the Euclidean value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiSample {
    pub r: f64,
    /// `(n−1) f'/f`.
    pub h: f64,
    /// `h'` from the warp jet.
    pub dh: f64,
    /// `max(0, h − (n−1)/r)`.
    pub psi: f64,
    pub ricm: f64,
    /// `f^{n−1}`.
    pub jacobian: f64,
}

fn cone_jet(m: &ModelMetric, r: f64) -> Result<Jet> {
    let (lo, hi) = m.warp.domain();
    if m.kind != MetricKind::Cone || !(r > 0.0) {
        return Err(Error::Domain { t: r, lo, hi });
    }
    let j = m.warp.jet(r)?;
    if !(j.value > 0.0) {
        return Err(Error::Domain { t: r, lo, hi });
    }
    Ok(j)
}

pub fn psi_at(m: &ModelMetric, r: f64) -> Result<PsiSample> {
    let j = cone_jet(m, r)?;
    let k = m.n as f64 - 1.0;
    let h = k * j.d1 / j.value;
    let dh = k * (j.d2 * j.value - j.d1 * j.d1) / (j.value * j.value);
    Ok(PsiSample {
        r,
        h,
        dh,
        psi: (h - k / r).max(0.0),
        ricm: curvature_at(m, r)?.ricm,
        jacobian: j.value.powi(m.n as i32 - 1),
    })
}

fn away_from_knots(m: &ModelMetric, r: f64) -> Result<()> {
    if m.knot_distance(r) < 1e-9 {
        let (lo, hi) = m.warp.domain();
        return Err(Error::Domain { t: r, lo, hi });
    }
    Ok(())
}

/// `ricm − h' − h²/(n−1)`; nonnegative on every cone.
pub fn riccati_residual(m: &ModelMetric, r: f64) -> Result<f64> {
    away_from_knots(m, r)?;
    let s = psi_at(m, r)?;
    Ok(s.ricm - s.dh - s.h * s.h / (m.n as f64 - 1.0))
}

const KINK_GUARD: f64 = 1e-6;

fn excess(m: &ModelMetric, r: f64) -> f64 {
    let j = m.warp.jet_raw(r);
    let k = m.n as f64 - 1.0;
    k * j.d1 / j.value - k / r
}

/// Residuals of the two inequalities satisfied by `Ψ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiResiduals {
    /// `ricm − Ψ' − Ψ²/(n−1) − 2Ψ/r`.
    pub riccati: f64,
    /// `C(ν,n) ricm^{ν/2} J − (Ψ^{ν−1} J)'`.
    pub weighted: f64,
}

pub fn psi_ode_residual(m: &ModelMetric, nu: f64, r: f64) -> Result<PsiResiduals> {
    away_from_knots(m, r)?;
    let c = comparison_constant(nu, m.n)?;
    let s = psi_at(m, r)?;
    let (a, b) = ((r - KINK_GUARD).max(r / 2.0), r + KINK_GUARD);
    let (ea, eb) = (excess(m, a), excess(m, b));
    if (ea > 0.0) != (eb > 0.0) {
        let kink = bracket_root(|x| excess(m, x), a, b, 0.0).unwrap_or(r);
        return Err(Error::Kink { r, kink });
    }
    let k = m.n as f64 - 1.0;
    if s.psi == 0.0 {
        return Ok(PsiResiduals { riccati: s.ricm, weighted: c * s.ricm.powf(nu / 2.0) * s.jacobian });
    }
    let dpsi = s.dh + k / (r * r);
    let riccati = s.ricm - dpsi - s.psi * s.psi / k - 2.0 * s.psi / r;
    let growth = s.psi.powf(nu - 2.0) * s.jacobian * ((nu - 1.0) * dpsi + s.psi * s.h);
    Ok(PsiResiduals { riccati, weighted: c * s.ricm.powf(nu / 2.0) * s.jacobian - growth })
}

/// `σ_{n−1} Ψ(r)^{ν−1} f(r)^{n−1} <= C(ν,n)·I_ν`.
pub fn ide_check(m: &ModelMetric, nu: f64, r: f64, i_nu: f64) -> Result<VerificationReport> {
    let c = comparison_constant(nu, m.n)?;
    psi_ode_residual(m, nu, r)?;
    let s = psi_at(m, r)?;
    let lhs = m.constants().sigma_nm1 * s.psi.powf(nu - 1.0) * s.jacobian;
    let mut rep = VerificationReport::new("ide");
    rep.input("n", m.n).input("nu", nu).input("r", r).input("I_nu", i_nu);
    rep.constant("C", c).tolerance("abs", 1e-8);
    rep.push(Check::le("psi_mass_bound", lhs, c * i_nu, 1e-8));
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_closed_forms() {
        assert!((comparison_constant(4.0, 3).unwrap() - 4.5).abs() < 1e-14);
        let c54 = 2.0 * 0.8f64.powf(2.5) * 27.0;
        assert!((comparison_constant(5.0, 4).unwrap() - c54).abs() < 1e-12);
        assert!(comparison_constant(3.0, 3).is_err());
        assert!(comparison_constant(3.0 + 1e-9, 3).unwrap() > 1e3);
    }

    #[test]
    fn scaling_radius_power_law() {
        let a = scaling_radius(3, 3.5, 1.0).unwrap();
        let b = scaling_radius(3, 3.5, 2.0).unwrap();
        assert!((b / a - 2f64.powf(-2.0)).abs() < 1e-14);
        assert_eq!(scaling_radius(3, 3.5, 0.0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn psi_on_space_forms() {
        let e = psi_at(&ModelMetric::euclidean(3), 2.0).unwrap();
        assert_eq!(e.psi, 0.0);
        assert_eq!(psi_at(&ModelMetric::sphere(3), 1.0).unwrap().psi, 0.0);
        let h = psi_at(&ModelMetric::hyperbolic(3), 1.0).unwrap();
        assert!((h.psi - 2.0 * (1f64.cosh() / 1f64.sinh() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn riccati_is_an_identity_in_constant_curvature() {
        for r in [0.3, 1.0, 4.0] {
            assert!(riccati_residual(&ModelMetric::hyperbolic(3), r).unwrap().abs() < 1e-10);
            assert!(riccati_residual(&ModelMetric::euclidean(4), r).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn kink_is_reported() {
        // For f = t + ε t³(1 − t²/w²)⁴ the excess f'r − f changes sign inside the bump.
        let m = ModelMetric::bump_cone(3, 0.05, 2.0).unwrap();
        let kink = bracket_root(|x| excess(&m, x), 0.5, 1.99, 0.0).unwrap();
        assert!(matches!(psi_ode_residual(&m, 3.5, kink), Err(Error::Kink { .. })));
        assert!(psi_ode_residual(&m, 3.5, kink + 1e-3).is_ok());
    }
}
