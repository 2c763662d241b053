use super::curvature::scaled_curvature_at;
use super::{MetricKind, ModelMetric};
use crate::error::{param, Error, Result};
use crate::par;
use crate::profile::{geometric_breaks, integrate, integrate_with, Endpoint, QuadratureSpec};
use serde::{Deserialize, Serialize};

/// `f(t)^{n-1}`; the level sphere has area `σ_{n-1}` times this.
pub fn volume_density(m: &ModelMetric, t: f64) -> Result<f64> {
    Ok(m.warp.eval(t, 0)?.powi(m.n as i32 - 1))
}

/// Knots of the warp inside `[a, b]` plus geometric breakpoints so that
/// panels never span more than a factor of two in `|t|` beyond `|t| = 1`.
pub fn integration_breaks(m: &ModelMetric, a: f64, b: f64) -> Vec<f64> {
    let mut out: Vec<f64> = m.knots().iter().copied().filter(|&k| k > a && k < b).collect();
    if b > 1.0 {
        let lo = a.max(1.0);
        out.push(lo);
        out.extend(geometric_breaks(lo, b, 2.0));
    }
    if a < -1.0 {
        let hi = (-b).max(1.0);
        out.push(-hi);
        out.extend(geometric_breaks(hi, -a, 2.0).into_iter().map(|x| -x));
    }
    if a < 0.0 && b > 0.0 {
        out.push(0.0);
    }
    out.retain(|&x| x > a && x < b);
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Volume of the geodesic ball of radius `r` about the origin of a cone.
pub fn ball_volume(m: &ModelMetric, r: f64, spec: &QuadratureSpec) -> Result<f64> {
    if m.kind != MetricKind::Cone {
        return param("ball_volume needs a cone metric");
    }
    let (_, hi) = m.warp.domain();
    if !(r >= 0.0 && r <= hi) {
        return Err(Error::Domain { t: r, lo: 0.0, hi });
    }
    let k = m.n as i32 - 1;
    let breaks = integration_breaks(m, 0.0, r);
    let v = integrate_with(|t| m.warp.value(t).powi(k), 0.0, r, spec, &breaks, Endpoint::PowerLaw(k as f64))?;
    Ok(m.constants().sigma_nm1 * v)
}

/// Volume of `{a <= t <= b}` in a two-ended warped product.
pub fn slab_volume(m: &ModelMetric, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    if m.kind != MetricKind::Line {
        return param("slab_volume needs a line metric");
    }
    if !(a <= b) {
        return param("slab needs a <= b");
    }
    m.warp.jet(a)?;
    m.warp.jet(b)?;
    let k = m.n as i32 - 1;
    let breaks = integration_breaks(m, a, b);
    let v = integrate(|t| m.warp.value(t).powi(k), a, b, spec, &breaks)?;
    Ok(m.constants().sigma_nm1 * v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureQuantity {
    SigmaMinus,
    Ricm,
}

/// `σ_{n-1} ∫ q^{p/2} f^{n-1}` over `[a, b]`.
pub fn curvature_lp_integral_on(
    m: &ModelMetric,
    p: f64,
    which: CurvatureQuantity,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let k = m.n as i32 - 1;
    let g = |t: f64| {
        let Ok((c, ln_scale)) = scaled_curvature_at(m, t) else { return f64::NAN };
        let q = match which {
            CurvatureQuantity::SigmaMinus => c.sigma_minus,
            CurvatureQuantity::Ricm => c.ricm,
        };
        if q == 0.0 {
            0.0
        } else {
            // Log space: for very large bubbles f^{n-1} alone overflows.
            (0.5 * p * (q.ln() - ln_scale) + k as f64 * m.warp.value(t).ln()).exp()
        }
    };
    let breaks = integration_breaks(m, a, b);
    let origin = if m.kind == MetricKind::Cone && a == 0.0 { Endpoint::PowerLaw(k as f64) } else { Endpoint::Regular };
    Ok(m.constants().sigma_nm1 * integrate_with(g, a, b, spec, &breaks, origin)?)
}

/// `∫_M q^{p/2} dv` over the whole metric. Infinite domains need a flat tail.
pub fn curvature_lp_integral(m: &ModelMetric, p: f64, which: CurvatureQuantity, spec: &QuadratureSpec) -> Result<f64> {
    if p < m.n as f64 {
        return param("curvature integrals need p >= n");
    }
    let (lo, hi) = m.warp.domain();
    let upper = match m.flat_from {
        Some(t) => t.min(hi),
        None if hi.is_finite() => hi,
        None => {
            return Err(Error::Convergence { a: lo, b: hi, reason: "no flat tail: curvature does not decay".into() })
        }
    };
    let lower = match m.kind {
        MetricKind::Cone => 0.0,
        MetricKind::Line => match m.flat_from {
            Some(t) => (-t).max(lo),
            None if lo.is_finite() => lo,
            None => return Err(Error::Convergence { a: lo, b: hi, reason: "no flat tail".into() }),
        },
    };
    if upper <= lower {
        return Ok(0.0);
    }
    curvature_lp_integral_on(m, p, which, lower, upper, spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvgRow {
    pub r: f64,
    pub volume: f64,
    /// `volume / (ω_n rⁿ)`.
    pub ratio: f64,
}

/// Ball volumes and their Euclidean ratios over a radius grid.
pub fn evg_report(m: &ModelMetric, radii: &[f64], spec: &QuadratureSpec) -> Result<Vec<EvgRow>> {
    if radii.windows(2).any(|w| !(w[0] < w[1])) || radii.first().is_some_and(|&r| !(r > 0.0)) {
        return param("radii must be positive and increasing");
    }
    let omega = m.constants().omega_n;
    par::try_map(radii, |&r| {
        let volume = ball_volume(m, r, spec)?;
        Ok(EvgRow { r, volume, ratio: volume / (omega * r.powi(m.n as i32)) })
    })
}
