use super::{MetricKind, ModelMetric};
use crate::error::{Error, Result};
use crate::profile::Jet;
use crate::report::{Check, VerificationReport};
use serde::{Deserialize, Serialize};

/// Pointwise curvature of a warped product at one value of `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSample {
    /// Sectional curvature of planes containing `∂_t`.
    pub k_rad: f64,
    /// Sectional curvature of planes tangent to the level sphere.
    pub k_tan: f64,
    pub ric_rad: f64,
    pub ric_tan: f64,
    pub scal: f64,
    pub sigma_minus: f64,
    pub ricm: f64,
    pub rho: f64,
}

const ORIGIN_CUTOFF: f64 = 1e-5;

impl CurvatureSample {
    pub fn from_sectional(n: usize, k_rad: f64, k_tan: f64) -> Self {
        let nf = n as f64;
        let ric_rad = (nf - 1.0) * k_rad;
        let ric_tan = k_rad + (nf - 2.0) * k_tan;
        let rho = ric_rad.min(ric_tan);
        // In dimension two there are no tangential planes.
        let lowest = if n == 2 { k_rad } else { k_rad.min(k_tan) };
        CurvatureSample {
            k_rad,
            k_tan,
            ric_rad,
            ric_tan,
            scal: 2.0 * (nf - 1.0) * k_rad + (nf - 1.0) * (nf - 2.0) * k_tan,
            sigma_minus: (-lowest).max(0.0),
            ricm: (-rho).max(0.0),
            rho,
        }
    }

    pub fn from_jet(n: usize, j: Jet) -> Self {
        let k_rad = -j.d2 / j.value;
        let k_tan = (1.0 - j.d1 * j.d1) / (j.value * j.value);
        Self::from_sectional(n, k_rad, k_tan)
    }
}

fn sample(m: &ModelMetric, t: f64, j: Jet) -> Result<CurvatureSample> {
    if m.kind == MetricKind::Cone {
        if t < 0.0 {
            let (lo, hi) = m.warp.domain();
            return Err(Error::Domain { t, lo, hi });
        }
        if t < ORIGIN_CUTOFF {
            let k = -6.0 * m.origin_a3;
            return Ok(CurvatureSample::from_sectional(m.n, k, k));
        }
    }
    if !(j.value > 0.0) {
        let (lo, hi) = m.warp.domain();
        return Err(Error::Domain { t, lo, hi });
    }
    Ok(CurvatureSample::from_jet(m.n, j))
}

/// Curvature at `t` (right limit at knots). Near the origin of a cone the
/// series limit `k = −6a₃` is used.
pub fn curvature_at(m: &ModelMetric, t: f64) -> Result<CurvatureSample> {
    let j = if m.kind == MetricKind::Cone && (0.0..ORIGIN_CUTOFF).contains(&t) {
        Jet::default()
    } else {
        m.warp.jet(t)?
    };
    sample(m, t, j)
}

/// Left-limit curvature at `t`.
pub fn curvature_left(m: &ModelMetric, t: f64) -> Result<CurvatureSample> {
    let j = if m.kind == MetricKind::Cone && (0.0..ORIGIN_CUTOFF).contains(&t) {
        Jet::default()
    } else {
        m.warp.jet_left(t)?
    };
    sample(m, t, j)
}

/// Curvature at `t` multiplied by a scale `s`, together with `ln s`.
/// Away from a cone origin `s = f(t)²`, which keeps the products in the
/// normal floating range where the curvature itself would be subnormal.
pub(crate) fn scaled_curvature_at(m: &ModelMetric, t: f64) -> Result<(CurvatureSample, f64)> {
    if m.kind == MetricKind::Cone && (0.0..ORIGIN_CUTOFF).contains(&t) {
        return Ok((curvature_at(m, t)?, 0.0));
    }
    let j = m.warp.jet(t)?;
    if !(j.value > 0.0) {
        let (lo, hi) = m.warp.domain();
        return Err(Error::Domain { t, lo, hi });
    }
    let s = CurvatureSample::from_sectional(m.n, -j.d2 * j.value, 1.0 - j.d1 * j.d1);
    Ok((s, 2.0 * j.value.ln()))
}

fn area(m: &ModelMetric, r: f64) -> f64 {
    m.constants().sigma_nm1 * m.warp.value(r).powi(m.n as i32 - 1)
}

/// `A''` from the warp derivatives, `A = σ f^{n-1}`.
pub(crate) fn area_second_derivative(m: &ModelMetric, j: Jet) -> f64 {
    let nf = m.n as f64;
    let s = m.constants().sigma_nm1;
    let f = j.value;
    s * (nf - 1.0) * ((nf - 2.0) * f.powi(m.n as i32 - 3) * j.d1 * j.d1 + f.powi(m.n as i32 - 2) * j.d2)
}

/// Second derivative of the level-sphere area by Richardson-extrapolated
/// central differences, staying inside one smooth piece.
pub(crate) fn area_second_derivative_fd(m: &ModelMetric, r: f64) -> f64 {
    let h0 = 0.05f64.min(0.1 * r).min(m.knot_distance(r) / 3.0);
    let d = |h: f64| (area(m, r + h) - 2.0 * area(m, r) + area(m, r - h)) / (h * h);
    let (a, b, c) = (d(h0), d(h0 / 2.0), d(h0 / 4.0));
    let (ab, bc) = ((4.0 * b - a) / 3.0, (4.0 * c - b) / 3.0);
    (16.0 * bc - ab) / 15.0
}

fn check_interior(m: &ModelMetric, r: f64) -> Result<Jet> {
    let (lo, hi) = m.warp.domain();
    if m.kind != MetricKind::Cone || !(r > lo && r < hi) || m.knot_distance(r) < 1e-9 {
        return Err(Error::Domain { t: r, lo, hi });
    }
    m.warp.jet(r)
}

/// Residual of the second-variation formula for the level-sphere area:
/// finite-difference `A''(r)` minus `∫_{S_r}(H² − |II|² − Ric(ν,ν))`,
/// relative to `1 + |A''|`.
pub fn second_variation_residual(m: &ModelMetric, r: f64) -> Result<f64> {
    let j = check_interior(m, r)?;
    let nf = m.n as f64;
    let (f, fp, fpp) = (j.value, j.d1, j.d2);
    let h = (nf - 1.0) * fp / f;
    let ii2 = (nf - 1.0) * (fp / f).powi(2);
    let ric_nn = -(nf - 1.0) * fpp / f;
    let sphere = area(m, r) * (h * h - ii2 - ric_nn);
    let fd = area_second_derivative_fd(m, r);
    Ok((fd - sphere) / (1.0 + sphere.abs()))
}

/// `∫_{S_r}(R_Σ − (n−1)ρ) − A''(r)` relative to the size of its terms;
/// nonnegative for every model metric.
pub fn appu_gap(m: &ModelMetric, r: f64) -> Result<f64> {
    let j = check_interior(m, r)?;
    let nf = m.n as f64;
    let c = CurvatureSample::from_jet(m.n, j);
    let a = area(m, r);
    let scal_sigma = (nf - 1.0) * (nf - 2.0) / (j.value * j.value);
    let lhs = a * scal_sigma - (nf - 1.0) * a * c.rho;
    let a2 = area_second_derivative(m, j);
    let scale = 1.0 + (a * scal_sigma).abs() + ((nf - 1.0) * a * c.rho).abs() + a2.abs();
    Ok((lhs - a2) / scale)
}

/// Second-variation identity and area inequality at each radius; radii
/// within `1e−6` of a knot are skipped and counted.
pub fn second_variation_certificate(m: &ModelMetric, radii: &[f64]) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new("second-variation");
    rep.input("n", m.n).input("metric", m.label.as_str()).input("radii", radii.len());
    rep.tolerance("identity", 1e-7).tolerance("inequality", 1e-8);
    let mut skipped = 0;
    for &r in radii {
        if m.knot_distance(r) < 1e-6 {
            skipped += 1;
            continue;
        }
        let res = second_variation_residual(m, r)?;
        rep.push(Check::close(format!("identity@{r:.6e}"), res, 0.0, 1e-7));
        rep.push(Check::ge(format!("inequality@{r:.6e}"), appu_gap(m, r)?, 0.0, 1e-8));
    }
    rep.constant("skipped_near_knots", skipped as f64);
    Ok(rep)
}
