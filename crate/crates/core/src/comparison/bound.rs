use super::{comparison_constant, psi_at, psi_ode_residual, riccati_residual, scaling_radius};
use crate::error::{param, Error, Result};
use crate::geometry::{ball_volume, curvature_at, curvature_lp_integral, CurvatureQuantity, DimensionConstants, ModelMetric};
use crate::par;
use crate::profile::QuadratureSpec;
use crate::report::{Check, VerificationReport};
use serde::Serialize;
use std::sync::Arc;

/// Curvature integrals `I_p = ∫ ricm^{p/2} dv` feeding the volume bound.
#[derive(Debug, Clone)]
pub struct ComparisonInputs {
    pub n: usize,
    /// Exponent in `(n, n+1]`.
    pub nu: f64,
    pub i_n: f64,
    pub i_nu: f64,
    pub metric: Option<Arc<ModelMetric>>,
    spec: QuadratureSpec,
}

fn holder(i_n: f64, i_nu: f64, n: f64, nu: f64, p: f64) -> f64 {
    let eps = (p - n) / (nu - n);
    if eps == 0.0 {
        i_n
    } else if eps == 1.0 {
        i_nu
    } else {
        i_n.powf(1.0 - eps) * i_nu.powf(eps)
    }
}

impl ComparisonInputs {
    /// Inputs without a metric. An exponent above `n+1` is reduced to
    /// `n+1`, with `I_{n+1}` replaced by its interpolation bound.
    pub fn new(n: usize, nu: f64, i_n: f64, i_nu: f64) -> Result<Self> {
        let nf = n as f64;
        if n < 3 {
            return param("comparison needs n >= 3");
        }
        if !(nu > nf) || !nu.is_finite() {
            return param(format!("nu must exceed n, got {nu}"));
        }
        if !(i_n >= 0.0 && i_nu >= 0.0 && i_n.is_finite() && i_nu.is_finite()) {
            return param("curvature integrals must be finite and nonnegative");
        }
        let (nu, i_nu) = if nu > nf + 1.0 { (nf + 1.0, holder(i_n, i_nu, nf, nu, nf + 1.0)) } else { (nu, i_nu) };
        Ok(ComparisonInputs { n, nu, i_n, i_nu, metric: None, spec: QuadratureSpec::default() })
    }

    /// Integrals by quadrature; `ν` is clamped to `n+1`.
    pub fn from_metric(m: &ModelMetric, nu: f64, spec: &QuadratureSpec) -> Result<Self> {
        let nf = m.n as f64;
        if !(nu > nf) {
            return param(format!("nu must exceed n, got {nu}"));
        }
        let nu = nu.min(nf + 1.0);
        let i_n = curvature_lp_integral(m, nf, CurvatureQuantity::Ricm, spec)?;
        let i_nu = curvature_lp_integral(m, nu, CurvatureQuantity::Ricm, spec)?;
        Ok(ComparisonInputs { n: m.n, nu, i_n, i_nu, metric: Some(Arc::new(m.clone())), spec: *spec })
    }

    /// Inputs for the metric `c⁻²g`: `I_p ↦ c^{p−n} I_p`.
    pub fn rescaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return param("scale factor must be positive");
        }
        Ok(ComparisonInputs {
            i_nu: self.i_nu * c.powf(self.nu - self.n as f64),
            metric: self.metric.as_ref().map(|m| Arc::new(m.rescaled(1.0 / c))),
            ..self.clone()
        })
    }

    pub fn scaling_radius(&self) -> Result<f64> {
        scaling_radius(self.n, self.nu, self.i_nu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IpInterpolation {
    pub p: f64,
    /// Direct quadrature, when a metric is attached.
    pub quadrature: Option<f64>,
    /// `I_n^{1−ε} I_ν^ε` with `ε = (p−n)/(ν−n)`.
    pub holder: f64,
}

pub fn interpolate_ip(inputs: &ComparisonInputs, p: f64) -> Result<IpInterpolation> {
    let nf = inputs.n as f64;
    if !(p >= nf && p <= inputs.nu) {
        return param(format!("p must lie in [n, nu] = [{nf}, {}]", inputs.nu));
    }
    let holder = holder(inputs.i_n, inputs.i_nu, nf, inputs.nu, p);
    let quadrature = match (&inputs.metric, p) {
        (None, _) => None,
        (Some(_), p) if p == nf => Some(inputs.i_n),
        (Some(_), p) if p == inputs.nu => Some(inputs.i_nu),
        (Some(m), p) => Some(curvature_lp_integral(m, p, CurvatureQuantity::Ricm, &inputs.spec)?),
    };
    Ok(IpInterpolation { p, quadrature, holder })
}

/// Upper bound for the volume of any geodesic ball of radius `r`.
pub fn theorem_a_bound(inputs: &ComparisonInputs, r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return param(format!("radius must be positive, got {r}"));
    }
    let d = DimensionConstants::new(inputs.n);
    let nf = inputs.n as f64;
    let r0 = inputs.scaling_radius()?;
    let near = 2.0 * d.omega_n * r.powf(nf);
    let rr = r / r0;
    if rr <= 1.0 {
        return Ok(near);
    }
    let jc = (inputs.i_n / d.sigma_nm1).max(1.0);
    let e = std::f64::consts::E;
    let log_term = ((e * rr).ln() / (inputs.nu - nf)).powf(nf / 2.0 - 1.0);
    let far = 2f64.powf(nf) * nf.powf(nf) + 2f64.powf(nf + 1.0) / nf * e * jc * log_term;
    Ok(d.omega_n * r.powf(nf) * far)
}

fn sample_sign_bounds(m: &ModelMetric, radii: &[f64]) -> Result<(f64, f64)> {
    let (mut rad, mut tan) = (f64::INFINITY, f64::INFINITY);
    let hi = radii.iter().copied().fold(0.0, f64::max);
    let dense = (0..=400).map(|i| hi * i as f64 / 400.0);
    for t in dense.chain(radii.iter().copied()) {
        let c = curvature_at(m, t)?;
        rad = rad.min(c.ric_rad);
        tan = tan.min(c.ric_tan);
    }
    Ok((rad, tan))
}

/// `vol B(r) <= ω_n rⁿ` with `vol B(r)/rⁿ` nonincreasing, on a cone with
/// nonnegative Ricci curvature.
pub fn bishop_gromov_check(m: &ModelMetric, radii: &[f64], spec: &QuadratureSpec) -> Result<VerificationReport> {
    if radii.is_empty() || radii.windows(2).any(|w| !(w[0] < w[1])) || !(radii[0] > 0.0) {
        return param("radii must be positive and increasing");
    }
    let (rad, tan) = sample_sign_bounds(m, radii)?;
    if rad < -1e-12 || tan < -1e-12 {
        return Err(Error::Hypothesis(format!(
            "Ricci curvature is not nonnegative (min radial {rad:.3e}, min tangential {tan:.3e})"
        )));
    }
    let d = m.constants();
    let nf = m.n as f64;
    let vols = par::try_map(radii, |&r| ball_volume(m, r, spec))?;
    let ratios: Vec<f64> = vols.iter().zip(radii).map(|(v, r)| v / (d.omega_n * r.powf(nf))).collect();
    let mut rep = VerificationReport::new("bishop");
    rep.input("n", m.n).input("metric", m.label.clone()).input("radii", radii.to_vec());
    rep.constant("omega_n", d.omega_n).constant("min_ric_rad", rad).constant("min_ric_tan", tan);
    rep.tolerance("slack", 1e-8);
    for (r, q) in radii.iter().zip(&ratios) {
        rep.push(Check::le(format!("ratio_at_most_one@{r:.6e}"), *q, 1.0, 1e-8));
    }
    for (w, r) in ratios.windows(2).zip(&radii[1..]) {
        rep.push(Check::le(format!("ratio_nonincreasing@{r:.6e}"), w[1], w[0], 1e-8));
    }
    Ok(rep)
}

fn residual_radii(m: &ModelMetric, count: usize) -> Vec<f64> {
    let top = 2.0 * m.flat_from.filter(|&t| t > 0.0).or_else(|| m.knots().last().copied()).unwrap_or(5.0);
    let lo = top * 1e-4;
    (0..count).map(|i| lo * (top / lo).powf(i as f64 / (count - 1) as f64)).collect()
}

#[derive(Debug, Default, Clone, Copy)]
struct ResidualSweep {
    riccati: f64,
    psi_riccati: f64,
    weighted: f64,
    ide_lhs: f64,
    used: usize,
    skipped: usize,
}

fn sweep(m: &ModelMetric, nu: f64, radii: &[f64]) -> Result<ResidualSweep> {
    let rows = par::map(radii, |&r| -> Result<Option<(f64, f64, f64, f64)>> {
        if m.knot_distance(r) < 1e-6 {
            return Ok(None);
        }
        let rr = riccati_residual(m, r)?;
        let res = match psi_ode_residual(m, nu, r) {
            Err(Error::Kink { .. }) => return Ok(None),
            other => other?,
        };
        let s = psi_at(m, r)?;
        let ide = m.constants().sigma_nm1 * s.psi.powf(nu - 1.0) * s.jacobian;
        Ok(Some((rr, res.riccati, res.weighted, ide)))
    });
    let mut out = ResidualSweep {
        riccati: f64::INFINITY,
        psi_riccati: f64::INFINITY,
        weighted: f64::INFINITY,
        ..Default::default()
    };
    for row in rows {
        match row? {
            None => out.skipped += 1,
            Some((a, b, c, d)) => {
                out.riccati = out.riccati.min(a);
                out.psi_riccati = out.psi_riccati.min(b);
                out.weighted = out.weighted.min(c);
                out.ide_lhs = out.ide_lhs.max(d);
                out.used += 1;
            }
        }
    }
    Ok(out)
}

/// The full comparison pipeline on one cone: residuals of the Riccati and
/// weighted inequalities, the mass bound for `Ψ`, measured ball volumes
/// against the bound at `radii`, and scale equivariance of the bound.
pub fn thm_a_certificate(
    m: &ModelMetric,
    nu: f64,
    radii: &[f64],
    spec: &QuadratureSpec,
) -> Result<VerificationReport> {
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0)) {
        return param("radii must be positive");
    }
    let inputs = ComparisonInputs::from_metric(m, nu, spec)?;
    let c = comparison_constant(inputs.nu, m.n)?;
    let r0 = inputs.scaling_radius()?;
    let mut rep = VerificationReport::new("thm-a");
    rep.input("n", m.n).input("nu", nu).input("metric", m.label.clone()).input("radii", radii.to_vec());
    rep.constant("nu_used", inputs.nu)
        .constant("C", c)
        .constant("I_n", inputs.i_n)
        .constant("I_nu", inputs.i_nu)
        .constant("R0", r0);
    rep.tolerance("residual", 1e-7).tolerance("ide", 1e-8).tolerance("equivariance_rel", 1e-9);

    let sw = sweep(m, inputs.nu, &residual_radii(m, 100))?;
    rep.constant("residual_radii_used", sw.used as f64).constant("residual_radii_skipped", sw.skipped as f64);
    rep.push(Check::ge("riccati_residual", sw.riccati, 0.0, 1e-7));
    rep.push(Check::ge("psi_riccati_residual", sw.psi_riccati, 0.0, 1e-7));
    rep.push(Check::ge("weighted_residual", sw.weighted, 0.0, 1e-7));
    rep.push(Check::le("psi_mass_bound", sw.ide_lhs, c * inputs.i_nu, 1e-8));

    let vols = par::try_map(radii, |&r| ball_volume(m, r, spec))?;
    for (&r, v) in radii.iter().zip(&vols) {
        let b = theorem_a_bound(&inputs, r)?;
        rep.push(Check::le(format!("volume_bound@{r:.6e}"), *v, b, 0.0));
    }

    let mut worst = 0f64;
    for k in [0.5, 2.0, 10.0] {
        let scaled = ComparisonInputs::from_metric(&m.rescaled(1.0 / k), nu, spec)?;
        for &r in radii {
            let a = theorem_a_bound(&inputs, r)?;
            let b = k.powi(m.n as i32) * theorem_a_bound(&scaled, r / k)?;
            worst = worst.max((a - b).abs() / a);
        }
    }
    rep.push(Check::le("scale_equivariance", worst, 1e-9, 0.0));
    Ok(rep)
}
