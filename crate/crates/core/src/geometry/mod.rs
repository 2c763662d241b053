//! Warped-product model metrics `dt² + f(t)² dθ²`.
//!
//! A [`ModelMetric`] of kind [`MetricKind::Cone`] lives on `ℝⁿ` with `t` the
//! distance to the origin; kind [`MetricKind::Line`] lives on `ℝ × S^{n-1}`.

mod constants;
mod curvature;
mod volume;

pub use constants::{gamma_half, sphere_volume, DimensionConstants};
pub(crate) use curvature::area_second_derivative;
pub use curvature::{
    appu_gap, curvature_at, curvature_left, second_variation_certificate, second_variation_residual, CurvatureSample,
};
pub use volume::{
    ball_volume, curvature_lp_integral, curvature_lp_integral_on, evg_report, integration_breaks, slab_volume,
    volume_density, CurvatureQuantity, EvgRow,
};

use crate::error::{param, Result};
use crate::profile::{Jet, PieceFn, Profile};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Cone,
    Line,
}

#[derive(Debug, Clone)]
pub struct ModelMetric {
    pub n: usize,
    pub kind: MetricKind,
    pub warp: Profile,
    /// Cubic coefficient of the warp at the origin (`f = t + a₃t³ + …`).
    pub origin_a3: f64,
    /// Curvature vanishes identically for `|t| >= flat_from`.
    pub flat_from: Option<f64>,
    pub label: String,
}

/// One polynomial piece `Σ c_k t^k` starting at `start`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyPiece {
    pub start: f64,
    pub coeffs: Vec<f64>,
}

fn poly_jet(c: &[f64], t: f64) -> Jet {
    let (mut v, mut d1, mut d2) = (0.0, 0.0, 0.0);
    for &ck in c.iter().rev() {
        d2 = d2 * t + 2.0 * d1;
        d1 = d1 * t + v;
        v = v * t + ck;
    }
    Jet::new(v, d1, d2)
}

impl ModelMetric {
    pub fn cone(n: usize, warp: Profile, origin_a3: f64, flat_from: Option<f64>, label: &str) -> Result<Self> {
        if n < 2 {
            return param("dimension must be at least 2");
        }
        let j = warp.jet(0.0)?;
        if j.value.abs() > 1e-12 || (j.d1 - 1.0).abs() > 1e-9 {
            return param("cone warp must satisfy f(0) = 0, f'(0) = 1");
        }
        Ok(ModelMetric { n, kind: MetricKind::Cone, warp, origin_a3, flat_from, label: label.into() })
    }

    pub fn line(n: usize, warp: Profile, flat_from: Option<f64>, label: &str) -> Result<Self> {
        if n < 2 {
            return param("dimension must be at least 2");
        }
        Ok(ModelMetric { n, kind: MetricKind::Line, warp, origin_a3: 0.0, flat_from, label: label.into() })
    }

    pub fn constants(&self) -> DimensionConstants {
        DimensionConstants::new(self.n)
    }

    pub fn euclidean(n: usize) -> Self {
        Self::cone(n, Profile::identity(0.0, f64::INFINITY), 0.0, Some(0.0), "euclidean").unwrap()
    }

    /// Round unit sphere; the warp lives on `[0, π]`.
    pub fn sphere(n: usize) -> Self {
        let w = Profile::smooth(0.0, std::f64::consts::PI, |t| Jet::new(t.sin(), t.cos(), -t.sin()));
        Self::cone(n, w, -1.0 / 6.0, None, "sphere").unwrap()
    }

    pub fn hyperbolic(n: usize) -> Self {
        let w = Profile::smooth(0.0, f64::INFINITY, |t| Jet::new(t.sinh(), t.cosh(), t.sinh()));
        Self::cone(n, w, 1.0 / 6.0, None, "hyperbolic").unwrap()
    }

    /// Hyperbolic on `[0, t_hyp]`, then a `C¹` transition on `[t_hyp, t_end]`
    /// with `f'` decreasing quadratically to 1, then a flat cone.
    pub fn truncated_hyperbolic(n: usize, t_hyp: f64, t_end: f64) -> Result<Self> {
        if !(t_hyp > 0.0 && t_end > t_hyp) {
            return param("need 0 < t_hyp < t_end");
        }
        let w = t_end - t_hyp;
        let (s0, c0) = (t_hyp.sinh(), t_hyp.cosh());
        let k = c0 - 1.0;
        let mid = move |t: f64| {
            let u = (t - t_hyp) / w;
            let v = s0 + (t - t_hyp) + k * w * (1.0 - (1.0 - u).powi(3)) / 3.0;
            Jet::new(v, 1.0 + k * (1.0 - u).powi(2), -2.0 * k * (1.0 - u) / w)
        };
        let f_end = mid(t_end).value;
        let pieces: Vec<PieceFn> = vec![
            Arc::new(|t: f64| Jet::new(t.sinh(), t.cosh(), t.sinh())),
            Arc::new(mid),
            Arc::new(move |t: f64| Jet::new(f_end + (t - t_end), 1.0, 0.0)),
        ];
        let warp = Profile::new(0.0, f64::INFINITY, vec![t_hyp, t_end], pieces, 2, 1)?;
        Self::cone(n, warp, 1.0 / 6.0, Some(t_end), "truncated_hyperbolic")
    }

    /// `f(r) = asinh r = ∫₀^r (1+s²)^{-1/2} ds`, a nonnegatively curved cone.
    pub fn asinh_cone(n: usize) -> Self {
        let w = Profile::smooth(0.0, f64::INFINITY, |t| {
            let q = (1.0 + t * t).sqrt();
            Jet::new(t.asinh(), 1.0 / q, -t / (q * q * q))
        });
        Self::cone(n, w, -1.0 / 6.0, None, "asinh_cone").unwrap()
    }

    /// Cone whose warp is polynomial on each piece; the last piece extends
    /// to infinity.
    pub fn polynomial_cone(n: usize, pieces: &[PolyPiece], label: &str) -> Result<Self> {
        if pieces.is_empty() || pieces[0].start != 0.0 {
            return param("first polynomial piece must start at 0");
        }
        let c0 = &pieces[0].coeffs;
        let coef = |c: &Vec<f64>, k: usize| c.get(k).copied().unwrap_or(0.0);
        if coef(c0, 0) != 0.0 || coef(c0, 1) != 1.0 || coef(c0, 2) != 0.0 {
            return param("cone warp must start as t + O(t³)");
        }
        let knots: Vec<f64> = pieces[1..].iter().map(|p| p.start).collect();
        let fns: Vec<PieceFn> = pieces
            .iter()
            .map(|p| {
                let c = p.coeffs.clone();
                Arc::new(move |t: f64| poly_jet(&c, t)) as PieceFn
            })
            .collect();
        let warp = Profile::new(0.0, f64::INFINITY, knots.clone(), fns, 2, 1)?;
        if warp.knot_mismatch() > 1e-9 {
            return param("polynomial pieces must join with matching value and slope");
        }
        let last = &pieces[pieces.len() - 1];
        let flat = (1..last.coeffs.len()).all(|k| if k == 1 { last.coeffs[1] == 1.0 } else { last.coeffs[k] == 0.0 });
        let flat_from = if flat { Some(last.start) } else { None };
        let hi = knots.last().copied().unwrap_or(1.0) * 2.0 + 1.0;
        for i in 1..=2000 {
            let t = hi * i as f64 / 2000.0;
            if warp.value(t) <= 0.0 {
                return param(format!("warp is not positive at t = {t}"));
            }
        }
        Self::cone(n, warp, coef(c0, 3), flat_from, label)
    }

    /// `f = t + ε t³ (1 − t²/w²)⁴` on `[0, w]`, then `f = t`.
    pub fn bump_cone(n: usize, eps: f64, w: f64) -> Result<Self> {
        if !(w > 0.0) {
            return param("bump width must be positive");
        }
        let (w2, w4, w6, w8) = (w * w, w.powi(4), w.powi(6), w.powi(8));
        let coeffs = vec![0.0, 1.0, 0.0, eps, 0.0, -4.0 * eps / w2, 0.0, 6.0 * eps / w4, 0.0, -4.0 * eps / w6, 0.0, eps / w8];
        let pieces = [PolyPiece { start: 0.0, coeffs }, PolyPiece { start: w, coeffs: vec![0.0, 1.0] }];
        Self::polynomial_cone(n, &pieces, "bump_cone")
    }

    /// The metric scaled by `c²`: warp `t ↦ c·f(t/c)`.
    pub fn rescaled(&self, c: f64) -> Self {
        ModelMetric {
            n: self.n,
            kind: self.kind,
            warp: self.warp.rescaled(c),
            origin_a3: self.origin_a3 / (c * c),
            flat_from: self.flat_from.map(|t| t * c),
            label: self.label.clone(),
        }
    }

    pub fn knots(&self) -> &[f64] {
        self.warp.knots()
    }

    /// Distance from `t` to the nearest knot (infinite without knots).
    pub fn knot_distance(&self, t: f64) -> f64 {
        self.knots().iter().map(|k| (k - t).abs()).fold(f64::INFINITY, f64::min)
    }
}

/// Rescales a metric; see [`ModelMetric::rescaled`].
pub fn rescale_metric(m: &ModelMetric, c: f64) -> Result<ModelMetric> {
    if !(c > 0.0) {
        return param("scale factor must be positive");
    }
    Ok(m.rescaled(c))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_evaluation() {
        let j = poly_jet(&[1.0, 2.0, 3.0], 2.0);
        assert_eq!(j, Jet::new(17.0, 14.0, 6.0));
    }

    #[test]
    fn truncated_hyperbolic_is_c1() {
        let m = ModelMetric::truncated_hyperbolic(3, 4.0, 5.0).unwrap();
        assert!(m.warp.knot_mismatch() < 1e-12);
        assert_eq!(m.warp.jet(6.0).unwrap().d1, 1.0);
    }

    #[test]
    fn bump_cone_joins_smoothly() {
        let m = ModelMetric::bump_cone(3, 0.05, 2.0).unwrap();
        assert!(m.warp.with_smoothness(2).knot_mismatch() < 1e-12);
        assert_eq!(m.flat_from, Some(2.0));
        assert_eq!(m.origin_a3, 0.05);
    }

    #[test]
    fn polynomial_cone_rejects_bad_origin() {
        let p = [PolyPiece { start: 0.0, coeffs: vec![0.0, 2.0] }];
        assert!(ModelMetric::polynomial_cone(3, &p, "x").is_err());
        let q = [PolyPiece { start: 0.0, coeffs: vec![0.0, 1.0] }, PolyPiece { start: 1.0, coeffs: vec![0.5, 1.0] }];
        assert!(ModelMetric::polynomial_cone(3, &q, "x").is_err());
    }

    #[test]
    fn rescale_rejects_nonpositive() {
        assert!(rescale_metric(&ModelMetric::euclidean(3), 0.0).is_err());
    }
}
