use super::bubbles::{annulus_lattice, Bubble, BubbleSource, ConformalBubbleMetric};
use super::lemma2::{build_lemma2_metric, lemma2_factor};
use super::lemma2_constant;
use crate::error::{param, Error, Result};
use crate::geometry::{ball_volume, curvature_lp_integral, CurvatureQuantity, DimensionConstants};
use crate::par;
use crate::profile::QuadratureSpec;
use crate::report::{Check, VerificationReport};
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::Arc;

/// Placement of one dyadic scale of the growth schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthScale {
    pub k: usize,
    pub a: f64,
    /// `2^{k+shift}`: bubbles sit in `S <= |x| <= 2S`.
    pub scale: f64,
    /// Outer scale of each capped cone.
    pub outer: f64,
    pub rbar: f64,
    pub centers: Vec<Vec<f64>>,
}

const MAX_SHIFT: i32 = 60;

fn place(n: usize, k: usize, a: f64, scale: f64) -> Option<GrowthScale> {
    let m = a.ceil() as usize;
    let mut s = scale / 10.0;
    while s >= 3.0 {
        let rbar = scale * a.min(1.0).powf(1.0 / n as f64);
        if rbar > 1.0 / s.ln() {
            let centers = annulus_lattice(n, 5.0 * s, scale + 2.5 * s, 2.0 * scale - 2.5 * s, m);
            if centers.len() == m {
                return Some(GrowthScale { k, a, scale, outer: s, rbar, centers });
            }
        }
        s /= 2.0;
    }
    None
}

/// Plans every scale with the smallest common dyadic shift that fits.
fn plan(n: usize, a: &[f64]) -> Result<(i32, Vec<GrowthScale>)> {
    let mut last_bad = 1;
    for shift in 0..=MAX_SHIFT {
        let mut scales = vec![];
        let mut ok = true;
        for (i, &ak) in a.iter().enumerate() {
            if ak == 0.0 {
                continue;
            }
            let k = i + 1;
            match place(n, k, ak, 2f64.powi(k as i32 + shift)) {
                Some(s) => scales.push(s),
                None => {
                    ok = false;
                    last_bad = k;
                    break;
                }
            }
        }
        if ok {
            return Ok((shift, scales));
        }
    }
    Err(Error::Packing { k: last_bad })
}

/// Bubble clusters realizing prescribed volume growth along dyadic radii:
/// at scale `k`, `⌈a_k⌉` capped cones whose hemispheres carry volume at
/// least `(σ_n/2)·a_k·S_kⁿ`.
///
/// Lengths are in units where scale `k` sits at `S_k = 2^{k+shift}`; the
/// report records `shift`, and all certified ratios are scale-free.
pub fn assemble_growth_schedule(
    n: usize,
    a: &[f64],
    spec: &QuadratureSpec,
) -> Result<(ConformalBubbleMetric, VerificationReport)> {
    if n < 3 {
        return param("the growth schedule needs n >= 3");
    }
    if a.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return param("growth weights must be finite and nonnegative");
    }
    let (shift, scales) = plan(n, a)?;
    let models = par::try_map(&scales, |s| {
        let m = build_lemma2_metric(n, s.rbar, s.outer)?;
        let f = lemma2_factor(&m, spec)?;
        Ok(Arc::new(f))
    })?;
    let mut bubbles = vec![];
    let mut owner = vec![];
    for (si, (s, f)) in scales.iter().zip(&models).enumerate() {
        for c in &s.centers {
            bubbles.push(Bubble {
                center: c.clone(),
                support_radius: f.support_radius(),
                factor: f.clone(),
                source: BubbleSource::Lemma2 { rbar: s.rbar, r: s.outer },
            });
            owner.push(si);
        }
    }
    let metric = ConformalBubbleMetric { n, bubbles, punctures: vec![] };

    let dims = DimensionConstants::new(n);
    let c_star = dims.omega_n * (1.0 - 1e-6);
    let mut rep = VerificationReport::new("growth");
    rep.input("n", n).input("a", a.to_vec()).input("K", a.len());
    rep.constant("shift", shift as f64).constant("c", c_star).constant("C2", lemma2_constant(n));
    rep.tolerance("volume_rel", 1e-6).tolerance("quad_rel", spec.rel_tol);

    let per_scale = par::try_map(&models, |f| {
        let integral = curvature_lp_integral(f.model(), n as f64, CurvatureQuantity::SigmaMinus, spec)?;
        Ok(integral)
    })?;
    let (mut total, mut budget) = (0.0, 0.0);
    for (s, v) in scales.iter().zip(&per_scale) {
        let m = s.centers.len() as f64;
        total += m * v;
        budget += m * lemma2_constant(n) * s.outer.ln().powf(1.0 - n as f64 / 2.0);
    }
    rep.constant("curvature_integral", total).constant("curvature_budget", budget);
    rep.push(Check::le("curvature_budget", total, budget, 0.0));
    rep.push(Check::flag("total_curvature_finite", total.is_finite()));
    rep.push(Check::lt("support_disjointness", 0.0, metric.min_gap()));

    let mut worst = f64::INFINITY;
    for (i, &ak) in a.iter().enumerate() {
        if ak == 0.0 {
            continue;
        }
        let k = i + 1;
        let scale = 2f64.powi(k as i32 + shift);
        let mut best = 0f64;
        if let Some(si) = scales.iter().position(|s| s.k == k) {
            let s = &scales[si];
            let idx: Vec<usize> = (0..metric.bubbles.len()).filter(|&j| owner[j] == si).collect();
            let half = PI * s.rbar / 2.0;
            let reach = idx.iter().map(|&j| metric.reach(j, half)).fold(0.0, f64::max);
            if reach <= 20.0 * scale {
                let hemi = ball_volume(models[si].model(), half, spec)?;
                best = best.max(idx.len() as f64 * hemi);
            }
        }
        // Euclidean ball B(o, S): reachable around and through inner bubbles.
        let inner: Vec<usize> =
            (0..metric.bubbles.len()).filter(|&j| metric.bubbles[j].center.iter().map(|x| x * x).sum::<f64>().sqrt() < scale + metric.bubbles[j].support_radius).collect();
        let around = scale + inner.iter().map(|&j| (PI - 2.0) * metric.bubbles[j].support_radius).sum::<f64>();
        let through = inner.iter().map(|&j| metric.reach(j, f64::INFINITY)).fold(0.0, f64::max);
        if around.max(through) <= 20.0 * scale {
            best = best.max(dims.omega_n * scale.powi(n as i32));
        }
        let ck = best / (ak * scale.powi(n as i32));
        worst = worst.min(ck);
        rep.constant(&format!("c_{k}"), ck);
        rep.push(Check::ge(format!("scale_{k}_volume"), ck, c_star, 0.0));
    }
    if worst.is_finite() {
        rep.constant("c_min", worst);
    }
    Ok((metric, rep))
}
