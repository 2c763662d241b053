use super::conformal::{factor_diagnostics, ConformalFactor};
use super::lemma1::{build_lemma1_metric, conformal_factor_profile};
use super::lemma2::{build_lemma2_metric, lemma2_factor};
use super::{lemma1_constant, thm_b_constant};
use crate::error::{param, Error, Result};
use crate::geometry::{ball_volume, curvature_at, curvature_lp_integral, CurvatureQuantity};
use crate::par;
use crate::profile::{Profile, QuadratureSpec};
use crate::report::{Check, VerificationReport};
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BubbleSource {
    /// Two-ended model; the bubble center is a puncture.
    Lemma1 { r: f64 },
    /// Capped cone with cap radius `rbar` and outer scale `r`.
    Lemma2 { rbar: f64, r: f64 },
}

#[derive(Debug, Clone)]
pub struct Bubble {
    pub center: Vec<f64>,
    pub support_radius: f64,
    pub factor: Arc<ConformalFactor>,
    pub source: BubbleSource,
}

impl Bubble {
    pub fn factor_profile(&self) -> Profile {
        self.factor.profile()
    }

    fn norm(&self) -> f64 {
        norm(&self.center)
    }
}

/// Euclidean `ℝⁿ` with disjoint radial conformal bumps `e^{2f}|dx|²`.
#[derive(Debug, Clone)]
pub struct ConformalBubbleMetric {
    pub n: usize,
    pub bubbles: Vec<Bubble>,
    /// Indices of bubbles whose center is removed from the manifold.
    pub punctures: Vec<usize>,
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// Distance from `p` to the segment `[0, q]`.
fn dist_to_segment(p: &[f64], q: &[f64]) -> f64 {
    let qq: f64 = q.iter().map(|v| v * v).sum();
    let s = if qq == 0.0 { 0.0 } else { (p.iter().zip(q).map(|(a, b)| a * b).sum::<f64>() / qq).clamp(0.0, 1.0) };
    p.iter().zip(q).map(|(a, b)| (a - s * b).powi(2)).sum::<f64>().sqrt()
}

impl ConformalBubbleMetric {
    pub fn euclidean(n: usize) -> Self {
        ConformalBubbleMetric { n, bubbles: vec![], punctures: vec![] }
    }

    /// `min_{i<j} |x_i − x_j| − ρ_i − ρ_j`; infinite with fewer than two bubbles.
    pub fn min_gap(&self) -> f64 {
        let mut g = f64::INFINITY;
        for (i, a) in self.bubbles.iter().enumerate() {
            for b in &self.bubbles[i + 1..] {
                g = g.min(dist(&a.center, &b.center) - a.support_radius - b.support_radius);
            }
        }
        g
    }

    pub fn is_disjoint(&self) -> bool {
        self.min_gap() > 0.0
    }

    /// Extra length, over the straight segment from the origin to `x`, of a
    /// path that goes around every support the segment enters: half a great
    /// circle instead of a diameter.
    pub fn detour(&self, x: &[f64], skip: Option<usize>) -> f64 {
        self.bubbles
            .iter()
            .enumerate()
            .filter(|&(j, b)| Some(j) != skip && dist_to_segment(&b.center, x) < b.support_radius)
            .map(|(_, b)| (PI - 2.0) * b.support_radius)
            .sum()
    }

    /// Upper bound on the distance from the origin to every point of
    /// bubble `i` whose model parameter is at most `t`.
    pub fn reach(&self, i: usize, t: f64) -> f64 {
        let b = &self.bubbles[i];
        let r_star = b.factor.tail_start();
        b.norm() + self.detour(&b.center, Some(i)) + r_star + t.min(r_star)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldSample {
    pub f: f64,
    pub sigma_minus: f64,
    pub ricm: f64,
    pub bubble: Option<usize>,
}

/// Conformal exponent and pulled-back curvature at `x`.
pub fn eval_bubble_field(c: &ConformalBubbleMetric, x: &[f64]) -> Result<FieldSample> {
    if x.len() != c.n {
        return param(format!("point has {} coordinates, metric has dimension {}", x.len(), c.n));
    }
    for (i, b) in c.bubbles.iter().enumerate() {
        let d = dist(x, &b.center);
        if d >= b.support_radius {
            continue;
        }
        if d == 0.0 && c.punctures.contains(&i) {
            return Err(Error::Puncture { index: i });
        }
        let t = b.factor.t_of_r(d)?;
        let f = b.factor.phi(d)?.value;
        let k = curvature_at(b.factor.model(), t)?;
        return Ok(FieldSample { f, sigma_minus: k.sigma_minus, ricm: k.ricm, bubble: Some(i) });
    }
    Ok(FieldSample { f: 0.0, sigma_minus: 0.0, ricm: 0.0, bubble: None })
}

/// `⌈(log R)^{n/2−1}⌉`.
pub fn thm_b_bubble_count(n: usize, r: f64) -> usize {
    r.ln().powf(n as f64 / 2.0 - 1.0).ceil().max(1.0) as usize
}

/// Points of the cubic lattice `pitch·ℤⁿ` with `inner <= |x| <= outer`,
/// in lexicographic order, at most `need` of them.
pub(crate) fn annulus_lattice(n: usize, pitch: f64, inner: f64, outer: f64, need: usize) -> Vec<Vec<f64>> {
    #[allow(clippy::too_many_arguments)]
    fn walk(
        prefix: &mut Vec<i64>,
        sq: f64,
        n: usize,
        m: i64,
        pitch: f64,
        bounds: (f64, f64),
        need: usize,
        out: &mut Vec<Vec<f64>>,
    ) {
        if out.len() >= need {
            return;
        }
        if prefix.len() == n {
            if sq >= bounds.0 * bounds.0 {
                out.push(prefix.iter().map(|&z| z as f64 * pitch).collect());
            }
            return;
        }
        for z in -m..=m {
            let s = sq + (z as f64 * pitch).powi(2);
            if s > bounds.1 * bounds.1 {
                continue;
            }
            prefix.push(z);
            walk(prefix, s, n, m, pitch, bounds, need, out);
            prefix.pop();
            if out.len() >= need {
                return;
            }
        }
    }
    let mut out = vec![];
    if need == 0 || !(outer >= inner) {
        return out;
    }
    let m = (outer / pitch).floor() as i64;
    walk(&mut vec![], 0.0, n, m, pitch, (inner, outer), need, &mut out);
    out
}

/// `N(R)` capped cones of cap radius `R` and outer scale `√R` on a lattice
/// of pitch `5√R` inside `R + 2√R <= |x| <= 4R − 2√R`.
pub fn assemble_thm_b(n: usize, r: f64, spec: &QuadratureSpec) -> Result<ConformalBubbleMetric> {
    if !(r >= 9.0) || !r.is_finite() {
        return param(format!("the multi-bubble metric needs R >= 9, got {r}"));
    }
    let s = r.sqrt();
    let count = thm_b_bubble_count(n, r);
    let centers = annulus_lattice(n, 5.0 * s, r + 2.0 * s, 4.0 * r - 2.0 * s, count);
    if centers.len() < count {
        return Err(Error::Packing { k: centers.len() });
    }
    let model = build_lemma2_metric(n, r, s)?;
    let factor = Arc::new(lemma2_factor(&model, spec)?);
    let bubbles = centers
        .into_iter()
        .map(|center| Bubble {
            center,
            support_radius: factor.support_radius(),
            factor: factor.clone(),
            source: BubbleSource::Lemma2 { rbar: r, r: s },
        })
        .collect();
    Ok(ConformalBubbleMetric { n, bubbles, punctures: vec![] })
}

/// Per-bubble `∫σ₋^{n/2}`, computed once per distinct factor and summed in
/// index order.
fn bubble_integrals(c: &ConformalBubbleMetric, spec: &QuadratureSpec) -> Result<Vec<f64>> {
    let mut distinct: Vec<Arc<ConformalFactor>> = vec![];
    let index: Vec<usize> = c
        .bubbles
        .iter()
        .map(|b| match distinct.iter().position(|d| Arc::ptr_eq(d, &b.factor)) {
            Some(i) => i,
            None => {
                distinct.push(b.factor.clone());
                distinct.len() - 1
            }
        })
        .collect();
    let values = par::try_map(&distinct, |f| {
        curvature_lp_integral(f.model(), c.n as f64, CurvatureQuantity::SigmaMinus, spec)
    })?;
    Ok(index.into_iter().map(|i| values[i]).collect())
}

pub fn thm_b_certificate(n: usize, r: f64, spec: &QuadratureSpec) -> Result<VerificationReport> {
    let c = assemble_thm_b(n, r, spec)?;
    let dims = crate::geometry::DimensionConstants::new(n);
    let count = thm_b_bubble_count(n, r);
    let s = r.sqrt();
    let mut rep = VerificationReport::new("thm-b");
    rep.input("n", n).input("R", r);
    rep.constant("N", count as f64).constant("CB", thm_b_constant(n));
    rep.tolerance("volume_rel", 1e-6).tolerance("quad_rel", spec.rel_tol);
    for (i, b) in c.bubbles.iter().enumerate() {
        for (k, x) in b.center.iter().enumerate() {
            rep.constant(&format!("center_{i}_{k}"), *x);
        }
    }

    let integrals = bubble_integrals(&c, spec)?;
    let total: f64 = integrals.iter().sum();
    rep.constant("curvature_integral", total);
    rep.push(Check::le("total_curvature_integral", total, thm_b_constant(n), 0.0));

    let mut volume = 0.0;
    let mut reach = 0f64;
    for (i, b) in c.bubbles.iter().enumerate() {
        volume += ball_volume(b.factor.model(), PI * r / 2.0, spec)?;
        reach = reach.max(c.reach(i, PI * r / 2.0));
    }
    let target = count as f64 * dims.sigma_n / 2.0 * r.powi(n as i32);
    rep.constant("hemisphere_volume_sum", volume);
    rep.push(Check::ge("volume_lower_bound", volume, target * (1.0 - 1e-6), 0.0));
    rep.push(Check::le("hemispheres_within_20R", reach, 20.0 * r, 0.0));
    rep.push(Check::flag("bubble_count", c.bubbles.len() == count));
    rep.push(Check::lt("support_disjointness", 0.0, c.min_gap()));
    let mut sep = f64::INFINITY;
    for (i, a) in c.bubbles.iter().enumerate() {
        for b in &c.bubbles[i + 1..] {
            sep = sep.min(dist(&a.center, &b.center));
        }
    }
    if c.bubbles.len() > 1 {
        rep.push(Check::lt("center_separation", 4.0 * s, sep));
    }
    let widest = c.bubbles.iter().map(|b| b.support_radius).fold(0.0, f64::max);
    rep.push(Check::le("support_within_sqrt_R", widest, s, 0.0));
    Ok(rep)
}

/// Scales of the puncture sequence: `log R_k = β k^q`, `q = 4/(n−2)`,
/// truncated where `R_k` would leave the floating range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThmCSchedule {
    pub requested: usize,
    pub radii: Vec<f64>,
    pub beta: f64,
    pub q: f64,
    pub truncated: bool,
}

/// Largest exponent accepted for `log R_k`.
const LOG_RANGE: f64 = 700.0;

pub fn thm_c_schedule(n: usize, k: usize) -> Result<ThmCSchedule> {
    if n < 3 {
        return param("the puncture sequence needs n >= 3");
    }
    if k == 0 {
        return param("need at least one bubble");
    }
    let beta = 2f64.max(3f64.ln());
    let q = 4.0 / (n as f64 - 2.0);
    let mut radii = vec![];
    for i in 1..=k {
        let e = beta * (i as f64).powf(q);
        if e > LOG_RANGE {
            break;
        }
        radii.push(e.exp());
    }
    Ok(ThmCSchedule { requested: k, truncated: radii.len() < k, radii, beta, q })
}

/// Collinear two-ended bubbles, one per scale of the schedule, each
/// puncturing `ℝⁿ` at its center.
pub fn assemble_thm_c(n: usize, k: usize, spec: &QuadratureSpec) -> Result<(ConformalBubbleMetric, ThmCSchedule)> {
    let sched = thm_c_schedule(n, k)?;
    let factors = par::try_map(&sched.radii, |&r| {
        let m = build_lemma1_metric(n, r)?;
        conformal_factor_profile(&m, spec)
    })?;
    let mut bubbles = vec![];
    let mut x = 0.0;
    for (i, (f, &r)) in factors.into_iter().zip(&sched.radii).enumerate() {
        if i > 0 {
            let prev = sched.radii[i - 1];
            x += 2.0 * (prev + r) * (1.0 + 1e-9) + 1.0;
        }
        let mut center = vec![0.0; n];
        center[0] = x;
        bubbles.push(Bubble { center, support_radius: f.support_radius(), factor: Arc::new(f), source: BubbleSource::Lemma1 { r } });
    }
    let punctures = (0..bubbles.len()).collect();
    Ok((ConformalBubbleMetric { n, bubbles, punctures }, sched))
}

pub fn thm_c_certificate(n: usize, k: usize, spec: &QuadratureSpec) -> Result<VerificationReport> {
    let (c, sched) = assemble_thm_c(n, k, spec)?;
    let c1 = lemma1_constant(n);
    let mut rep = VerificationReport::new("thm-c");
    rep.input("n", n).input("K", k);
    rep.constant("beta", sched.beta)
        .constant("q", sched.q)
        .constant("C1", c1)
        .constant("bubbles_built", sched.radii.len() as f64)
        .constant("truncated", if sched.truncated { 1.0 } else { 0.0 });
    rep.tolerance("quad_rel", spec.rel_tol);

    let integrals = bubble_integrals(&c, spec)?;
    let h = n as f64 / 2.0 - 1.0;
    let mut partial = 0.0;
    let mut budget = 0.0;
    for (i, (&v, &r)) in integrals.iter().zip(&sched.radii).enumerate() {
        partial += v;
        budget += c1 * r.ln().powf(-h);
        rep.push(Check::le(format!("bubble_{}_integral_ratio", i + 1), v * r.ln().powf(h), c1, 0.0));
    }
    let built = sched.radii.len() as f64;
    // Σ_{k>K}(βk^q)^{−h} <= β^{−h}∫_K^∞ x^{−qh} dx with qh = 2.
    let tail = c1 * sched.beta.powf(-h) / built;
    rep.constant("partial_sum", partial).constant("tail_bound", tail);
    rep.push(Check::le("partial_sum_within_budget", partial, budget, 0.0));
    rep.push(Check::flag("total_bound_finite", (partial + tail).is_finite()));
    rep.push(Check::ge("first_scale_at_least_3", sched.radii[0], 3.0, 0.0));

    for w in c.bubbles.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let (ra, rb) = match (a.source, b.source) {
            (BubbleSource::Lemma1 { r: x }, BubbleSource::Lemma1 { r: y }) => (x, y),
            _ => unreachable!("puncture bubbles are two-ended"),
        };
        let d = dist(&a.center, &b.center);
        rep.push(Check::lt("center_gap", 2.0 * (ra + rb), d));
    }
    rep.push(Check::lt("support_disjointness", 0.0, c.min_gap()));

    let diags = par::try_map(&c.bubbles, |b| factor_diagnostics(&b.factor, 200, spec))?;
    for (i, (b, d)) in c.bubbles.iter().zip(&diags).enumerate() {
        let neck = b.factor.model().warp.value(0.0);
        rep.push(Check::lt(format!("puncture_{}_completeness", i + 1), 0.0, d.min_scaled_radius));
        rep.push(Check::ge(format!("puncture_{}_neck_bound", i + 1), d.min_scaled_radius, neck, 1e-9 * neck));
        rep.push(Check::ge(format!("puncture_{}_phi_nonnegative", i + 1), d.min_phi, 0.0, 1e-12));
    }
    Ok(rep)
}
