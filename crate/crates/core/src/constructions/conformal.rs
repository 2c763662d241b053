use crate::error::{Error, Result};
use crate::geometry::{integration_breaks, MetricKind, ModelMetric};
use crate::profile::{bracket_root, integrate, integrate_ode, Jet, OdeSolution, PieceFn, Profile, QuadratureSpec};
use std::sync::Arc;

/// The conformal factor that realizes a warped model as a radial bump on
/// Euclidean space: `e^φ·r = f(t)` and `e^φ dr = dt`, with `φ = 0` once the
/// warp has slope one.
///
/// For a cone the model origin maps to `r = 0`; for a two-ended model the
/// end `t → −∞` maps to a puncture at `r = 0`.
#[derive(Clone)]
pub struct ConformalFactor {
    model: Arc<ModelMetric>,
    t_lo: f64,
    t_hi: f64,
    sol: Arc<OdeSolution<1>>,
    phi_lo: f64,
    f_lo: f64,
    /// `ln r` at `t_lo`; the radius itself underflows for large models.
    ln_r_lo: f64,
    support: f64,
}

impl std::fmt::Debug for ConformalFactor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConformalFactor")
            .field("model", &self.model.label)
            .field("t_range", &(self.t_lo, self.t_hi))
            .field("support", &self.support)
            .finish()
    }
}

const ORIGIN: f64 = 1e-6;

impl ConformalFactor {
    /// Integrates `dφ/dt = (f' − 1)/f` from `t_hi` (where `φ = 0`) down to
    /// the origin of a cone, or to `−t_hi` for a two-ended model whose warp
    /// is linear for `|t| >= t_hi`.
    pub fn new(model: Arc<ModelMetric>, t_hi: f64, spec: &QuadratureSpec) -> Result<Self> {
        let t_lo = match model.kind {
            MetricKind::Cone => 0.0,
            MetricKind::Line => -t_hi,
        };
        if !(t_hi > 0.0) {
            return crate::error::param("conformal factor needs a positive tail start");
        }
        let m = model.clone();
        let a3 = m.origin_a3;
        let rhs = move |t: f64, _: &[f64; 1]| {
            if m.kind == MetricKind::Cone && t < ORIGIN {
                return [3.0 * a3 * t];
            }
            let j = m.warp.jet_raw(t);
            [(j.d1 - 1.0) / j.value]
        };
        let knots: Vec<f64> = model.knots().iter().copied().filter(|&k| k > t_lo && k < t_hi).collect();
        let sol = integrate_ode(rhs, t_hi, [0.0], t_lo, &knots, &spec.scaled(0.01))?;
        let phi_lo = sol.final_state()[0];
        let f_lo = model.warp.value(t_lo);
        let support = model.warp.value(t_hi);
        Ok(ConformalFactor { t_lo, t_hi, phi_lo, f_lo, ln_r_lo: f_lo.ln() - phi_lo, support, sol: Arc::new(sol), model })
    }

    pub fn model(&self) -> &ModelMetric {
        &self.model
    }

    /// Euclidean radius beyond which `φ = 0`.
    pub fn support_radius(&self) -> f64 {
        self.support
    }

    /// Model parameter at which the tail starts.
    pub fn tail_start(&self) -> f64 {
        self.t_hi
    }

    pub fn phi_at_t(&self, t: f64) -> f64 {
        if t >= self.t_hi {
            0.0
        } else if t >= self.t_lo {
            self.sol.eval(t).0[0]
        } else {
            self.phi_lo + 2.0 * (self.model.warp.value(t) / self.f_lo).ln()
        }
    }

    /// Euclidean radius `r(t) = f(t)·e^{−φ(t)}`.
    pub fn r_of_t(&self, t: f64) -> f64 {
        if t >= self.t_hi {
            return self.support + (t - self.t_hi);
        }
        self.ln_r_of_t(t).exp()
    }

    /// `ln r(t)`, finite wherever the warp is positive.
    pub fn ln_r_of_t(&self, t: f64) -> f64 {
        if t >= self.t_hi {
            return (self.support + (t - self.t_hi)).ln();
        }
        let lf = self.model.warp.value(t).ln();
        if t < self.t_lo {
            self.f_lo.ln() + self.ln_r_lo - lf
        } else {
            lf - self.phi_at_t(t)
        }
    }

    /// Inverse of [`r_of_t`](Self::r_of_t).
    pub fn t_of_r(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::Domain { t: r, lo: 0.0, hi: f64::INFINITY });
        }
        if r >= self.support {
            return Ok(self.t_hi + (r - self.support));
        }
        self.t_of_ln_r(r.ln())
    }

    /// Inverse of [`ln_r_of_t`](Self::ln_r_of_t), by bisection on the
    /// integrated range.
    pub fn t_of_ln_r(&self, s: f64) -> Result<f64> {
        if s.is_nan() || s == f64::INFINITY {
            return Err(Error::Domain { t: s, lo: f64::NEG_INFINITY, hi: f64::INFINITY });
        }
        if s >= self.support.ln() {
            return Ok(self.t_hi + (s.exp() - self.support));
        }
        match self.model.kind {
            MetricKind::Cone if s == f64::NEG_INFINITY => return Ok(0.0),
            MetricKind::Line if s == f64::NEG_INFINITY => return Err(Error::Puncture { index: 0 }),
            MetricKind::Line if s <= self.ln_r_lo => {
                let f = (self.f_lo.ln() + self.ln_r_lo - s).exp();
                return Ok(self.t_lo - (f - self.f_lo));
            }
            _ => {}
        }
        bracket_root(|t| self.ln_r_of_t(t) - s, self.t_lo, self.t_hi, 0.0)
    }

    /// `φ` at Euclidean radius `e^s`.
    pub fn phi_at_ln_r(&self, s: f64) -> Result<f64> {
        Ok(self.phi_at_t(self.t_of_ln_r(s)?))
    }

    /// `φ`, `dφ/dr` and `d²φ/dr²` at Euclidean radius `r`.
    pub fn phi(&self, r: f64) -> Result<Jet> {
        let t = self.t_of_r(r)?;
        let phi = self.phi_at_t(t);
        if self.model.kind == MetricKind::Cone && t < ORIGIN {
            let a3 = self.model.origin_a3;
            let e = phi.exp();
            return Ok(Jet::new(phi, 3.0 * a3 * t * e * e, 3.0 * a3 * e * e));
        }
        if t >= self.t_hi {
            return Ok(Jet::new(0.0, 0.0, 0.0));
        }
        let j = self.model.warp.jet_raw(t);
        Ok(Jet::new(phi, (j.d1 - 1.0) / r, (j.d2 * j.value - (j.d1 - 1.0)) / (r * r)))
    }

    /// `φ` as a profile of the Euclidean radius.
    pub fn profile(&self) -> Profile {
        let me = self.clone();
        let f: PieceFn = Arc::new(move |r| me.phi(r).unwrap_or(Jet::new(f64::NAN, f64::NAN, f64::NAN)));
        let mut knots: Vec<f64> = self
            .model
            .knots()
            .iter()
            .filter(|&&k| k > self.t_lo && k < self.t_hi)
            .map(|&k| self.r_of_t(k))
            .collect();
        knots.push(self.support);
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        let pieces = vec![f; knots.len() + 1];
        let p = Profile::new(0.0, f64::INFINITY, knots, pieces, 2, 1).expect("increasing knots");
        match self.model.kind {
            MetricKind::Cone => p,
            MetricKind::Line => p.open_below(),
        }
    }

    /// Log-radii sampling the support: uniform in `ln r` from near the
    /// puncture or origin, plus a few points beyond the support.
    pub fn sample_log_radii(&self, count: usize) -> Vec<f64> {
        let top = self.support.ln();
        let lo = match self.model.kind {
            MetricKind::Cone => top - 9.0 * std::f64::consts::LN_10,
            MetricKind::Line => self.ln_r_lo - 6.0 * std::f64::consts::LN_10,
        };
        let mut out: Vec<f64> = (0..count).map(|i| lo + (top - lo) * i as f64 / (count - 1) as f64).collect();
        out.extend([1.0 + 1e-9, 1.5, 3.0].map(|k: f64| top + k.ln()));
        out
    }

    /// Parameter samples across the integrated range and a little beyond.
    pub fn sample_params(&self, count: usize) -> Vec<f64> {
        let b = 1.5 * self.t_hi;
        // Cubic spacing is dense near the core, where the warp changes fastest.
        (0..count)
            .map(|i| {
                let u = i as f64 / (count - 1) as f64;
                match self.model.kind {
                    MetricKind::Cone => b * u.powi(3),
                    MetricKind::Line => b * (2.0 * u - 1.0).powi(3),
                }
            })
            .collect()
    }
}

/// Diagnostics of a conformal factor over dense samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorDiagnostics {
    pub min_phi: f64,
    /// Largest `|φ|` at radii on or beyond the support.
    pub max_phi_outside: f64,
    /// Largest increase of `φ` between consecutive increasing radii.
    pub max_increase: f64,
    /// Largest relative error of `e^{φ(r(t))}·r(t) = f(t)`.
    pub round_trip: f64,
    /// Largest difference between the integrated `φ(t)` and the quadrature
    /// `−∫_t^{t_hi}(f'−1)/f`.
    pub ode_vs_quadrature: f64,
    /// `inf e^φ·r` on the sampled radii inside the support.
    pub min_scaled_radius: f64,
}

pub fn factor_diagnostics(c: &ConformalFactor, samples: usize, spec: &QuadratureSpec) -> Result<FactorDiagnostics> {
    let log_radii = c.sample_log_radii(samples);
    let mut d = FactorDiagnostics {
        min_phi: f64::INFINITY,
        max_phi_outside: 0.0,
        max_increase: f64::NEG_INFINITY,
        round_trip: 0.0,
        ode_vs_quadrature: 0.0,
        min_scaled_radius: f64::INFINITY,
    };
    let mut prev: Option<f64> = None;
    let top = c.support_radius().ln();
    for &s in &log_radii {
        let p = c.phi_at_ln_r(s)?;
        d.min_phi = d.min_phi.min(p);
        if s >= top {
            d.max_phi_outside = d.max_phi_outside.max(p.abs());
        } else {
            d.min_scaled_radius = d.min_scaled_radius.min((p + s).exp());
        }
        if let Some(q) = prev {
            d.max_increase = d.max_increase.max(p - q);
        }
        prev = Some(p);
    }
    let m = c.model();
    for &t in &c.sample_params(samples) {
        let s = c.ln_r_of_t(t);
        if s == f64::NEG_INFINITY {
            continue;
        }
        let back = (c.phi_at_ln_r(s)? + s).exp();
        let f = m.warp.value(t);
        d.round_trip = d.round_trip.max((back - f).abs() / f);
    }
    let g = |t: f64| {
        let j = m.warp.jet_raw(t);
        if m.kind == MetricKind::Cone && t < ORIGIN {
            3.0 * m.origin_a3 * t
        } else {
            (j.d1 - 1.0) / j.value
        }
    };
    let probes = [0.0, 0.25, 0.5, 0.75, 0.95].map(|u| match m.kind {
        MetricKind::Cone => u * c.tail_start(),
        MetricKind::Line => (2.0 * u - 1.0) * c.tail_start(),
    });
    for t in probes {
        let breaks = integration_breaks(m, t, c.tail_start());
        let q = -integrate(g, t, c.tail_start(), spec, &breaks)?;
        d.ode_vs_quadrature = d.ode_vs_quadrature.max((q - c.phi_at_t(t)).abs());
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_factor_vanishes() {
        let m = Arc::new(ModelMetric::euclidean(3));
        let c = ConformalFactor::new(m, 5.0, &QuadratureSpec::default()).unwrap();
        for r in [0.0, 0.3, 4.0, 9.0] {
            assert_eq!(c.phi(r).unwrap().value, 0.0);
        }
    }

    #[test]
    fn sphere_cap_matches_stereographic_factor() {
        // On a round cap the factor is explicit: r(t) = k·tan(t/2).
        let w = Profile::smooth(0.0, 1.0, |t| Jet::new(t.sin(), t.cos(), -t.sin()));
        let m = Arc::new(ModelMetric::cone(3, w, -1.0 / 6.0, None, "cap").unwrap());
        let c = ConformalFactor::new(m, 1.0, &QuadratureSpec::default()).unwrap();
        let k = 1f64.sin() / (0.5f64).tan();
        for t in [0.1, 0.4, 0.9] {
            let r = c.r_of_t(t);
            assert!((r - k * (t / 2.0).tan()).abs() < 1e-9 * r, "{t}");
            assert!((c.t_of_r(r).unwrap() - t).abs() < 1e-10);
        }
    }
}
