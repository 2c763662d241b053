use super::RadialOperator;
use crate::error::{param, Error, Result};
use crate::profile::{integrate_ode, Jet, Profile, QuadratureSpec};
use std::sync::Arc;

/// A positive radial solution of `−(w h')'/w + q h = 0` on `[0, L]`,
/// normalized to `min h = 1`.
#[derive(Debug, Clone)]
pub struct Gauge {
    pub profile: Profile,
    /// `max h / min h` on `[0, L]`.
    pub gamma: f64,
    pub l: f64,
}

/// Shoots the radial equation from `h(0) = 1, h'(0) = 0`, starting off
/// the origin with the series `h ≈ 1 + q(0)r²/(2n)`.
pub fn radial_gauge(op: &RadialOperator, l: f64, spec: &QuadratureSpec) -> Result<Gauge> {
    if !(l > 0.0) || !l.is_finite() {
        return param(format!("gauge radius must be positive, got {l}"));
    }
    let nf = op.metric.n as f64;
    let eps = (1e-4 * l).min(1e-4);
    let q0 = op.potential(eps);
    let y0 = [1.0 + q0 * eps * eps / (2.0 * nf), q0 * eps / nf];
    let o = op.clone();
    let rhs = move |r: f64, y: &[f64; 2]| {
        let j = o.metric.warp.jet_raw(r);
        [y[1], o.potential(r) * y[0] - (nf - 1.0) * j.d1 / j.value * y[1]]
    };
    let knots = op.knots();
    let sol = Arc::new(integrate_ode(rhs.clone(), eps, y0, l, &knots, spec)?);
    let mut probes = sol.mesh();
    probes.extend((0..=2000).map(|i| eps + (l - eps) * i as f64 / 2000.0));
    probes.sort_by(f64::total_cmp);
    let (mut lo, mut hi) = (y0[0].min(1.0), y0[0].max(1.0));
    for &r in &probes {
        let h = sol.eval(r).0[0];
        if !(h > 0.0) {
            return Err(Error::Blowup { r });
        }
        lo = lo.min(h);
        hi = hi.max(h);
    }
    let s = sol.clone();
    let piece = move |r: f64| {
        if r < eps {
            return Jet::new(1.0 / lo, 0.0, q0 / nf / lo);
        }
        let (y, _) = s.eval(r);
        let d = rhs(r, &y);
        Jet::new(y[0] / lo, y[1] / lo, d[1] / lo)
    };
    Ok(Gauge { profile: Profile::smooth(0.0, l, piece).with_smoothness(1), gamma: hi / lo, l })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ModelMetric;

    #[test]
    fn free_operator_has_constant_gauge() {
        let op = RadialOperator::shifted(&ModelMetric::euclidean(3), 0.0).unwrap();
        let g = radial_gauge(&op, 50.0, &QuadratureSpec::default()).unwrap();
        assert_eq!(g.gamma, 1.0);
        assert_eq!(g.profile.value(17.0), 1.0);
    }

    #[test]
    fn oscillating_solution_blows_up() {
        let op = RadialOperator::shifted(&ModelMetric::hyperbolic(2), 0.3).unwrap();
        assert!(matches!(radial_gauge(&op, 100.0, &QuadratureSpec::default()), Err(Error::Blowup { .. })));
    }
}
