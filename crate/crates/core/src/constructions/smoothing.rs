use super::ell::{build_j, chi, ell};
use crate::error::{param, Result};
use crate::profile::{bracket_root, CumulativeTable, Jet, PieceFn, Profile};
use std::sync::{Arc, OnceLock};

/// `X(s) = ∫_{-1}^s χ`, so `X(1) = 1`.
fn chi_integral() -> &'static CumulativeTable {
    static TABLE: OnceLock<CumulativeTable> = OnceLock::new();
    TABLE.get_or_init(|| CumulativeTable::uniform(Arc::new(|s| chi(s).0), -1.0, 1.0, 1.0 / 1024.0))
}

/// Mollified cutoff `S_δ` and its primitive `T_δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mollifier {
    pub delta: f64,
}

impl Mollifier {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return param(format!("mollifier width must lie in (0, 1), got {delta}"));
        }
        Ok(Mollifier { delta })
    }

    /// `S_δ(x)` and `S_δ'(x)`.
    pub fn s(&self, x: f64) -> (f64, f64) {
        let (c, dc) = chi((x.abs() - 1.0) / self.delta);
        (c, dc * x.signum() / self.delta)
    }

    /// `T_δ(x) = ∫_0^x S_δ`, odd.
    pub fn t(&self, x: f64) -> f64 {
        let (a, d) = (x.abs(), self.delta);
        let v = if a <= 1.0 - d {
            a
        } else if a >= 1.0 + d {
            1.0
        } else {
            1.0 - d + d * chi_integral().eval((a - 1.0) / d)
        };
        v * x.signum()
    }

    fn knots(&self) -> Vec<f64> {
        let d = self.delta;
        vec![-1.0 - d, -1.0 + d, 1.0 - d, 1.0 + d]
    }

    pub fn s_profile(&self) -> Profile {
        let me = *self;
        let f: PieceFn = Arc::new(move |x| {
            let (v, d1) = me.s(x);
            Jet::new(v, d1, 0.0)
        });
        Profile::new(f64::NEG_INFINITY, f64::INFINITY, self.knots(), vec![f; 5], 1, 1).expect("sorted knots")
    }

    pub fn t_profile(&self) -> Profile {
        let me = *self;
        let f: PieceFn = Arc::new(move |x| {
            let (s, ds) = me.s(x);
            Jet::new(me.t(x), s, ds)
        });
        Profile::new(f64::NEG_INFINITY, f64::INFINITY, self.knots(), vec![f; 5], 2, 2).expect("sorted knots")
    }
}

/// `(S_δ, T_δ)` as profiles.
pub fn build_mollifier(delta: f64) -> Result<(Profile, Profile)> {
    let m = Mollifier::new(delta)?;
    Ok((m.s_profile(), m.t_profile()))
}

/// The unique `δ` with `3^{(1−δ)/(1+δ)} = 2`, cached.
pub fn delta_star() -> f64 {
    static D: OnceLock<f64> = OnceLock::new();
    *D.get_or_init(|| {
        bracket_root(|d| 3f64.powf((1.0 - d) / (1.0 + d)) - 2.0, 0.0, 1.0, 1e-16).expect("sign change on [0, 1]")
    })
}

/// The smoothed profile `J_{δ,R}` together with its breakpoints.
#[derive(Clone)]
pub struct SmoothedProfile {
    pub delta: f64,
    pub r: f64,
    /// `R^{1−δ}`: `J = j_R` on `[−inner, inner]`.
    pub inner: f64,
    /// `R^{1+δ}`: `J` has slope one beyond.
    pub outer: f64,
    pub profile: Profile,
}

/// `J_{δ,R}(t) = 1/log R + ∫_0^t T_δ(ℓ'/log R)`.
pub fn build_j_smoothed(delta: f64, r: f64) -> Result<SmoothedProfile> {
    let moll = Mollifier::new(delta)?;
    if !(r > 1.0) || !(r.powf(1.0 - delta) >= 2.0) {
        return param(format!("J_(delta,R) needs R^(1-delta) >= 2, got R = {r}, delta = {delta}"));
    }
    let lr = r.ln();
    let (inner, outer) = (r.powf(1.0 - delta), r.powf(1.0 + delta));
    let e = ell();
    let slope = move |t: f64| moll.t(e.d1(t) / lr);
    let span = outer.ln() - inner.ln();
    let dlog = (span / 20_000.0).max(0.02f64.min(span / 64.0));
    let table = CumulativeTable::geometric(Arc::new(slope), inner, outer, dlog);
    let at_inner = e.value(inner) / lr;
    let at_outer = at_inner + table.total();
    let f: PieceFn = Arc::new(move |t: f64| {
        let (a, s) = (t.abs(), t.signum());
        if a <= inner {
            let j = e.jet(t);
            Jet::new(j.value / lr, j.d1 / lr, j.d2 / lr)
        } else if a >= outer {
            Jet::new(at_outer + a - outer, s, 0.0)
        } else {
            let x = e.d1(a) / lr;
            let d2 = moll.s(x).0 * e.d2(a) / lr;
            Jet::new(at_inner + table.eval(a), moll.t(x) * s, d2)
        }
    });
    let mut knots = vec![-outer, -inner, -2.0, -1.0, 1.0, 2.0, inner, outer];
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let pieces = vec![f; knots.len() + 1];
    let profile = Profile::new(f64::NEG_INFINITY, f64::INFINITY, knots, pieces, 2, 2)?;
    Ok(SmoothedProfile { delta, r, inner, outer, profile })
}

/// Pointwise violations of the four structural bounds of `J_{δ,R}` at
/// `samples` points of `[0, 2·R^{1+δ}]`: returns the maxima of
/// `J − j_R`, `|J'| − 1`, `−J''` and `J'' − ℓ''/log R`.
pub fn smoothed_bound_violations(j: &SmoothedProfile, samples: usize) -> Result<[f64; 4]> {
    let jr = build_j(j.r)?;
    let lr = j.r.ln();
    let e = ell();
    let hi = 2.0 * j.outer;
    let mut worst = [f64::NEG_INFINITY; 4];
    for i in 0..samples {
        // Half the points on a linear grid near the core, half geometric.
        let t = if i < samples / 2 {
            4.0 * i as f64 / (samples / 2) as f64
        } else {
            let k = (i - samples / 2) as f64 / (samples - samples / 2 - 1).max(1) as f64;
            4.0 * (hi / 4.0).powf(k)
        };
        let a = j.profile.jet(t)?;
        let b = jr.jet(t)?;
        let v = [a.value - b.value, a.d1.abs() - 1.0, -a.d2, a.d2 - e.d2(t) / lr];
        for (w, x) in worst.iter_mut().zip(v) {
            *w = w.max(x);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_star_closed_form() {
        assert!((delta_star() - (1.5f64.ln() / 6f64.ln())).abs() < 1e-15);
    }

    #[test]
    fn mollifier_zones() {
        let m = Mollifier::new(0.2).unwrap();
        assert_eq!(m.t(0.5), 0.5);
        assert_eq!(m.t(2.0), 1.0);
        assert_eq!(m.t(-2.0), -1.0);
        assert!((m.t(1.2 - 1e-12) - 1.0).abs() < 1e-12);
        assert!(Mollifier::new(1.0).is_err());
        let (_, t) = build_mollifier(0.3).unwrap();
        assert!(t.knot_mismatch() < 1e-12);
    }

    #[test]
    fn smoothed_profile_matches_j_in_core() {
        let d = delta_star();
        let j = build_j_smoothed(d, 100.0).unwrap();
        let jr = build_j(100.0).unwrap();
        let t = 100f64.powf(1.0 - d) / 2.0;
        assert_eq!(j.profile.value(t), jr.value(t));
        assert!((j.profile.value(0.0) - 1.0 / 100f64.ln()).abs() < 1e-15);
        assert_eq!(j.profile.jet(2.0 * j.outer).unwrap().d1, 1.0);
        assert!(j.profile.knot_mismatch() < 1e-9);
    }

    #[test]
    fn structural_bounds() {
        let j = build_j_smoothed(delta_star(), 100.0).unwrap();
        let w = smoothed_bound_violations(&j, 10_000).unwrap();
        assert!(w[0] <= 1e-12 && w[1] <= 1e-15 && w[2] <= 0.0 && w[3] <= 1e-15, "{w:?}");
    }

    #[test]
    fn rejects_small_r() {
        assert!(build_j_smoothed(0.5, 3.0).is_err());
    }
}
