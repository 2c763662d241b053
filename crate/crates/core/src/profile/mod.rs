//! Piecewise-smooth profiles of one real variable and the numerical kernel
//! built around them: adaptive quadrature, bisection, and an explicit
//! Runge–Kutta integrator with dense output.

mod ode;
mod quad;
mod root;
mod table;

pub use ode::{integrate_ode, integrate_ode_scalar, OdeSolution};
pub use quad::{geometric_breaks, integrate, integrate_with, Endpoint, QuadratureSpec};
pub use root::bracket_root;
pub use table::{gauss_legendre, CumulativeTable};

use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

/// Value and first two derivatives at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub const fn new(value: f64, d1: f64, d2: f64) -> Self {
        Jet { value, d1, d2 }
    }

    pub fn get(&self, order: u8) -> f64 {
        match order {
            0 => self.value,
            1 => self.d1,
            _ => self.d2,
        }
    }
}

/// Evaluator for one smooth piece.
pub type PieceFn = Arc<dyn Fn(f64) -> Jet + Send + Sync>;

/// A real function on an interval, smooth between knots.
///
/// Evaluation at a knot uses the piece to its right.
#[derive(Clone)]
pub struct Profile {
    lo: f64,
    hi: f64,
    lo_open: bool,
    knots: Vec<f64>,
    pieces: Vec<PieceFn>,
    order: u8,
    smoothness: u8,
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Profile")
            .field("domain", &(self.lo, self.hi))
            .field("knots", &self.knots)
            .field("order", &self.order)
            .field("smoothness", &self.smoothness)
            .finish()
    }
}

impl Profile {
    /// Builds a profile from `knots.len() + 1` pieces.
    pub fn new(
        lo: f64,
        hi: f64,
        knots: Vec<f64>,
        pieces: Vec<PieceFn>,
        order: u8,
        smoothness: u8,
    ) -> Result<Self> {
        if !(lo < hi) {
            return crate::error::param(format!("empty domain [{lo}, {hi}]"));
        }
        if pieces.len() != knots.len() + 1 {
            return crate::error::param("need exactly one more piece than knots");
        }
        if knots.windows(2).any(|w| !(w[0] < w[1])) {
            return crate::error::param("knots must be strictly increasing");
        }
        if knots.iter().any(|&k| !(k > lo && k < hi)) {
            return crate::error::param("knots must be interior to the domain");
        }
        if order > 2 {
            return crate::error::param("at most two derivatives are tracked");
        }
        Ok(Profile { lo, hi, lo_open: false, knots, pieces, order, smoothness })
    }

    /// A single smooth piece on `[lo, hi]`.
    pub fn smooth<F>(lo: f64, hi: f64, f: F) -> Self
    where
        F: Fn(f64) -> Jet + Send + Sync + 'static,
    {
        Profile::new(lo, hi, vec![], vec![Arc::new(f)], 2, 2).expect("valid single piece")
    }

    /// Marks the lower end as excluded (for functions on `(lo, hi]`).
    pub fn open_below(mut self) -> Self {
        self.lo_open = true;
        self
    }

    pub fn with_smoothness(mut self, s: u8) -> Self {
        self.smoothness = s;
        self
    }

    pub fn with_order(mut self, order: u8) -> Self {
        self.order = order.min(2);
        self
    }

    pub fn identity(lo: f64, hi: f64) -> Self {
        Profile::smooth(lo, hi, |t| Jet::new(t, 1.0, 0.0))
    }

    pub fn constant(lo: f64, hi: f64, c: f64) -> Self {
        Profile::smooth(lo, hi, move |_| Jet::new(c, 0.0, 0.0))
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn smoothness(&self) -> u8 {
        self.smoothness
    }

    pub fn contains(&self, t: f64) -> bool {
        let above = if self.lo_open { t > self.lo } else { t >= self.lo };
        above && t <= self.hi
    }

    fn check(&self, t: f64) -> Result<()> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(Error::Domain { t, lo: self.lo, hi: self.hi })
        }
    }

    /// Value (`order = 0`) or derivative at `t`; right limit at knots.
    pub fn eval(&self, t: f64, order: u8) -> Result<f64> {
        if order > self.order {
            return Err(Error::Order { requested: order, available: self.order });
        }
        Ok(self.jet(t)?.get(order))
    }

    pub fn jet(&self, t: f64) -> Result<Jet> {
        self.check(t)?;
        Ok(self.jet_raw(t))
    }

    /// Left limit at `t` (differs from [`Profile::jet`] only at knots).
    pub fn jet_left(&self, t: f64) -> Result<Jet> {
        self.check(t)?;
        let i = self.knots.partition_point(|&k| k < t);
        Ok((self.pieces[i])(t))
    }

    /// Evaluation without the domain check, for integrands on known ranges.
    pub fn jet_raw(&self, t: f64) -> Jet {
        let i = self.knots.partition_point(|&k| k <= t);
        (self.pieces[i])(t)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.jet_raw(t).value
    }

    /// Largest mismatch over knots of the one-sided jets up to the declared
    /// smoothness, relative to `max(1, |value|)`.
    pub fn knot_mismatch(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, &k) in self.knots.iter().enumerate() {
            let l = (self.pieces[i])(k);
            let r = (self.pieces[i + 1])(k);
            for o in 0..=self.smoothness.min(2) {
                let (a, b) = (l.get(o), r.get(o));
                let scale = a.abs().max(b.abs()).max(1.0);
                worst = worst.max((a - b).abs() / scale);
            }
        }
        worst
    }

    /// `t ↦ c·p(t/c)`, the warp of the metric scaled by `c²`.
    pub fn rescaled(&self, c: f64) -> Profile {
        let src = self.clone();
        let map = move |t: f64| {
            let j = src.jet_raw(t / c);
            Jet::new(c * j.value, j.d1, j.d2 / c)
        };
        let (lo, hi) = (self.lo * c, self.hi * c);
        Profile {
            lo,
            hi,
            lo_open: self.lo_open,
            knots: self.knots.iter().map(|k| k * c).collect(),
            pieces: (0..self.pieces.len()).map(|_| Arc::new(map.clone()) as PieceFn).collect(),
            order: self.order,
            smoothness: self.smoothness,
        }
    }

    /// `t ↦ p(t - s)`.
    pub fn shifted(&self, s: f64) -> Profile {
        let src = self.clone();
        let map = move |t: f64| src.jet_raw(t - s);
        Profile {
            lo: self.lo + s,
            hi: self.hi + s,
            lo_open: self.lo_open,
            knots: self.knots.iter().map(|k| k + s).collect(),
            pieces: (0..self.pieces.len()).map(|_| Arc::new(map.clone()) as PieceFn).collect(),
            order: self.order,
            smoothness: self.smoothness,
        }
    }

    /// Wraps this profile as a single piece evaluator (keeps its own knots).
    pub fn as_piece(&self) -> PieceFn {
        let src = self.clone();
        Arc::new(move |t| src.jet_raw(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn abs_profile() -> Profile {
        Profile::new(
            -2.0,
            2.0,
            vec![0.0],
            vec![
                Arc::new(|t: f64| Jet::new(-t, -1.0, 0.0)),
                Arc::new(|t: f64| Jet::new(t, 1.0, 0.0)),
            ],
            2,
            0,
        )
        .unwrap()
    }

    #[test]
    fn identity_derivative() {
        let p = Profile::identity(0.0, 10.0);
        assert_eq!(p.eval(3.0, 1).unwrap(), 1.0);
    }

    #[test]
    fn sine_second_derivative() {
        let p = Profile::smooth(0.0, PI, |t| Jet::new(t.sin(), t.cos(), -t.sin()));
        assert!((p.eval(PI / 2.0, 2).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn right_limit_at_knot() {
        let p = abs_profile();
        assert_eq!(p.eval(0.0, 1).unwrap(), 1.0);
        assert_eq!(p.jet_left(0.0).unwrap().d1, -1.0);
    }

    #[test]
    fn domain_and_order_errors() {
        let p = Profile::identity(0.0, 1.0);
        assert!(matches!(p.eval(1.5, 0), Err(Error::Domain { .. })));
        let q = p.clone().with_order(1);
        assert!(matches!(q.eval(0.5, 2), Err(Error::Order { .. })));
        let open = Profile::identity(0.0, 1.0).open_below();
        assert!(open.eval(0.0, 0).is_err());
    }

    #[test]
    fn rejects_bad_knots() {
        let piece: PieceFn = Arc::new(|t| Jet::new(t, 1.0, 0.0));
        let pieces = vec![piece.clone(), piece.clone(), piece];
        assert!(Profile::new(0.0, 1.0, vec![0.5, 0.2], pieces.clone(), 2, 1).is_err());
        assert!(Profile::new(0.0, 1.0, vec![0.0, 0.5], pieces, 2, 1).is_err());
    }

    #[test]
    fn knot_mismatch_detects_kinks() {
        let p = abs_profile();
        assert_eq!(p.with_smoothness(1).knot_mismatch(), 2.0);
    }

    #[test]
    fn rescale_and_shift() {
        let p = Profile::smooth(0.0, 10.0, |t| Jet::new(t * t, 2.0 * t, 2.0));
        let q = p.rescaled(2.0);
        let j = q.jet(4.0).unwrap();
        assert_eq!(j.value, 8.0);
        assert_eq!(j.d1, 4.0);
        assert_eq!(j.d2, 1.0);
        let s = p.shifted(1.0);
        assert_eq!(s.domain(), (1.0, 11.0));
        assert_eq!(s.value(3.0), 4.0);
    }
}
