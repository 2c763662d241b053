use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Tolerances for adaptive quadrature (also reused by the ODE integrator).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { rel_tol: 1e-10, abs_tol: 1e-12, max_depth: 60 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0 && self.max_depth >= 1) {
            return crate::error::param("quadrature tolerances must be positive and max_depth >= 1");
        }
        Ok(())
    }

    /// Scales both tolerances by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        QuadratureSpec { rel_tol: self.rel_tol * k, abs_tol: self.abs_tol * k, ..*self }
    }
}

/// Behaviour of the integrand at the lower endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Endpoint {
    Regular,
    /// `g(t) ≈ c·(t − a)^p` near `a`; the first `1e-6` is integrated from
    /// this leading term.
    PowerLaw(f64),
}

const ORIGIN_EPS: f64 = 1e-6;
const MAX_PANELS: usize = 400_000;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077282037263210,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651146,
];

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    abs: f64,
    depth: u32,
    seq: usize,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err).then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Kronrod 21-point estimate with embedded Gauss 10-point error, plus the
/// integral of |g| used for the round-off floor.
fn gk21<F: Fn(f64) -> f64>(g: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = g(c);
    let mut rk = WGK[10] * fc;
    let mut rg = 0.0;
    let mut rabs = WGK[10] * fc.abs();
    for j in 0..10 {
        let x = h * XGK[j];
        let (f1, f2) = (g(c - x), g(c + x));
        rk += WGK[j] * (f1 + f2);
        rabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            rg += WG[j / 2] * (f1 + f2);
        }
    }
    let value = rk * h;
    let err = ((rk - rg) * h).abs();
    (value, err, rabs * h.abs())
}

/// Adaptive Gauss–Kronrod quadrature of `g` over `[a, b]`.
///
/// Panels are never split across an element of `knots`.
pub fn integrate<F: Fn(f64) -> f64>(
    g: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
    knots: &[f64],
) -> Result<f64> {
    integrate_with(g, a, b, spec, knots, Endpoint::Regular)
}

pub fn integrate_with<F: Fn(f64) -> f64>(
    g: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
    knots: &[f64],
    origin: Endpoint,
) -> Result<f64> {
    spec.validate()?;
    if !(a <= b) || !a.is_finite() || !b.is_finite() {
        return crate::error::param(format!("bad integration interval [{a}, {b}]"));
    }
    if a == b {
        return Ok(0.0);
    }
    let (mut lo, mut head) = (a, 0.0);
    if let Endpoint::PowerLaw(p) = origin {
        let eps = ORIGIN_EPS.min(b - a);
        let coeff = g(a + eps) / eps.powf(p);
        head = coeff * eps.powf(p + 1.0) / (p + 1.0);
        lo = a + eps;
        if lo >= b {
            return Ok(head);
        }
    }

    let mut cuts: Vec<f64> = knots.iter().copied().filter(|&k| k > lo && k < b).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut bounds = Vec::with_capacity(cuts.len() + 2);
    bounds.push(lo);
    bounds.extend(cuts);
    bounds.push(b);

    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    let (mut total, mut total_err, mut total_abs) = (0.0, 0.0, 0.0);
    for w in bounds.windows(2) {
        let (v, e, r) = gk21(&g, w[0], w[1]);
        total += v;
        total_err += e;
        total_abs += r;
        heap.push(Panel { a: w[0], b: w[1], value: v, err: e, abs: r, depth: 0, seq });
        seq += 1;
    }

    loop {
        let floor = 50.0 * f64::EPSILON * total_abs;
        let target = spec.abs_tol.max(spec.rel_tol * total.abs()).max(floor);
        if !total.is_finite() {
            return Err(Error::Convergence { a, b, reason: "non-finite integrand".into() });
        }
        if total_err <= target {
            break;
        }
        let worst = heap.pop().expect("at least one panel");
        if worst.depth >= spec.max_depth {
            return Err(Error::Convergence { a, b, reason: format!("max depth near [{}, {}]", worst.a, worst.b) });
        }
        if heap.len() >= MAX_PANELS {
            return Err(Error::Convergence { a, b, reason: "panel budget exhausted".into() });
        }
        let m = 0.5 * (worst.a + worst.b);
        let (v1, e1, r1) = gk21(&g, worst.a, m);
        let (v2, e2, r2) = gk21(&g, m, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        total_abs += r1 + r2 - worst.abs;
        heap.push(Panel { a: worst.a, b: m, value: v1, err: e1, abs: r1, depth: worst.depth + 1, seq });
        heap.push(Panel { a: m, b: worst.b, value: v2, err: e2, abs: r2, depth: worst.depth + 1, seq: seq + 1 });
        seq += 2;
    }

    // Re-sum in position order so the result does not depend on heap history.
    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    Ok(head + panels.iter().map(|p| p.value).sum::<f64>())
}

/// Geometric breakpoints covering `[a, b]` with at most `ratio` between
/// neighbours; empty when `a <= 0`.
pub fn geometric_breaks(a: f64, b: f64, ratio: f64) -> Vec<f64> {
    if !(a > 0.0 && b > a && ratio > 1.0) {
        return vec![];
    }
    let steps = ((b / a).ln() / ratio.ln()).ceil() as usize;
    let q = (b / a).ln() / steps as f64;
    (1..steps).map(|i| a * (q * i as f64).exp()).collect()
}
