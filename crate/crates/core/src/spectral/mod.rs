//! Radial Schrödinger operators `Δ + V` on cones: the lowest eigenvalue of
//! the truncated radial form, nonnegativity verdicts, gauge functions, and
//! the certificate chains that turn nonnegativity into volume bounds.
//!
//! With a radial potential the spherical-harmonic sector of degree `ℓ`
//! adds `ℓ(ℓ+n−2)/f²` to the potential, so the radial sector decides
//! nonnegativity.

mod chains;
mod gauge;

pub use chains::{theorem_d_chain, theorem_e_chain};
pub use gauge::{radial_gauge, Gauge};

use crate::error::{param, Error, Result};
use crate::geometry::{curvature_at, MetricKind, ModelMetric};
use crate::par;
use crate::profile::gauss_legendre;
use serde::Serialize;
use std::sync::Arc;

pub type PotentialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// How the potential was derived from the metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialMode {
    /// `λ·ρ`, ρ the lowest Ricci eigenvalue.
    Rho,
    /// `−λ·ricm`.
    NegRicm,
    /// `−λ·V` for a supplied `V`.
    Supplied,
}

/// `u ↦ −(w u')'/w + q u` with weight `w = f^{n−1}` on a cone.
#[derive(Clone)]
pub struct RadialOperator {
    pub metric: Arc<ModelMetric>,
    pub lambda: f64,
    pub mode: PotentialMode,
    /// Angular degree added as `ℓ(ℓ+n−2)/f²`.
    pub angular: u32,
    potential: PotentialFn,
    /// Discontinuities of the potential besides the warp knots.
    knots: Vec<f64>,
    pub label: String,
}

impl std::fmt::Debug for RadialOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadialOperator")
            .field("metric", &self.metric.label)
            .field("lambda", &self.lambda)
            .field("mode", &self.mode)
            .field("angular", &self.angular)
            .field("label", &self.label)
            .finish()
    }
}

fn cone(m: &ModelMetric) -> Result<Arc<ModelMetric>> {
    if m.kind != MetricKind::Cone {
        return param("radial operators need a cone metric");
    }
    Ok(Arc::new(m.clone()))
}

impl RadialOperator {
    /// `Δ + λρ`.
    pub fn rho(m: &ModelMetric, lambda: f64) -> Result<Self> {
        let metric = cone(m)?;
        let mm = metric.clone();
        let potential: PotentialFn = Arc::new(move |r| lambda * curvature_at(&mm, r).map(|c| c.rho).unwrap_or(f64::NAN));
        Ok(RadialOperator { metric, lambda, mode: PotentialMode::Rho, angular: 0, potential, knots: vec![], label: "rho".into() })
    }

    /// `Δ − λ·ricm`.
    pub fn ricm(m: &ModelMetric, lambda: f64) -> Result<Self> {
        let metric = cone(m)?;
        let mm = metric.clone();
        let potential: PotentialFn =
            Arc::new(move |r| -lambda * curvature_at(&mm, r).map(|c| c.ricm).unwrap_or(f64::NAN));
        Ok(RadialOperator { metric, lambda, mode: PotentialMode::NegRicm, angular: 0, potential, knots: vec![], label: "ricm".into() })
    }

    /// `Δ − λV`; `knots` lists the discontinuities of `V`.
    pub fn supplied(m: &ModelMetric, lambda: f64, v: PotentialFn, knots: Vec<f64>, label: &str) -> Result<Self> {
        let metric = cone(m)?;
        let potential: PotentialFn = Arc::new(move |r| -lambda * v(r));
        Ok(RadialOperator { metric, lambda, mode: PotentialMode::Supplied, angular: 0, potential, knots, label: label.into() })
    }

    /// `Δ − λ`.
    pub fn shifted(m: &ModelMetric, lambda: f64) -> Result<Self> {
        Self::supplied(m, lambda, Arc::new(|_| 1.0), vec![], "constant")
    }

    /// The same operator with zero potential.
    pub fn free(&self) -> Self {
        RadialOperator {
            lambda: 0.0,
            mode: PotentialMode::Supplied,
            potential: Arc::new(|_| 0.0),
            knots: vec![],
            label: "free".into(),
            ..self.clone()
        }
    }

    /// Restriction to spherical harmonics of degree `l`.
    pub fn with_angular(&self, l: u32) -> Self {
        RadialOperator { angular: l, ..self.clone() }
    }

    /// Total potential, including the angular term.
    pub fn potential(&self, r: f64) -> f64 {
        let base = (self.potential)(r);
        if self.angular == 0 {
            return base;
        }
        let l = self.angular as f64;
        let f = self.metric.warp.value(r);
        base + l * (l + self.metric.n as f64 - 2.0) / (f * f)
    }

    pub fn knots(&self) -> Vec<f64> {
        let mut k: Vec<f64> = self.metric.knots().iter().chain(&self.knots).copied().collect();
        k.sort_by(f64::total_cmp);
        k.dedup();
        k
    }

    fn log_weight(&self, r: f64) -> f64 {
        (self.metric.n as f64 - 1.0) * self.metric.warp.value(r).ln()
    }
}

/// Symmetric tridiagonal matrix with diagonal `d` and off-diagonal `e`.
struct Tridiagonal {
    d: Vec<f64>,
    e: Vec<f64>,
}

impl Tridiagonal {
    /// Number of eigenvalues below `x` (Sturm sequence).
    fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.d.len() {
            let e2 = if i == 0 { 0.0 } else { self.e[i - 1] * self.e[i - 1] };
            q = self.d[i] - x - e2 / q;
            if q == 0.0 {
                q = -f64::EPSILON * (self.d[i].abs() + x.abs() + f64::MIN_POSITIVE);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn lowest(&self) -> f64 {
        let n = self.d.len();
        let mut lo = f64::INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.e[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.e[i].abs() } else { 0.0 };
            lo = lo.min(self.d[i] - left - right);
        }
        let mut hi = self.d.iter().copied().fold(f64::INFINITY, f64::min);
        for _ in 0..4000 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                break;
            }
            if self.count_below(mid) >= 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Nodes equidistributing `G(r) = asinh r + (n−1)·sup_{t<=r}|log(f(t)/t)|`.
/// On flat regions this is the `sinh` mesh, spacing `≈ log(2L)/N` near
/// the origin and geometric further out; where the weight grows
/// exponentially the spacing becomes uniform.
fn mesh(op: &RadialOperator, l: f64, cells: usize) -> Vec<f64> {
    let k = l.asinh();
    let fine = 16 * cells;
    let aux: Vec<f64> = (0..=fine).map(|i| l * (k * i as f64 / fine as f64).sinh() / k.sinh()).collect();
    let nm1 = op.metric.n as f64 - 1.0;
    let mut g = Vec::with_capacity(aux.len());
    let mut excess = 0f64;
    for &r in &aux {
        if r > 0.0 {
            let e = nm1 * (op.metric.warp.value(r) / r).ln().abs();
            if e.is_finite() {
                excess = excess.max(e);
            }
        }
        g.push(r.asinh() + excess);
    }
    let total = g[fine];
    let mut out = Vec::with_capacity(cells + 1);
    let mut j = 0;
    for i in 0..=cells {
        let target = total * i as f64 / cells as f64;
        while j + 1 < fine && g[j + 1] < target {
            j += 1;
        }
        let (g0, g1) = (g[j], g[j + 1]);
        let u = if g1 > g0 { ((target - g0) / (g1 - g0)).clamp(0.0, 1.0) } else { 0.0 };
        out.push(aux[j] + u * (aux[j + 1] - aux[j]));
    }
    out[0] = 0.0;
    out[cells] = l;
    out
}

/// `e^s · v`, kept apart so that weights spanning hundreds of orders of
/// magnitude never overflow.
#[derive(Debug, Clone, Copy)]
struct Scaled {
    s: f64,
    v: f64,
}

impl Scaled {
    const ZERO: Scaled = Scaled { s: f64::NEG_INFINITY, v: 0.0 };

    fn add(self, o: Scaled) -> Scaled {
        if self.v == 0.0 {
            return o;
        }
        if o.v == 0.0 {
            return self;
        }
        let s = self.s.max(o.s);
        Scaled { s, v: self.v * (self.s - s).exp() + o.v * (o.s - s).exp() }
    }

    fn ratio(self, o: Scaled) -> f64 {
        if self.v == 0.0 {
            0.0
        } else {
            self.v / o.v * (self.s - o.s).exp()
        }
    }
}

fn discretize(op: &RadialOperator, l: f64, cells: usize) -> Result<Tridiagonal> {
    let r = mesh(op, l, cells);
    let (gx, gw) = gauss_legendre(8);
    // ∫_a^b w and ∫_a^b q·w.
    let cell = |a: f64, b: f64| {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        let lw: Vec<f64> = gx.iter().map(|x| op.log_weight(c + h * x)).collect();
        let s = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (mut w, mut qw) = (0.0, 0.0);
        for ((x, wt), l) in gx.iter().zip(&gw).zip(&lw) {
            let v = (l - s).exp();
            w += wt * v;
            qw += wt * v * op.potential(c + h * x);
        }
        (Scaled { s, v: h * w }, Scaled { s, v: h * qw })
    };
    let n = cells;
    let mut mass = vec![Scaled::ZERO; n];
    let mut pot = vec![Scaled::ZERO; n];
    let mut stiff = vec![Scaled::ZERO; n];
    for i in 0..n {
        let mid = 0.5 * (r[i] + r[i + 1]);
        let (w_right, q_right) = cell(r[i], mid);
        let (w_left, q_left) = if i == 0 { (Scaled::ZERO, Scaled::ZERO) } else { cell(0.5 * (r[i - 1] + r[i]), r[i]) };
        mass[i] = w_left.add(w_right);
        pot[i] = q_left.add(q_right);
        let h = r[i + 1] - r[i];
        let w = cell(r[i], r[i + 1]).0;
        stiff[i] = Scaled { s: w.s, v: w.v / (h * h) };
    }
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n.saturating_sub(1)];
    for i in 0..n {
        let left = if i > 0 { stiff[i - 1].ratio(mass[i]) } else { 0.0 };
        d[i] = stiff[i].ratio(mass[i]) + left + pot[i].ratio(mass[i]);
        if i + 1 < n {
            let geo = Scaled { s: 0.5 * (mass[i].s + mass[i + 1].s), v: (mass[i].v * mass[i + 1].v).sqrt() };
            e[i] = -stiff[i].ratio(geo);
        }
    }
    if d.iter().chain(&e).any(|x| !x.is_finite()) {
        return Err(Error::Convergence { a: 0.0, b: l, reason: "non-finite entries in the radial discretization".into() });
    }
    Ok(Tridiagonal { d, e })
}

/// Lowest eigenvalue of the radial form `∫(u'² + q u²) w` on `(0, L]`
/// with `u(L) = 0`, Richardson-extrapolated from `mesh` and `2·mesh` cells.
pub fn radial_bottom_spectrum(op: &RadialOperator, l: f64, mesh: usize) -> Result<f64> {
    if !(l > 0.0) || !l.is_finite() {
        return param(format!("truncation radius must be positive, got {l}"));
    }
    if mesh < 100 {
        return param("mesh must have at least 100 cells");
    }
    let (_, hi) = op.metric.warp.domain();
    if l > hi {
        return Err(Error::Domain { t: l, lo: 0.0, hi });
    }
    let coarse = discretize(op, l, mesh)?.lowest();
    let fine = discretize(op, l, 2 * mesh)?.lowest();
    let v = (4.0 * fine - coarse) / 3.0;
    if !v.is_finite() {
        return Err(Error::Convergence { a: 0.0, b: l, reason: "eigenvalue did not converge".into() });
    }
    Ok(v)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralVerdict {
    pub l_grid: Vec<f64>,
    pub lambda1: Vec<f64>,
    /// Lowest eigenvalue of the potential-free operator on the same ball.
    pub lambda1_free: Vec<f64>,
    /// `None` when the margin falls inside the tolerance band.
    pub nonneg: Option<bool>,
    /// Infimum of `lambda1` over the grid.
    pub margin: f64,
    /// Infimum of `lambda1/lambda1_free` over the grid.
    pub relative_margin: f64,
    pub tol: f64,
    /// `lambda1` nonincreasing along the grid, up to discretization error.
    pub monotone: bool,
}

pub const DEFAULT_MESH: usize = 800;
/// Relative margin separating a decided verdict from an inconclusive one.
pub const DEFAULT_VERDICT_TOL: f64 = 0.02;
const MAX_L: f64 = 65536.0;

/// Truncation radii `4, 8, …, 65536`, stopping where the weight overflows
/// or the warp domain ends.
fn l_grid(op: &RadialOperator) -> Vec<f64> {
    let (_, hi) = op.metric.warp.domain();
    let mut out = vec![];
    let mut l = 4.0;
    while l <= MAX_L {
        if l > hi || !op.log_weight(l).is_finite() {
            break;
        }
        out.push(l);
        l *= 2.0;
    }
    if out.is_empty() && hi.is_finite() {
        out.push(hi);
    }
    out
}

/// Decides nonnegativity of the operator on the whole cone from the
/// truncated problems. The decision uses the eigenvalue relative to the
/// free operator on the same ball, which stays comparable across `L`
/// even though both tend to zero on flat ends.
pub fn nonnegativity_verdict(op: &RadialOperator, tol: f64) -> Result<SpectralVerdict> {
    if !(tol > 0.0) {
        return param("tolerance must be positive");
    }
    let grid = l_grid(op);
    if grid.is_empty() {
        return param("no admissible truncation radius");
    }
    let free = op.free();
    let rows = par::try_map(&grid, |&l| -> Result<(f64, f64)> {
        Ok((radial_bottom_spectrum(op, l, DEFAULT_MESH)?, radial_bottom_spectrum(&free, l, DEFAULT_MESH)?))
    })?;
    let lambda1: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let lambda1_free: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let margin = lambda1.iter().copied().fold(f64::INFINITY, f64::min);
    let relative_margin = rows.iter().map(|(a, b)| a / b).fold(f64::INFINITY, f64::min);
    let nonneg = if relative_margin >= tol {
        Some(true)
    } else if relative_margin <= -tol {
        Some(false)
    } else {
        None
    };
    let monotone = lambda1.windows(2).all(|w| w[1] <= w[0] + 1e-6 * w[0].abs().max(1e-12));
    Ok(SpectralVerdict { l_grid: grid, lambda1, lambda1_free, nonneg, margin, relative_margin, tol, monotone })
}

/// `V(r) = 1/r²` for `r >= 1`, else `0`.
pub fn davies_simon_potential(n: usize) -> Result<PotentialFn> {
    if n < 3 {
        return param("the inverse-square potential needs n >= 3");
    }
    Ok(Arc::new(|r: f64| if r >= 1.0 { 1.0 / (r * r) } else { 0.0 }))
}

/// `Δ − λV` on `ℝⁿ` with the inverse-square potential.
pub fn davies_simon_operator(n: usize, lambda: f64) -> Result<RadialOperator> {
    RadialOperator::supplied(&ModelMetric::euclidean(n), lambda, davies_simon_potential(n)?, vec![1.0], "davies_simon")
}

/// Decay exponent `(n−2)/2 − √((n−2)²/4 − λ)` of the positive solution.
pub fn davies_simon_exponent(n: usize, lambda: f64) -> Result<f64> {
    let h = (n as f64 - 2.0) / 2.0;
    if n < 3 || !(lambda >= 0.0) || lambda > h * h {
        return param(format!("need 0 <= lambda <= (n-2)^2/4 = {}", h * h));
    }
    Ok(h - (h * h - lambda).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_ball_dirichlet() {
        // Radial Dirichlet eigenvalue of the unit 3-ball: π².
        let op = RadialOperator::shifted(&ModelMetric::euclidean(3), 0.0).unwrap();
        let v = radial_bottom_spectrum(&op, 1.0, 400).unwrap();
        assert!((v - std::f64::consts::PI.powi(2)).abs() < 1e-4 * v, "{v}");
    }

    #[test]
    fn shift_moves_the_spectrum() {
        let m = ModelMetric::hyperbolic(2);
        let a = radial_bottom_spectrum(&RadialOperator::shifted(&m, 0.0).unwrap(), 30.0, 400).unwrap();
        let b = radial_bottom_spectrum(&RadialOperator::shifted(&m, 0.1).unwrap(), 30.0, 400).unwrap();
        assert!((a - b - 0.1).abs() < 1e-9);
    }

    #[test]
    fn inverse_square_exponent() {
        assert_eq!(davies_simon_exponent(4, 0.0).unwrap(), 0.0);
        assert!((davies_simon_exponent(4, 0.75).unwrap() - 0.5).abs() < 1e-15);
        assert!(davies_simon_exponent(4, 1.1).is_err());
        let v = davies_simon_potential(4).unwrap();
        assert_eq!((v(0.5), v(2.0)), (0.0, 0.25));
    }
}
