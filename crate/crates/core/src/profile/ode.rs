//! Dormand–Prince 5(4) with Hairer's continuous extension.

use super::{Jet, Profile, QuadratureSpec};
use crate::error::{Error, Result};
use std::sync::Arc;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const MAX_STEPS: usize = 2_000_000;

type Vecn<const N: usize> = [f64; N];

#[derive(Debug, Clone)]
struct Step<const N: usize> {
    t: f64,
    h: f64,
    rcont: [Vecn<N>; 5],
    /// Derivative at the step start.
    f0: Vecn<N>,
}

/// Dense output of an accepted integration run.
#[derive(Debug, Clone)]
pub struct OdeSolution<const N: usize> {
    steps: Vec<Step<N>>,
    t0: f64,
    t1: f64,
    y1: Vecn<N>,
    f1: Vecn<N>,
}

fn axpy<const N: usize>(y: &Vecn<N>, h: f64, terms: &[(f64, &Vecn<N>)]) -> Vecn<N> {
    let mut out = *y;
    for i in 0..N {
        let mut s = 0.0;
        for (c, k) in terms {
            s += c * k[i];
        }
        out[i] += h * s;
    }
    out
}

fn norm<const N: usize>(v: &Vecn<N>, y: &Vecn<N>, spec: &QuadratureSpec) -> f64 {
    let mut s = 0.0;
    for i in 0..N {
        let sc = spec.abs_tol + spec.rel_tol * y[i].abs();
        s += (v[i] / sc).powi(2);
    }
    (s / N as f64).sqrt()
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t1` (either direction).
///
/// Steps never straddle an element of `knots`.
pub fn integrate_ode<const N: usize, F>(
    rhs: F,
    t0: f64,
    y0: Vecn<N>,
    t1: f64,
    knots: &[f64],
    spec: &QuadratureSpec,
) -> Result<OdeSolution<N>>
where
    F: Fn(f64, &Vecn<N>) -> Vecn<N>,
{
    spec.validate()?;
    if !t0.is_finite() || !t1.is_finite() {
        return crate::error::param("ODE endpoints must be finite");
    }
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let mut stops: Vec<f64> = knots
        .iter()
        .copied()
        .filter(|&k| (k - t0) * dir > 0.0 && (t1 - k) * dir > 0.0)
        .collect();
    stops.sort_by(|a, b| (a * dir).total_cmp(&(b * dir)));
    stops.dedup();
    stops.push(t1);

    let mut steps: Vec<Step<N>> = Vec::new();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y);
    let mut h: f64 = 0.0;
    for &stop in &stops {
        let span = stop - t;
        if span == 0.0 {
            continue;
        }
        if h == 0.0 || h.abs() > span.abs() {
            h = initial_step(&rhs, t, &y, &k1, span, spec);
        }
        loop {
            let remaining = stop - t;
            if remaining * dir <= 0.0 {
                break;
            }
            if remaining.abs() <= 1e-13 * t.abs().max(stop.abs()) {
                t = stop;
                break;
            }
            let mut last = false;
            if (h - remaining) * dir >= 0.0 || (remaining - h).abs() <= 1e-12 * remaining.abs() {
                h = remaining;
                last = true;
            }
            if h.abs() <= 1e-14 * t.abs().max(1e-300) || h.abs() < 1e-300 {
                return Err(Error::Step { t });
            }
            if steps.len() >= MAX_STEPS {
                return Err(Error::Step { t });
            }
            let k2 = rhs(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
            let k3 = rhs(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = rhs(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = rhs(t + C5 * h, &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let y6 = axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
            let tn = if last { stop } else { t + h };
            let k6 = rhs(t + h, &y6);
            let ynew = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let k7 = rhs(tn, &ynew);
            let mut errv = [0.0; N];
            for i in 0..N {
                errv[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            }
            let mut ymax = [0.0; N];
            for i in 0..N {
                ymax[i] = y[i].abs().max(ynew[i].abs());
            }
            let err = norm(&errv, &ymax, spec);
            if !err.is_finite() {
                h *= 0.2;
                continue;
            }
            if err <= 1.0 {
                let mut rc = [[0.0; N]; 5];
                for i in 0..N {
                    let dy = ynew[i] - y[i];
                    let bspl = h * k1[i] - dy;
                    rc[0][i] = y[i];
                    rc[1][i] = dy;
                    rc[2][i] = bspl;
                    rc[3][i] = dy - h * k7[i] - bspl;
                    rc[4][i] = h
                        * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
                }
                steps.push(Step { t, h: tn - t, rcont: rc, f0: k1 });
                t = tn;
                y = ynew;
                k1 = k7;
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                h *= fac;
                if last {
                    break;
                }
            } else {
                h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            }
        }
    }
    Ok(OdeSolution { steps, t0, t1, y1: y, f1: k1 })
}

fn initial_step<const N: usize, F>(rhs: &F, t: f64, y: &Vecn<N>, f0: &Vecn<N>, span: f64, spec: &QuadratureSpec) -> f64
where
    F: Fn(f64, &Vecn<N>) -> Vecn<N>,
{
    let d0 = norm(y, y, spec);
    let d1 = norm(f0, y, spec);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span.abs().max(1e-300) } else { 0.01 * d0 / d1 };
    h0 = h0.min(span.abs());
    let y1 = axpy(y, h0 * span.signum(), &[(1.0, f0)]);
    let f1 = rhs(t + h0 * span.signum(), &y1);
    let mut df = [0.0; N];
    for i in 0..N {
        df[i] = f1[i] - f0[i];
    }
    let d2 = norm(&df, y, spec) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6 * span.abs())
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span.abs()) * span.signum()
}

impl<const N: usize> OdeSolution<N> {
    pub fn range(&self) -> (f64, f64) {
        (self.t0.min(self.t1), self.t0.max(self.t1))
    }

    pub fn final_state(&self) -> Vecn<N> {
        self.y1
    }

    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    /// Accepted step boundaries in integration order.
    pub fn mesh(&self) -> Vec<f64> {
        let mut m: Vec<f64> = self.steps.iter().map(|s| s.t).collect();
        m.push(self.t1);
        m
    }

    fn locate(&self, t: f64) -> Option<usize> {
        if self.steps.is_empty() {
            return None;
        }
        let forward = self.t1 >= self.t0;
        let i = if forward {
            self.steps.partition_point(|s| s.t <= t)
        } else {
            self.steps.partition_point(|s| s.t >= t)
        };
        Some(i.saturating_sub(1))
    }

    /// Dense-output state and derivative at `t` (clamped to the run).
    pub fn eval(&self, t: f64) -> (Vecn<N>, Vecn<N>) {
        let (lo, hi) = self.range();
        let t = t.clamp(lo, hi);
        if t == self.t1 {
            return (self.y1, self.f1);
        }
        let Some(i) = self.locate(t) else {
            return (self.y1, self.f1);
        };
        let s = &self.steps[i];
        let th = (t - s.t) / s.h;
        let th1 = 1.0 - th;
        let mut y = [0.0; N];
        let mut dy = [0.0; N];
        for k in 0..N {
            let r = &s.rcont;
            y[k] = r[0][k] + th * (r[1][k] + th1 * (r[2][k] + th * (r[3][k] + th1 * r[4][k])));
            // d/dθ of the interpolant, divided by h.
            let inner = r[3][k] + th1 * r[4][k];
            let d_inner = -r[4][k];
            let mid = r[2][k] + th * inner;
            let d_mid = inner + th * d_inner;
            let outer = r[1][k] + th1 * mid;
            let d_outer = -mid + th1 * d_mid;
            dy[k] = (outer + th * d_outer) / s.h;
        }
        if th == 0.0 {
            dy = s.f0;
        }
        (y, dy)
    }
}

/// Scalar wrapper returning the dense solution as a profile on the
/// integration range. The second derivative is taken from the interpolant.
pub fn integrate_ode_scalar<F>(
    rhs: F,
    t0: f64,
    y0: f64,
    t1: f64,
    knots: &[f64],
    spec: &QuadratureSpec,
) -> Result<Profile>
where
    F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
{
    let rhs = Arc::new(rhs);
    let r2 = rhs.clone();
    let sol = integrate_ode(move |t, y: &[f64; 1]| [r2(t, y[0])], t0, [y0], t1, knots, spec)?;
    let (lo, hi) = sol.range();
    let sol = Arc::new(sol);
    let piece = move |t: f64| {
        let (y, _) = sol.eval(t);
        let d1 = rhs(t, y[0]);
        Jet::new(y[0], d1, f64::NAN)
    };
    if lo == hi {
        return crate::error::param("ODE interval is empty");
    }
    Ok(Profile::smooth(lo, hi, piece).with_order(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_solution() {
        let p = integrate_ode_scalar(|_, _| 0.0, 0.0, 5.0, 3.0, &[], &QuadratureSpec::default()).unwrap();
        assert_eq!(p.eval(1.7, 0).unwrap(), 5.0);
    }

    #[test]
    fn exponential() {
        let p = integrate_ode_scalar(|_, y| y, 0.0, 1.0, 1.0, &[], &QuadratureSpec::default()).unwrap();
        assert!((p.eval(1.0, 0).unwrap() - std::f64::consts::E).abs() < 1e-9);
        assert!((p.eval(0.5, 0).unwrap() - 0.5f64.exp()).abs() < 1e-9);
    }

    #[test]
    fn backward_run_recovers_start() {
        let spec = QuadratureSpec::default();
        let fwd = integrate_ode(|t, y: &[f64; 1]| [y[0] * t.cos() + 0.2], 0.0, [0.3], 4.0, &[1.5], &spec).unwrap();
        let yend = fwd.final_state();
        let back = integrate_ode(|t, y: &[f64; 1]| [y[0] * t.cos() + 0.2], 4.0, yend, 0.0, &[1.5], &spec).unwrap();
        let d = (back.final_state()[0] - 0.3).abs();
        assert!(d < 1e-8, "{d} {} {}", fwd.step_count(), back.step_count());
    }

    #[test]
    fn steps_respect_knots() {
        let spec = QuadratureSpec::default();
        let sol = integrate_ode(|_, y: &[f64; 1]| [y[0]], 0.0, [1.0], 2.0, &[0.7, 1.3], &spec).unwrap();
        let mesh = sol.mesh();
        assert!(mesh.contains(&0.7) && mesh.contains(&1.3));
    }

    #[test]
    fn harmonic_oscillator_system() {
        let spec = QuadratureSpec::default();
        let sol = integrate_ode(|_, y: &[f64; 2]| [y[1], -y[0]], 0.0, [0.0, 1.0], 10.0, &[], &spec).unwrap();
        let (y, dy) = sol.eval(7.3);
        assert!((y[0] - 7.3f64.sin()).abs() < 1e-8);
        assert!((dy[0] - 7.3f64.cos()).abs() < 1e-7);
    }
}
