use crate::error::{param, Result};
use crate::profile::{CumulativeTable, Jet, PieceFn, Profile};
use std::f64::consts::LN_2;
use std::sync::{Arc, OnceLock};

fn bump(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

fn bump_d(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp() / (s * s)
    } else {
        0.0
    }
}

/// Smooth step: 1 for `s <= -1`, 0 for `s >= 1`, with `χ(s) + χ(−s) = 1`.
/// Returns value and derivative.
pub fn chi(s: f64) -> (f64, f64) {
    if s <= -1.0 {
        return (1.0, 0.0);
    }
    if s >= 1.0 {
        return (0.0, 0.0);
    }
    let (a, b) = (bump(1.0 - s), bump(1.0 + s));
    let (da, db) = (-bump_d(1.0 - s), bump_d(1.0 + s));
    let d = a + b;
    (a / d, (da * b - a * db) / (d * d))
}

const RAMP: f64 = LN_2 / 2.0;

/// `ℓ'` and `ℓ''` for `t >= 0`.
fn slope(t: f64) -> (f64, f64) {
    if t <= 1.0 {
        (RAMP * t, RAMP)
    } else if t >= 2.0 {
        (t.ln(), 1.0 / t)
    } else {
        let (c, dc) = chi(3.0 - 2.0 * t);
        let (w, dw) = (c, -2.0 * dc);
        let (lin, log) = (RAMP * t, t.ln());
        let d1 = (1.0 - w) * lin + w * log;
        let d2 = (1.0 - w) * RAMP + w / t + dw * (log - lin);
        (d1, d2)
    }
}

/// The even convex profile `ℓ`: `ℓ(0) = 1`, `ℓ'(t) = log t` for `t >= 2`,
/// a quadratic near the origin and a smooth blend of slopes on `[1, 2]`.
#[derive(Clone)]
pub struct Ell {
    blend: CumulativeTable,
    at_one: f64,
    at_two: f64,
    sup_d2: f64,
    profile: Profile,
}

impl std::fmt::Debug for Ell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Ell").field("ell_2", &self.at_two).field("sup_d2", &self.sup_d2).finish()
    }
}

impl Ell {
    fn build() -> Self {
        let blend = CumulativeTable::uniform(Arc::new(|t| slope(t).0), 1.0, 2.0, 1.0 / 512.0);
        let at_one = 1.0 + RAMP / 2.0;
        let at_two = at_one + blend.total();

        // Convexity on the blend and the supremum of ℓ'' on [0, 2].
        let grid = 20_000;
        let (mut min_d2, mut best, mut best_t) = (f64::INFINITY, RAMP, 1.0);
        for i in 0..=grid {
            let t = 1.0 + i as f64 / grid as f64;
            let d2 = slope(t).1;
            min_d2 = min_d2.min(d2);
            if d2 > best {
                best = d2;
                best_t = t;
            }
        }
        assert!(min_d2 > 0.0, "blend of slopes lost convexity");
        let (mut a, mut b) = ((best_t - 1e-4).max(1.0), (best_t + 1e-4).min(2.0));
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..80 {
            let (x1, x2) = (b - g * (b - a), a + g * (b - a));
            if slope(x1).1 > slope(x2).1 {
                b = x2;
            } else {
                a = x1;
            }
        }
        let sup_d2 = best.max(slope(0.5 * (a + b)).1);

        let mut ell = Ell { blend, at_one, at_two, sup_d2, profile: Profile::identity(0.0, 1.0) };
        let me = ell.clone();
        let f: PieceFn = Arc::new(move |t| me.jet(t));
        ell.profile = Profile::new(
            f64::NEG_INFINITY,
            f64::INFINITY,
            vec![-2.0, -1.0, 1.0, 2.0],
            vec![f.clone(), f.clone(), f.clone(), f.clone(), f],
            2,
            2,
        )
        .expect("valid knots");
        ell
    }

    /// Value and derivatives at any real `t`.
    pub fn jet(&self, t: f64) -> Jet {
        let a = t.abs();
        let (d1, d2) = slope(a);
        let v = if a <= 1.0 {
            1.0 + RAMP * a * a / 2.0
        } else if a >= 2.0 {
            self.at_two + a * a.ln() - a - 2.0 * LN_2 + 2.0
        } else {
            self.at_one + self.blend.eval(a)
        };
        Jet::new(v, d1 * t.signum(), d2)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.jet(t).value
    }

    pub fn d1(&self, t: f64) -> f64 {
        slope(t.abs()).0 * t.signum()
    }

    pub fn d2(&self, t: f64) -> f64 {
        slope(t.abs()).1
    }

    /// `ℓ(2)`.
    pub fn at_two(&self) -> f64 {
        self.at_two
    }

    /// `sup_{[0,2]} ℓ''`.
    pub fn sup_second_derivative(&self) -> f64 {
        self.sup_d2
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }
}

/// The process-wide `ℓ`, built once.
pub fn ell() -> &'static Ell {
    static ELL: OnceLock<Ell> = OnceLock::new();
    ELL.get_or_init(Ell::build)
}

/// `ℓ` as a profile on the real line.
pub fn build_ell() -> Profile {
    ell().profile().clone()
}

/// `a(R) = R − ℓ(R)/log R`.
pub fn j_offset(r: f64) -> f64 {
    r - ell().value(r) / r.ln()
}

/// `j_R = ℓ/log R` on `[−R, R]`, continued by `|t| − a(R)`.
pub fn build_j(r: f64) -> Result<Profile> {
    if !(r >= 2.0) {
        return param(format!("j_R needs R >= 2, got {r}"));
    }
    let lr = r.ln();
    let a = j_offset(r);
    let e = ell();
    let f: PieceFn = Arc::new(move |t: f64| {
        if t.abs() >= r {
            Jet::new(t.abs() - a, t.signum(), 0.0)
        } else {
            let j = e.jet(t);
            Jet::new(j.value / lr, j.d1 / lr, j.d2 / lr)
        }
    });
    let mut knots = vec![-r, -2.0, -1.0, 1.0, 2.0, r];
    knots.dedup();
    let pieces = vec![f; knots.len() + 1];
    Profile::new(f64::NEG_INFINITY, f64::INFINITY, knots, pieces, 2, 1)
}
