use std::sync::{Arc, OnceLock};

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

type Integrand = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Tabulated antiderivative `F(t) = ∫_{nodes[0]}^t f` on fine cells, with a
/// fixed 16-point Gauss rule on the partial cell. Values at nodes coincide
/// with the cumulative sums exactly.
#[derive(Clone)]
pub struct CumulativeTable {
    nodes: Vec<f64>,
    cum: Vec<f64>,
    f: Integrand,
}

fn cell(f: &Integrand, a: f64, b: f64) -> f64 {
    let (x, w) = gl16();
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let mut s = 0.0;
    for (xi, wi) in x.iter().zip(w) {
        s += wi * f(c + h * xi);
    }
    s * h
}

impl CumulativeTable {
    pub fn new(f: Integrand, nodes: Vec<f64>) -> Self {
        assert!(nodes.len() >= 2 && nodes.windows(2).all(|w| w[0] < w[1]));
        let mut cum = Vec::with_capacity(nodes.len());
        cum.push(0.0);
        for w in nodes.windows(2) {
            let last = *cum.last().unwrap();
            cum.push(last + cell(&f, w[0], w[1]));
        }
        CumulativeTable { nodes, cum, f }
    }

    /// Uniform cells of width at most `h` on `[a, b]`.
    pub fn uniform(f: Integrand, a: f64, b: f64, h: f64) -> Self {
        let m = ((b - a) / h).ceil().max(1.0) as usize;
        let nodes = (0..=m).map(|i| if i == m { b } else { a + (b - a) * i as f64 / m as f64 }).collect();
        Self::new(f, nodes)
    }

    /// Cells with `log`-width at most `dlog` on `[a, b]`, `a > 0`.
    pub fn geometric(f: Integrand, a: f64, b: f64, dlog: f64) -> Self {
        let span = (b / a).ln();
        let m = (span / dlog).ceil().max(1.0) as usize;
        let nodes = (0..=m)
            .map(|i| if i == m { b } else { a * (span * i as f64 / m as f64).exp() })
            .collect();
        Self::new(f, nodes)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.nodes[0], *self.nodes.last().unwrap())
    }

    pub fn total(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    /// `∫_{start}^t f`, with `t` clamped to the table range.
    pub fn eval(&self, t: f64) -> f64 {
        let (a, b) = self.range();
        let t = t.clamp(a, b);
        let i = self.nodes.partition_point(|&x| x <= t).saturating_sub(1);
        if i + 1 >= self.nodes.len() {
            return self.total();
        }
        self.cum[i] + cell(&self.f, self.nodes[i], t)
    }

    pub fn integrand(&self, t: f64) -> f64 {
        (self.f)(t)
    }
}
