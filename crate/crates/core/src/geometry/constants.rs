use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Sphere and ball volumes attached to a dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionConstants {
    pub n: usize,
    /// Volume of the unit `(n-1)`-sphere.
    pub sigma_nm1: f64,
    /// Volume of the Euclidean unit `n`-ball.
    pub omega_n: f64,
    /// Volume of the unit `n`-sphere.
    pub sigma_n: f64,
}

/// `Γ(k/2)` for a positive integer `k`.
pub fn gamma_half(k: usize) -> f64 {
    assert!(k >= 1);
    let (mut g, mut x) = if k.is_multiple_of(2) { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    let target = k as f64 / 2.0;
    while x < target {
        g *= x;
        x += 1.0;
    }
    g
}

/// Volume of the unit `k`-sphere, `2π^{(k+1)/2}/Γ((k+1)/2)`.
pub fn sphere_volume(k: usize) -> f64 {
    2.0 * PI.powf((k + 1) as f64 / 2.0) / gamma_half(k + 1)
}

impl DimensionConstants {
    pub fn new(n: usize) -> Self {
        let sigma_nm1 = sphere_volume(n - 1);
        DimensionConstants { n, sigma_nm1, omega_n: sigma_nm1 / n as f64, sigma_n: sphere_volume(n) }
    }
}
