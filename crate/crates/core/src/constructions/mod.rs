//! Explicit metric families: the convex profile `ℓ` and its smoothings,
//! the two-ended model `h_R`, the capped cone `g_{R̄,R}`, their conformal
//! realizations on `ℝⁿ`, and multi-bubble assemblies. Every builder has a
//! matching certificate.

mod bubbles;
mod conformal;
mod ell;
mod growth;
mod lemma1;
mod lemma2;
mod smoothing;

pub use bubbles::{
    assemble_thm_b, assemble_thm_c, eval_bubble_field, thm_b_bubble_count, thm_b_certificate, thm_c_certificate,
    thm_c_schedule, Bubble, BubbleSource, ConformalBubbleMetric, FieldSample, ThmCSchedule,
};
pub use conformal::{factor_diagnostics, ConformalFactor, FactorDiagnostics};
pub use ell::{build_ell, build_j, chi, ell, j_offset, Ell};
pub use growth::{assemble_growth_schedule, GrowthScale};
pub use lemma1::{
    build_lemma1_metric, build_lemma1_metric_with_delta, conformal_factor_profile, lemma1_certificate,
    lemma1_certificate_for, Lemma1Metric,
};
pub use lemma2::{
    build_lemma2_metric, lemma1_cone_reduction, lemma1_cone_reduction_with_delta, lemma2_certificate, lemma2_factor, solve_tau, Lemma2Metric,
};
pub use smoothing::{
    build_j_smoothed, build_mollifier, delta_star, smoothed_bound_violations, Mollifier, SmoothedProfile,
};

use crate::geometry::DimensionConstants;

/// `γ` with `∫_{−R}^{R} (ℓ'')^{n/2} ℓ^{n/2−1} <= γ (log R)^{n/2}` for `R >= 2`.
pub fn profile_gamma(n: usize) -> f64 {
    let e = ell();
    let h = n as f64 / 2.0;
    let l2 = std::f64::consts::LN_2;
    4.0 * e.sup_second_derivative().powf(h) * e.at_two().powf(h - 1.0) / l2.powf(h)
        + 2.0 * (1.0 + 1.0 / (2.0 * l2)).powf(h - 1.0)
}

/// Bound on `∫σ₋^{n/2}·(log R)^{n/2−1}` for the two-ended model.
pub fn lemma1_constant(n: usize) -> f64 {
    let d = delta_star();
    DimensionConstants::new(n).sigma_nm1 * (profile_gamma(n) + 2.0 * d) * (1.0 + d).powf(n as f64 / 2.0 - 1.0)
}

/// Bound on `∫σ₋^{n/2}·(log R)^{n/2−1}` for the capped cone.
pub fn lemma2_constant(n: usize) -> f64 {
    DimensionConstants::new(n).sigma_nm1 * profile_gamma(n)
}

/// Bound on the total `∫σ₋^{n/2}` of the multi-bubble metric at scale `R`.
pub fn thm_b_constant(n: usize) -> f64 {
    2f64.powf(n as f64 / 2.0) * lemma2_constant(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{integrate, QuadratureSpec};

    #[test]
    fn gamma_dominates_profile_integral() {
        let e = ell();
        let spec = QuadratureSpec::default();
        for n in [3usize, 4, 5] {
            let h = n as f64 / 2.0;
            for r in [2.0f64, 10.0, 100.0, 1000.0] {
                let g = |t: f64| e.d2(t).powf(h) * e.value(t).powf(h - 1.0);
                let mut breaks = vec![1.0, 2.0];
                breaks.extend(crate::profile::geometric_breaks(2.0, r, 2.0));
                let v = 2.0 * integrate(g, 0.0, r, &spec, &breaks).unwrap();
                assert!(v <= profile_gamma(n) * r.ln().powf(h), "n={n} R={r}");
            }
        }
    }
}
