//! End-to-end acceptance criteria. Each test prints one `PASS`/`FAIL` line.

use std::io::Write;
use vglab::comparison::{bishop_gromov_check, thm_a_certificate, ComparisonInputs};
use vglab::constructions::{
    assemble_growth_schedule, lemma1_certificate, lemma1_cone_reduction, thm_b_bubble_count, thm_b_certificate,
    thm_b_constant, thm_c_certificate,
};
use vglab::geometry::{appu_gap, curvature_at, second_variation_residual, ModelMetric};
use vglab::profile::QuadratureSpec;
use vglab::report::{Outcome, VerificationReport};
use vglab::spectral::{
    davies_simon_operator, nonnegativity_verdict, radial_bottom_spectrum, theorem_d_chain, theorem_e_chain,
    RadialOperator,
};

/// Writes the verdict line straight to stderr so it shows without `--nocapture`.
fn verdict(id: u32, title: &str, failures: &[String]) {
    let line = if failures.is_empty() {
        format!("PASS {id:>2} {title}\n")
    } else {
        format!("FAIL {id:>2} {title}: {}\n", failures.join("; "))
    };
    std::io::stderr().write_all(line.as_bytes()).unwrap();
    assert!(failures.is_empty(), "criterion {id} failed");
}

fn report_failures(tag: &str, rep: &VerificationReport, out: &mut Vec<String>) {
    if rep.overall != Outcome::Pass {
        let names: Vec<&str> = rep.checks.iter().filter(|c| !c.passed()).map(|c| c.name.as_str()).collect();
        out.push(format!("{tag}: {:?} {}", rep.overall, names.join(",")));
    }
}

fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64)).collect()
}

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

#[test]
fn c01_canonical_curvature() {
    let mut bad = vec![];
    for n in [2usize, 3, 4] {
        for (m, k) in [(ModelMetric::euclidean(n), 0.0), (ModelMetric::sphere(n), 1.0), (ModelMetric::hyperbolic(n), -1.0)] {
            for r in log_grid(0.05, 3.0, 50) {
                let c = curvature_at(&m, r).unwrap();
                let ric = (n as f64 - 1.0) * k;
                let err = [c.k_rad - k, c.k_tan - k, c.ric_rad - ric, c.ric_tan - ric]
                    .iter()
                    .fold(0f64, |a, x| a.max(x.abs()));
                if err >= 1e-10 {
                    bad.push(format!("{} n={n} r={r:.3}: {err:.2e}", m.label));
                }
            }
        }
    }
    verdict(1, "constant-curvature oracle", &bad);
}

#[test]
fn c02_second_variation() {
    let metrics = [
        ModelMetric::euclidean(3),
        ModelMetric::sphere(3),
        ModelMetric::hyperbolic(4),
        ModelMetric::asinh_cone(3),
        ModelMetric::bump_cone(3, 0.05, 2.0).unwrap(),
    ];
    let mut bad = vec![];
    for m in &metrics {
        for i in 0..20 {
            let r = 0.15 + 2.7 * i as f64 / 19.0;
            let res = second_variation_residual(m, r).unwrap();
            let gap = appu_gap(m, r).unwrap();
            if res.abs() >= 1e-7 || gap < -1e-8 {
                bad.push(format!("{} r={r:.3}: residual {res:.2e}, gap {gap:.2e}", m.label));
            }
        }
    }
    verdict(2, "second-variation identity and area inequality", &bad);
}

#[test]
fn c03_two_ended_model() {
    let mut bad = vec![];
    let mut ratios = vec![];
    for r in [10.0, 1e2, 1e3, 1e4] {
        let rep = lemma1_certificate(3, r, &spec()).unwrap();
        report_failures(&format!("R={r}"), &rep, &mut bad);
        ratios.push(rep.constants_used["rho_over_R"]);
    }
    if !ratios.windows(2).all(|w| w[1] > w[0]) || ratios[3] <= 0.9 {
        bad.push(format!("support ratios {ratios:?}"));
    }
    verdict(3, "two-ended model certificates, R in 10..1e4", &bad);
}

#[test]
fn c04_comparison_pipeline() {
    let mut metrics = vec![ModelMetric::truncated_hyperbolic(3, 4.0, 5.0).unwrap()];
    for r in [1e2, 1e3] {
        metrics.push(lemma1_cone_reduction(3, r).unwrap().metric);
    }
    let mut bad = vec![];
    for m in &metrics {
        for nu in [3.25, 3.5, 4.0] {
            let r0 = ComparisonInputs::from_metric(m, nu, &spec()).unwrap().scaling_radius().unwrap();
            let radii = log_grid(1e-2 * r0, 1e3 * r0, 40);
            let rep = thm_a_certificate(m, nu, &radii, &spec()).unwrap();
            report_failures(&format!("{} nu={nu}", m.label), &rep, &mut bad);
        }
    }
    verdict(4, "comparison pipeline residuals, mass bound, volume bound, equivariance", &bad);
}

#[test]
fn c05_multi_bubble_metric() {
    let mut bad = vec![];
    for r in [1e2, 1e3, 1e4] {
        let rep = thm_b_certificate(3, r, &spec()).unwrap();
        report_failures(&format!("R={r}"), &rep, &mut bad);
        if rep.constants_used.get("CB").is_some_and(|&c| c != thm_b_constant(3)) {
            bad.push("budget constant varies".into());
        }
    }
    if thm_b_bubble_count(3, 1e4) != 4 {
        bad.push(format!("N(1e4) = {}", thm_b_bubble_count(3, 1e4)));
    }
    verdict(5, "multi-bubble certificates, R in 1e2..1e4", &bad);
}

#[test]
fn c06_infinite_assemblies() {
    let mut bad = vec![];
    let rep = thm_c_certificate(3, 5, &spec()).unwrap();
    report_failures("punctured", &rep, &mut bad);
    let a: Vec<f64> = (1..=6).map(|k| 1.0 / k as f64).collect();
    let (_, rep) = assemble_growth_schedule(3, &a, &spec()).unwrap();
    report_failures("growth", &rep, &mut bad);
    verdict(6, "punctured assembly and prescribed growth schedule", &bad);
}

#[test]
fn c07_spectral_calibration() {
    let mut bad = vec![];
    let h2 = ModelMetric::hyperbolic(2);
    let free = radial_bottom_spectrum(&RadialOperator::shifted(&h2, 0.0).unwrap(), 30.0, 800).unwrap();
    if (free - 0.25).abs() > 0.02 {
        bad.push(format!("hyperbolic bottom {free}"));
    }
    for (lam, want) in [(0.23, Some(true)), (0.25, None), (0.27, Some(false))] {
        let v = nonnegativity_verdict(&RadialOperator::shifted(&h2, lam).unwrap(), 0.02).unwrap();
        if v.nonneg != want {
            bad.push(format!("shift {lam}: {:?}", v.nonneg));
        }
    }
    for (lam, want) in [(0.9, Some(true)), (1.1, Some(false))] {
        let v = nonnegativity_verdict(&davies_simon_operator(4, lam).unwrap(), 0.02).unwrap();
        if v.nonneg != want {
            bad.push(format!("inverse-square {lam}: {:?}", v.nonneg));
        }
    }
    verdict(7, "spectral calibration", &bad);
}

#[test]
fn c08_spectral_chains() {
    let mut bad = vec![];
    let bump = ModelMetric::bump_cone(3, 0.05, 2.0).unwrap();
    for r in [1.0, 10.0, 100.0] {
        for m in [ModelMetric::euclidean(3), ModelMetric::hyperbolic(3)] {
            match theorem_d_chain(&m, 0.6, 5.0, r, &spec()) {
                Ok(rep) => report_failures(&format!("cartan-hadamard {} R={r}", m.label), &rep, &mut bad),
                Err(e) => bad.push(format!("cartan-hadamard {} R={r}: {e}", m.label)),
            }
        }
        for m in [&ModelMetric::euclidean(3), &bump] {
            match theorem_e_chain(m, 0.6, 5.0, r, &spec()) {
                Ok(rep) => report_failures(&format!("ricci {} R={r}", m.label), &rep, &mut bad),
                Err(e) => bad.push(format!("ricci {} R={r}: {e}", m.label)),
            }
        }
    }
    verdict(8, "spectral volume chains", &bad);
}

#[test]
fn c09_bishop_gromov() {
    let mut bad = vec![];
    for (m, hi) in [(ModelMetric::euclidean(3), 10.0), (ModelMetric::sphere(3), 3.0), (ModelMetric::asinh_cone(3), 10.0)] {
        let radii: Vec<f64> = (1..=30).map(|i| hi * i as f64 / 30.0).collect();
        let rep = bishop_gromov_check(&m, &radii, &spec()).unwrap();
        report_failures(&m.label, &rep, &mut bad);
    }
    verdict(9, "Bishop-Gromov on nonnegatively curved cones", &bad);
}

fn suite() -> Vec<String> {
    let s = spec();
    let m = lemma1_cone_reduction(3, 100.0).unwrap().metric;
    let v = nonnegativity_verdict(&davies_simon_operator(4, 0.9).unwrap(), 0.02).unwrap();
    vec![
        lemma1_certificate(3, 100.0, &s).unwrap().to_json(),
        thm_b_certificate(3, 100.0, &s).unwrap().to_json(),
        thm_c_certificate(3, 5, &s).unwrap().to_json(),
        thm_a_certificate(&m, 3.5, &log_grid(0.1, 1e3, 12), &s).unwrap().to_json(),
        theorem_e_chain(&ModelMetric::euclidean(3), 0.6, 5.0, 10.0, &s).unwrap().to_json(),
        vglab::report::to_json_string(&v),
    ]
}

#[test]
fn c10_determinism() {
    let (a, b) = (suite(), suite());
    let bad: Vec<String> = a.iter().zip(&b).enumerate().filter(|(_, (x, y))| x != y).map(|(i, _)| format!("report {i} differs")).collect();
    verdict(10, "byte-identical reports across runs", &bad);
}
