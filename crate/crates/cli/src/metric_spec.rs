use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use std::path::Path;
use vglab::constructions::{
    assemble_growth_schedule, assemble_thm_b, assemble_thm_c, build_lemma1_metric_with_delta, build_lemma2_metric,
    delta_star, lemma1_cone_reduction_with_delta, lemma1_constant, ConformalBubbleMetric,
};
use vglab::geometry::{ModelMetric, PolyPiece};
use vglab::profile::QuadratureSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Kind {
    Euclidean,
    Sphere,
    Hyperbolic,
    ConeCustom,
    Lemma1,
    Lemma2,
    ThmB,
    ThmC,
    GrowthSchedule,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(rename = "Rbar", default, skip_serializing_if = "Option::is_none")]
    pub rbar: Option<f64>,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Mollifier width replacing `δ*` in the two-ended model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Growth weights `a_1, a_2, …`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<f64>>,
    /// Polynomial warp pieces of a custom cone.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pieces: Option<Vec<PolyPiece>>,
    /// Hyperbolic curvature support and the end of the blend to flat.
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(rename = "T_end", default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
}

impl Parameters {
    fn present(&self) -> Vec<&'static str> {
        let mut out = vec![];
        let flags = [
            ("R", self.r.is_some()),
            ("Rbar", self.rbar.is_some()),
            ("K", self.k.is_some()),
            ("delta", self.delta.is_some()),
            ("a", self.a.is_some()),
            ("pieces", self.pieces.is_some()),
            ("T", self.t.is_some()),
            ("T_end", self.t_end.is_some()),
        ];
        for (name, set) in flags {
            if set {
                out.push(name);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    pub kind: Kind,
    pub n: usize,
    #[serde(default)]
    pub parameters: Parameters,
}

/// A spec turned into core objects.
pub enum Resolved {
    /// A warped model, plus the cone standing in for it where a cone is needed.
    Model { model: ModelMetric, cone: Option<Box<ModelMetric>>, derived: Map<String, Value> },
    Bubbles { derived: Map<String, Value> },
}

impl Resolved {
    pub fn derived(&self) -> &Map<String, Value> {
        match self {
            Resolved::Model { derived, .. } | Resolved::Bubbles { derived, .. } => derived,
        }
    }

    /// The warped model, for pointwise quantities.
    pub fn model(&self) -> Result<&ModelMetric> {
        match self {
            Resolved::Model { model, .. } => Ok(model),
            Resolved::Bubbles { .. } => bail!("this metric is a bubble assembly, not a single warped model"),
        }
    }

    /// A rotationally symmetric metric on ℝⁿ.
    pub fn cone(&self) -> Result<&ModelMetric> {
        match self {
            Resolved::Model { cone: Some(c), .. } => Ok(c),
            Resolved::Model { model, cone: None, .. } => Ok(model),
            Resolved::Bubbles { .. } => bail!("this metric is a bubble assembly, not a single warped model"),
        }
    }
}

impl MetricSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let spec: MetricSpec =
            serde_json::from_str(&text).map_err(|e| anyhow!("{}: {e}", path.display()))?;
        spec.validate()?;
        Ok(spec)
    }

    #[cfg(test)]
    pub fn to_json(&self) -> String {
        vglab::report::to_json_string(self)
    }

    pub fn validate(&self) -> Result<()> {
        let (required, optional): (&[&str], &[&str]) = match self.kind {
            Kind::Euclidean | Kind::Sphere => (&[], &[]),
            Kind::Hyperbolic => (&[], &["T", "T_end"]),
            Kind::ConeCustom => (&["pieces"], &[]),
            Kind::Lemma1 => (&["R"], &["delta"]),
            Kind::Lemma2 => (&["R", "Rbar"], &[]),
            Kind::ThmB => (&["R"], &[]),
            Kind::ThmC => (&["K"], &[]),
            Kind::GrowthSchedule => (&["a"], &[]),
        };
        let min_n = match self.kind {
            Kind::Euclidean | Kind::Sphere | Kind::Hyperbolic | Kind::ConeCustom => 2,
            _ => 3,
        };
        if self.n < min_n {
            bail!("kind {:?} needs n >= {min_n}, got {}", self.kind, self.n);
        }
        let present = self.parameters.present();
        for name in required {
            if !present.contains(name) {
                bail!("kind {:?} requires parameter `{name}`", self.kind);
            }
        }
        for name in &present {
            if !required.contains(name) && !optional.contains(name) {
                bail!("parameter `{name}` does not apply to kind {:?}", self.kind);
            }
        }
        if self.parameters.t.is_some() != self.parameters.t_end.is_some() {
            bail!("`T` and `T_end` must be given together");
        }
        Ok(())
    }

    pub fn resolve(&self, spec: &QuadratureSpec) -> Result<Resolved> {
        self.validate()?;
        let n = self.n;
        let p = &self.parameters;
        let mut derived = Map::new();
        let consts = vglab::geometry::DimensionConstants::new(n);
        derived.insert("omega_n".into(), json!(consts.omega_n));
        derived.insert("sigma_nm1".into(), json!(consts.sigma_nm1));
        let model = |model: ModelMetric, cone: Option<Box<ModelMetric>>, mut derived: Map<String, Value>| {
            derived.insert("knots".into(), json!(model.knots()));
            derived.insert("flat_from".into(), json!(model.flat_from));
            Resolved::Model { model, cone, derived }
        };
        Ok(match self.kind {
            Kind::Euclidean => model(ModelMetric::euclidean(n), None, derived),
            Kind::Sphere => model(ModelMetric::sphere(n), None, derived),
            Kind::Hyperbolic => match (p.t, p.t_end) {
                (Some(t), Some(e)) => model(ModelMetric::truncated_hyperbolic(n, t, e)?, None, derived),
                _ => model(ModelMetric::hyperbolic(n), None, derived),
            },
            Kind::ConeCustom => {
                let pieces = p.pieces.as_deref().unwrap_or_default();
                model(ModelMetric::polynomial_cone(n, pieces, "cone_custom")?, None, derived)
            }
            Kind::Lemma1 => {
                let r = p.r.unwrap_or_default();
                let delta = p.delta.unwrap_or_else(delta_star);
                let m = build_lemma1_metric_with_delta(n, r, delta)?;
                let cone = lemma1_cone_reduction_with_delta(n, r, delta)?;
                derived.insert("delta".into(), json!(m.delta));
                derived.insert("T".into(), json!(m.t_scale));
                derived.insert("rho_R".into(), json!(m.rho_r));
                derived.insert("tail_knot".into(), json!(m.tail_knot));
                derived.insert("sigma_bound".into(), json!(m.sigma_bound));
                derived.insert("C1".into(), json!(lemma1_constant(n)));
                derived.insert("cone_tail".into(), json!(cone.r_star));
                model(m.metric, Some(Box::new(cone.metric)), derived)
            }
            Kind::Lemma2 => {
                let m = build_lemma2_metric(n, p.rbar.unwrap_or_default(), p.r.unwrap_or_default())?;
                derived.insert("tau".into(), json!(m.tau));
                derived.insert("theta".into(), json!(m.theta));
                derived.insert("r_star".into(), json!(m.r_star));
                derived.insert("rho_out".into(), json!(m.rho_out));
                model(m.metric, None, derived)
            }
            Kind::ThmB => {
                let c = assemble_thm_b(n, p.r.unwrap_or_default(), spec)?;
                derived.insert("N".into(), json!(c.bubbles.len()));
                bubbles(c, derived)
            }
            Kind::ThmC => {
                let (c, sched) = assemble_thm_c(n, p.k.unwrap_or_default(), spec)?;
                derived.insert("schedule".into(), serde_json::to_value(&sched)?);
                bubbles(c, derived)
            }
            Kind::GrowthSchedule => {
                let (c, rep) = assemble_growth_schedule(n, p.a.as_deref().unwrap_or_default(), spec)?;
                derived.insert("shift".into(), json!(rep.constants_used.get("shift")));
                derived.insert("N".into(), json!(c.bubbles.len()));
                bubbles(c, derived)
            }
        })
    }
}

fn bubbles(c: ConformalBubbleMetric, mut derived: Map<String, Value>) -> Resolved {
    let centers: Vec<&Vec<f64>> = c.bubbles.iter().map(|b| &b.center).collect();
    let supports: Vec<f64> = c.bubbles.iter().map(|b| b.support_radius).collect();
    derived.insert("centers".into(), json!(centers));
    derived.insert("support_radii".into(), json!(supports));
    derived.insert("punctures".into(), json!(c.punctures));
    Resolved::Bubbles { derived }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<MetricSpec> {
        let s: MetricSpec = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    #[test]
    fn round_trip() {
        let s = parse(r#"{"kind": "lemma2", "n": 3, "parameters": {"R": 100, "Rbar": 5}}"#).unwrap();
        assert_eq!(parse(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn unknown_key_is_named() {
        let e = parse(r#"{"kind": "lemma1", "n": 3, "parameters": {"radius": 10}}"#).unwrap_err();
        assert!(e.to_string().contains("radius"), "{e}");
    }

    #[test]
    fn incomplete_and_misplaced_parameters() {
        assert!(parse(r#"{"kind": "lemma2", "n": 3, "parameters": {"R": 100}}"#).is_err());
        assert!(parse(r#"{"kind": "sphere", "n": 3, "parameters": {"R": 100}}"#).is_err());
        assert!(parse(r#"{"kind": "thm_b", "n": 2, "parameters": {"R": 100}}"#).is_err());
    }
}
