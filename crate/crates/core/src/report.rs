//! Structured pass/fail records and their deterministic serialization.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;
use std::io;
use std::sync::atomic::{AtomicU64, Ordering};

static TOLERANCE_SCALE: AtomicU64 = AtomicU64::new(1f64.to_bits());

/// Multiplies the tolerance of every subsequently built [`Check`].
pub fn set_tolerance_scale(k: f64) {
    assert!(k > 0.0 && k.is_finite(), "tolerance scale must be positive");
    TOLERANCE_SCALE.store(k.to_bits(), Ordering::Relaxed);
}

pub fn tolerance_scale() -> f64 {
    f64::from_bits(TOLERANCE_SCALE.load(Ordering::Relaxed))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Outcome {
    Pass,
    Fail,
    Inconclusive,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail => 1,
            Outcome::Inconclusive => 2,
        }
    }
}

/// One inequality `lhs <= rhs` (or an equality within a tolerance).
/// `pass` is `None` when the outcome is inconclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: Option<bool>,
}

impl Check {
    /// `lhs <= rhs + tol`.
    pub fn le(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let slack = rhs - lhs;
        Check { name: name.into(), lhs, rhs, slack, pass: Some(slack >= -tol * tolerance_scale()) }
    }

    /// `lhs >= rhs - tol`.
    pub fn ge(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let slack = lhs - rhs;
        Check { name: name.into(), lhs, rhs, slack, pass: Some(slack >= -tol * tolerance_scale()) }
    }

    /// `|lhs - rhs| <= tol`; slack is the unused part of the tolerance.
    pub fn close(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let slack = tol * tolerance_scale() - (lhs - rhs).abs();
        Check { name: name.into(), lhs, rhs, slack, pass: Some(slack >= 0.0) }
    }

    /// Strict `lhs < rhs`.
    pub fn lt(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let slack = rhs - lhs;
        Check { name: name.into(), lhs, rhs, slack, pass: Some(slack > 0.0) }
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        let v = if ok { 1.0 } else { 0.0 };
        Check { name: name.into(), lhs: v, rhs: 1.0, slack: v - 1.0, pass: Some(ok) }
    }

    pub fn inconclusive(mut self) -> Self {
        self.pass = None;
        self
    }

    pub fn passed(&self) -> bool {
        self.pass == Some(true)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub certificate_id: String,
    pub inputs: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub constants_used: BTreeMap<String, f64>,
    pub overall: Outcome,
    pub tolerances: BTreeMap<String, f64>,
}

impl VerificationReport {
    pub fn new(id: impl Into<String>) -> Self {
        VerificationReport {
            certificate_id: id.into(),
            inputs: BTreeMap::new(),
            checks: vec![],
            constants_used: BTreeMap::new(),
            overall: Outcome::Pass,
            tolerances: BTreeMap::new(),
        }
    }

    pub fn input(&mut self, key: &str, v: impl Into<Value>) -> &mut Self {
        self.inputs.insert(key.into(), v.into());
        self
    }

    pub fn constant(&mut self, key: &str, v: f64) -> &mut Self {
        self.constants_used.insert(key.into(), v);
        self
    }

    pub fn tolerance(&mut self, key: &str, v: f64) -> &mut Self {
        self.tolerances.insert(key.into(), v);
        self
    }

    pub fn push(&mut self, c: Check) -> &mut Self {
        self.checks.push(c);
        self.overall = Self::combine(&self.checks);
        self
    }

    pub fn extend(&mut self, cs: impl IntoIterator<Item = Check>) -> &mut Self {
        for c in cs {
            self.push(c);
        }
        self
    }

    /// FAIL if any check fails, else INCONCLUSIVE if any is undecided.
    pub fn combine(checks: &[Check]) -> Outcome {
        if checks.iter().any(|c| c.pass == Some(false)) {
            Outcome::Fail
        } else if checks.iter().any(|c| c.pass.is_none()) {
            Outcome::Inconclusive
        } else {
            Outcome::Pass
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| c.pass == Some(false)).collect()
    }

    pub fn to_json(&self) -> String {
        to_json_string(self)
    }
}

/// Formats a float like C's `%.12e`.
pub fn fmt_e12(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mant, exp) = s.split_once('e').expect("exponent present");
    let e: i32 = exp.parse().expect("integer exponent");
    let sign = if e < 0 { '-' } else { '+' };
    format!("{mant}e{sign}{:02}", e.abs())
}

struct E12Formatter;

impl serde_json::ser::Formatter for E12Formatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_e12(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
}

/// Serializes with sorted object keys and `%.12e` floats; non-finite
/// floats become `null`.
pub fn to_json_string<T: Serialize>(v: &T) -> String {
    let value = serde_json::to_value(v).expect("serializable");
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, E12Formatter);
    value.serialize(&mut ser).expect("in-memory write");
    buf.push(b'\n');
    String::from_utf8(buf).expect("utf-8")
}
