//! Executable checks of the conjugate-function inequalities. Each check returns a
//! [`CheckReport`] with the computed side, the bound, the margin and a verdict.

mod jensen;
mod kolmogorov;
mod riesz;
mod zygmund;

pub use jensen::{check_lelong_jensen, check_poisson_jensen, PJ_EXCLUSION_RADIUS};
pub use kolmogorov::{check_kolmogorov, check_kolmogorov_ps};
pub use riesz::{check_riesz, check_riesz_ps, riesz_battery, riesz_constant, riesz_constant_with_source, sweep_best_constant, SweepRow, SweepTable};
pub use zygmund::{check_zygmund, check_zygmund_sharpness, zygmund_integrand, ZygmundSchedule, SHARPNESS_FACTOR};

use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{hypothesis, Result};
use crate::functions::TestFunction;
use crate::geometry::{ExhaustionLevel, ModelDomain};
use crate::measure::Engine;
use crate::point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// How the margin `bound - lhs` is judged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// `lhs <= bound`: pass when the margin exceeds the error, fail when it is
    /// below minus the error.
    Inequality,
    /// `lhs == bound`: pass when `|margin| <= error`.
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub inputs: Value,
    pub lhs: f64,
    pub bound: f64,
    pub margin: f64,
    pub error: f64,
    pub verdict: Verdict,
    pub details: Value,
}

impl CheckReport {
    pub fn new(check: &str, inputs: Value, lhs: f64, bound: f64, error: f64, criterion: Criterion) -> Self {
        let margin = bound - lhs;
        let verdict = match criterion {
            Criterion::Inequality if margin > error => Verdict::Pass,
            Criterion::Inequality if margin < -error => Verdict::Fail,
            Criterion::Inequality => Verdict::Inconclusive,
            Criterion::Identity if margin.abs() <= error => Verdict::Pass,
            Criterion::Identity if margin.is_nan() => Verdict::Inconclusive,
            Criterion::Identity => Verdict::Fail,
        };
        let details = json!({ "criterion": criterion });
        Self { check: check.into(), inputs, lhs, bound, margin, error, verdict, details }
    }

    pub fn detail(mut self, key: &str, value: impl Serialize) -> Self {
        if let Value::Object(m) = &mut self.details {
            m.insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
        }
        self
    }

    /// Downgrade to inconclusive when an estimate did not converge.
    pub fn require_converged(mut self, converged: bool) -> Self {
        if !converged {
            self.verdict = Verdict::Inconclusive;
        }
        self.detail("converged", converged)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// Combined verdict of several reports: any fail, else any inconclusive, else pass.
pub fn overall(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
    let mut out = Verdict::Pass;
    for v in verdicts {
        match v {
            Verdict::Fail => return Verdict::Fail,
            Verdict::Inconclusive => out = Verdict::Inconclusive,
            Verdict::Pass => {}
        }
    }
    out
}

/// Tolerance on `Im f(z0) = 0`.
pub const CONJUGATE_TOL: f64 = 1e-10;

/// Enforce `v(z0) = 0`, subtracting `i Im f(z0)` when `renormalize` is set.
fn normalized(check: &str, f: &TestFunction, z0: &[Complex64], renormalize: bool) -> Result<(TestFunction, f64)> {
    let v0 = f.v(z0);
    if v0.abs() <= CONJUGATE_TOL {
        return Ok((f.clone(), 0.0));
    }
    if !renormalize {
        return Err(hypothesis(check, format!("v(z0) = 0 (got Im f(z0) = {v0:e})")));
    }
    Ok(f.renormalized(z0))
}

fn inputs(f: Option<&TestFunction>, domain: &ModelDomain, extra: Value) -> Value {
    let mut m = Map::new();
    if let Some(f) = f {
        m.insert("function".into(), Value::String(f.tag()));
    }
    m.insert("domain".into(), Value::String(domain.name()));
    m.insert("z0".into(), json!(point::to_pairs(domain.z0())));
    if let Value::Object(e) = extra {
        m.extend(e);
    }
    Value::Object(m)
}

fn level_params(levels: &[ExhaustionLevel]) -> Value {
    json!(levels.iter().map(|l| l.t).collect::<Vec<_>>())
}

fn engine_json(engine: &Engine) -> Value {
    serde_json::to_value(engine).unwrap_or(Value::Null)
}

/// A hypothesis watched inside integrands: the first violation is recorded.
struct Watch {
    tripped: AtomicBool,
    worst: std::sync::Mutex<Option<f64>>,
}

impl Watch {
    fn new() -> Self {
        Self { tripped: AtomicBool::new(false), worst: std::sync::Mutex::new(None) }
    }

    fn observe(&self, ok: bool, value: f64) {
        if !ok && !self.tripped.swap(true, Ordering::Relaxed) {
            *self.worst.lock().unwrap() = Some(value);
        }
    }

    fn violation(&self) -> Option<f64> {
        if self.tripped.load(Ordering::Relaxed) {
            *self.worst.lock().unwrap()
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_rules() {
        let i = Value::Null;
        assert_eq!(CheckReport::new("x", i.clone(), 1.0, 2.0, 0.1, Criterion::Inequality).verdict, Verdict::Pass);
        assert_eq!(CheckReport::new("x", i.clone(), 2.0, 1.0, 0.1, Criterion::Inequality).verdict, Verdict::Fail);
        assert_eq!(CheckReport::new("x", i.clone(), 1.0, 1.05, 0.1, Criterion::Inequality).verdict, Verdict::Inconclusive);
        assert_eq!(CheckReport::new("x", i.clone(), 1.0, 1.05, 0.1, Criterion::Identity).verdict, Verdict::Pass);
        assert_eq!(CheckReport::new("x", i.clone(), 1.0, 1.5, 0.1, Criterion::Identity).verdict, Verdict::Fail);
        let r = CheckReport::new("x", i, 1.0, 2.0, 0.1, Criterion::Inequality).require_converged(false);
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert_eq!(overall([Verdict::Pass, Verdict::Inconclusive]), Verdict::Inconclusive);
        assert_eq!(overall([Verdict::Inconclusive, Verdict::Fail]), Verdict::Fail);
        assert_eq!(overall([]), Verdict::Pass);
    }

    #[test]
    fn json_shape() {
        let r = CheckReport::new("riesz", json!({"p": 2.0}), 1.0, 2.0, 0.1, Criterion::Inequality);
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        for k in ["check", "inputs", "lhs", "bound", "margin", "error", "verdict"] {
            assert!(v.get(k).is_some(), "{k}");
        }
        assert_eq!(v["verdict"], "pass");
    }
}

/// Interior samples used to screen hypotheses before integrating.
const HYPOTHESIS_SAMPLES: usize = 512;

/// Return the first sampled interior point (or `z0`) where `ok` fails.
fn screen(domain: &ModelDomain, ok: &dyn Fn(&[Complex64]) -> bool) -> Result<Option<crate::point::Point>> {
    if !ok(domain.z0()) {
        return Ok(Some(domain.z0().to_vec()));
    }
    let pts = crate::functions::sample_interior_points(domain, HYPOTHESIS_SAMPLES, 0.0, 0x4859_504f)?;
    Ok(pts.into_iter().find(|z| !ok(z)))
}
