use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;

use super::{engine_json, inputs, normalized, screen, CheckReport, Criterion, Verdict, Watch};
use crate::error::{hypothesis, invalid, Result};
use crate::functions::{FnSpec, TestFunction};
use crate::geometry::{ExhaustionLevel, ModelDomain};
use crate::hardy::level_integrals;
use crate::measure::{adaptive_circle_mean, Engine, ADAPTIVE_NODE_CAP, ADAPTIVE_REL_TOL};

/// Slack on `|Re f| <= 1`.
const STRIP_TOL: f64 = 1e-9;
/// Divergence evidence needs the last integral to exceed this multiple of the first.
pub const SHARPNESS_FACTOR: f64 = 10.0;
/// Exponent of the bounded comparison integrand reported next to the sharpness run.
const CONTRAST_ALPHA: f64 = 2.0;
const SHARPNESS_START_NODES: usize = 1024;

/// `exp((pi/2)|w|) / (1 + |w|)^alpha`.
pub fn zygmund_integrand(w: Complex64, alpha: f64) -> f64 {
    let m = w.norm();
    (FRAC_PI_2 * m).exp() / (1.0 + m).powf(alpha)
}

/// Where the exponential integral is evaluated.
#[derive(Debug, Clone)]
pub enum ZygmundSchedule {
    /// Fixed `f` on each level of an exhaustion.
    Levels(Vec<ExhaustionLevel>),
    /// `r f` on the level of parameter `r` (dilation by `r`, or the Green
    /// sublevel `t = -log r`), for `r -> 1-`.
    Scaling(Vec<f64>),
}

/// Uniform boundedness of `int exp((pi/2)|f|) / (1+|f|)^alpha d omega` along a
/// schedule: every value must stay below twice the linear extrapolation (in
/// level depth) of the first two values.
pub fn check_zygmund(
    f: &TestFunction,
    alpha: f64,
    domain: &ModelDomain,
    schedule: &ZygmundSchedule,
    engine: &Engine,
    renormalize: bool,
) -> Result<CheckReport> {
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(invalid(format!("alpha must exceed 1 (got {alpha})")));
    }
    let (g, shift) = normalized("zygmund", f, domain.z0(), renormalize)?;
    if let Some(z) = screen(domain, &|z| g.u(z).abs() <= 1.0 + STRIP_TOL)? {
        return Err(hypothesis("zygmund", format!("|u| <= 1 (u = {} at {z:?})", g.u(&z))));
    }
    let stages: Vec<(ExhaustionLevel, f64, f64)> = match schedule {
        ZygmundSchedule::Levels(levels) => levels.iter().map(|l| (l.clone(), 1.0, l.depth())).collect(),
        ZygmundSchedule::Scaling(rs) => rs
            .iter()
            .map(|&r| {
                if !(r > 0.0 && r < 1.0) {
                    return Err(invalid(format!("scaling factors must lie in (0, 1), got {r}")));
                }
                let level = domain.dilation(r).or_else(|_| domain.green_sublevel(-r.ln()))?;
                Ok((level, r, -(1.0 - r).ln()))
            })
            .collect::<Result<Vec<_>>>()?,
    };
    if stages.len() < 3 {
        return Err(invalid("the boundedness check needs at least 3 levels"));
    }
    if stages.windows(2).any(|w| w[1].2 <= w[0].2) {
        return Err(invalid("levels must approach the boundary"));
    }
    let watch = Watch::new();
    let z0 = domain.z0();
    let results = stages
        .par_iter()
        .enumerate()
        .map(|(i, (level, s, _))| {
            let integrand = |z: &[Complex64]| {
                let w = g.eval(z) * *s;
                watch.observe(w.re.abs() <= 1.0 + STRIP_TOL, w.re);
                zygmund_integrand(w, alpha)
            };
            level_integrals(level, z0, &[&integrand], engine, i).map(|mut v| v.remove(0))
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(u) = watch.violation() {
        return Err(hypothesis("zygmund", format!("|u| <= 1 on the level boundaries (u = {u})")));
    }
    let values: Vec<f64> = results.iter().map(|r| r.value).collect();
    let errors: Vec<f64> = results.iter().map(|r| r.std_error).collect();
    let depths: Vec<f64> = stages.iter().map(|s| s.2).collect();
    let (i1, i2) = (values[0], values[1]);
    let slope = (i2 - i1) / (depths[1] - depths[0]);
    let extrapolated: Vec<f64> = depths.iter().map(|d| i1 + slope * (d - depths[0])).collect();
    let caps: Vec<f64> = extrapolated.iter().map(|e| 2.0 * e.max(i1).max(i2)).collect();
    let worst = (2..values.len())
        .min_by(|&a, &b| (caps[a] - values[a]).total_cmp(&(caps[b] - values[b])))
        .expect("at least 3 stages");
    let error = errors[worst] + 2.0 * (errors[0] + errors[1]) * (1.0 + (depths[worst] - depths[0]) / (depths[1] - depths[0]));
    let sup = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let params: Vec<f64> = match schedule {
        ZygmundSchedule::Levels(l) => l.iter().map(|l| l.t).collect(),
        ZygmundSchedule::Scaling(rs) => rs.clone(),
    };
    let kind = match schedule {
        ZygmundSchedule::Levels(_) => "levels",
        ZygmundSchedule::Scaling(_) => "scaling",
    };
    let extra = json!({"alpha": alpha, "schedule": kind, "levels": params, "engine": engine_json(engine)});
    Ok(CheckReport::new("zygmund", inputs(Some(f), domain, extra), values[worst], caps[worst], error, Criterion::Inequality)
        .detail("values", &values)
        .detail("errors", &errors)
        .detail("depths", &depths)
        .detail("extrapolated", &extrapolated)
        .detail("empirical_c_alpha", sup)
        .detail("constant", "not explicit; boundedness evidence only")
        .detail("conjugate_shift", shift)
        .require_converged(results.iter().all(|r| r.converged)))
}

/// Growth of `int exp((pi/2)|f|) / log^a(|f|+1) dtheta/2pi` on circles `|z| = r`
/// for `f(z) = (2/(pi i)) log((1+z)/(1-z))`: pass when the integrals increase
/// and the last exceeds [`SHARPNESS_FACTOR`] times the first.
///
/// The report's `lhs` is `SHARPNESS_FACTOR * I(first)` and its `bound` is
/// `I(last)`, so a positive margin is divergence evidence.
pub fn check_zygmund_sharpness(log_power: f64, radii: &[f64]) -> Result<CheckReport> {
    if radii.len() < 2 {
        return Err(invalid("need at least two radii"));
    }
    if radii.iter().any(|r| !(*r >= 0.5 && *r < 1.0)) {
        return Err(invalid("radii must lie in [0.5, 1)"));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("radii must increase toward 1"));
    }
    if !(log_power > 0.0) {
        return Err(invalid("the log exponent must be positive"));
    }
    let f = TestFunction::unchecked(FnSpec::moebius_log(), 1);
    let circle = |r: f64, h: &(dyn Fn(Complex64) -> f64 + Sync)| {
        let g = |theta: f64| h(f.eval(&[Complex64::from_polar(r, theta)]));
        adaptive_circle_mean(&g, SHARPNESS_START_NODES, ADAPTIVE_REL_TOL, ADAPTIVE_NODE_CAP)
    };
    let log_form = |w: Complex64| (FRAC_PI_2 * w.norm()).exp() / (w.norm() + 1.0).ln().powf(log_power);
    let bounded = |w: Complex64| zygmund_integrand(w, CONTRAST_ALPHA);
    let mut values = Vec::new();
    let mut changes = Vec::new();
    let mut contrast = Vec::new();
    let mut converged = true;
    for &r in radii {
        let (v, ch, _, ok) = circle(r, &log_form)?;
        let (c, _, _, ok2) = circle(r, &bounded)?;
        values.push(v);
        changes.push(ch);
        contrast.push(c);
        converged &= ok && ok2;
    }
    let increasing = values.windows(2).all(|w| w[1] > w[0]);
    let first = values[0];
    let last = *values.last().unwrap();
    let error = SHARPNESS_FACTOR * changes[0] + changes.last().unwrap();
    let extra = json!({"function": FnSpec::moebius_log().to_string(), "domain": "disc", "log_power": log_power, "radii": radii});
    let mut report = CheckReport::new("zygmund_sharpness", extra, SHARPNESS_FACTOR * first, last, error, Criterion::Inequality)
        .detail("values", &values)
        .detail("ratio_last_first", last / first)
        .detail("increasing", increasing)
        .detail("contrast_alpha", CONTRAST_ALPHA)
        .detail("contrast_values", &contrast)
        .detail("measure", format!("d theta / {}", 2.0 * PI))
        .require_converged(converged);
    if !increasing && report.verdict == Verdict::Pass {
        report.verdict = Verdict::Fail;
    }
    Ok(report)
}
