use num_complex::Complex64;
use serde_json::json;

use super::{engine_json, inputs, normalized, screen, CheckReport, Criterion, Watch};
use crate::error::{hypothesis, unsupported, Result};
use crate::functions::{KolmogorovComparison, TestFunction};
use crate::geometry::{ExhaustionLevel, ModelDomain};
use crate::hardy::{level_integrals, ps_level_integrals};
use crate::measure::{Engine, IntegralResult};
use crate::potential::pluriharmonic_mass;

/// Right-hand side `|F(z0)| / log^alpha |F(z0)|^2 + ((alpha+1)/(alpha-1)) U0 / log^{alpha-1} U0^2`
/// with `F = f + e^{alpha+1}` and `U0 = Re F(z0)`. Returns (first, second).
fn rhs_terms(k: &KolmogorovComparison, f: &TestFunction, z0: &[Complex64]) -> (f64, f64) {
    let w = f.eval(z0) + k.shift();
    (k.phi_num(w), (k.alpha + 1.0) / (k.alpha - 1.0) * k.psi(w.re))
}

fn positivity(check: &str, f: &TestFunction, domain: &ModelDomain) -> Result<()> {
    if let Some(z) = screen(domain, &|z| f.u(z) > 0.0)? {
        return Err(hypothesis(check, format!("u > 0 (u = {} at {z:?})", f.u(&z))));
    }
    Ok(())
}

fn finish(
    check: &str,
    f: &TestFunction,
    domain: &ModelDomain,
    k: &KolmogorovComparison,
    z0: &[Complex64],
    lhs: IntegralResult,
    scale: f64,
    extra: serde_json::Value,
) -> CheckReport {
    let (first, second) = rhs_terms(k, f, z0);
    CheckReport::new(check, inputs(Some(f), domain, extra), scale * lhs.value, first + second, scale * lhs.std_error, Criterion::Inequality)
        .detail("first_term", first)
        .detail("second_term", second)
        .detail("strict", true)
        .require_converged(lhs.converged)
}

/// `int |F| / log^alpha |F|^2 d omega_{z0,t}` against its bound for a
/// right-half-plane valued `f`, with `F = f + e^{alpha+1}`.
pub fn check_kolmogorov(
    f: &TestFunction,
    alpha: f64,
    domain: &ModelDomain,
    level: &ExhaustionLevel,
    engine: &Engine,
) -> Result<CheckReport> {
    let k = KolmogorovComparison::new(alpha)?;
    positivity("kolmogorov", f, domain)?;
    let z0 = domain.z0();
    let watch = Watch::new();
    let integrand = |z: &[Complex64]| {
        let w = f.eval(z);
        watch.observe(w.re > 0.0, w.re);
        k.phi_num(w + k.shift())
    };
    let lhs = level_integrals(level, z0, &[&integrand], engine, 0)?.remove(0);
    if let Some(u) = watch.violation() {
        return Err(hypothesis("kolmogorov", format!("u > 0 on the level boundary (u = {u})")));
    }
    let extra = json!({"alpha": alpha, "t": level.t, "engine": engine_json(engine)});
    Ok(finish("kolmogorov", f, domain, &k, z0, lhs, 1.0, extra))
}

/// The pluriharmonic-measure version, normalized by `(2 pi)^{-n}`; requires
/// `v(z0) = 0`.
pub fn check_kolmogorov_ps(
    f: &TestFunction,
    alpha: f64,
    domain: &ModelDomain,
    t: f64,
    engine: &Engine,
    renormalize: bool,
) -> Result<CheckReport> {
    let k = KolmogorovComparison::new(alpha)?;
    if !domain.is_hyperconvex_model() {
        return Err(unsupported(format!("{} has no pluriharmonic measure model", domain.name())));
    }
    let z0 = domain.z0();
    let (g, shift) = normalized("kolmogorov_ps", f, z0, renormalize)?;
    positivity("kolmogorov_ps", &g, domain)?;
    let watch = Watch::new();
    let integrand = |z: &[Complex64]| {
        let w = g.eval(z);
        watch.observe(w.re > 0.0, w.re);
        k.phi_num(w + k.shift())
    };
    let lhs = ps_level_integrals(domain, z0, t, &[&integrand], engine)?.remove(0);
    if let Some(u) = watch.violation() {
        return Err(hypothesis("kolmogorov_ps", format!("u > 0 on the level boundary (u = {u})")));
    }
    let extra = json!({"alpha": alpha, "t": t, "engine": engine_json(engine)});
    let scale = 1.0 / pluriharmonic_mass(domain.dim());
    Ok(finish("kolmogorov_ps", f, domain, &k, z0, lhs, scale, extra).detail("conjugate_shift", shift))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{FnSpec, Sign};
    use crate::verify::Verdict;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_function_margin_is_second_term() {
        let d = ModelDomain::disc();
        let f = TestFunction::build(FnSpec::poly(&[1.0]), &d).unwrap();
        let level = d.dilation(0.9).unwrap();
        let r = check_kolmogorov(&f, 2.0, &d, &level, &Engine::default()).unwrap();
        assert!((r.lhs - r.details["first_term"].as_f64().unwrap()).abs() < 1e-12);
        assert!((r.margin - r.details["second_term"].as_f64().unwrap()).abs() < 1e-12);
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn examples_pass() {
        let d = ModelDomain::disc();
        let f = TestFunction::build(FnSpec::poly(&[1.0, 0.5]), &d).unwrap();
        let level = d.dilation(0.99).unwrap();
        assert_eq!(check_kolmogorov(&f, 2.0, &d, &level, &Engine::default()).unwrap().verdict, Verdict::Pass);
        let g = TestFunction::build(FnSpec::strip_exp(Sign::Plus, FnSpec::scale(c(0.95, 0.0), FnSpec::moebius_log())), &d).unwrap();
        assert_eq!(check_kolmogorov(&g, 3.0, &d, &level, &Engine::default()).unwrap().verdict, Verdict::Pass);
        let b = ModelDomain::ball(2);
        let h = TestFunction::build(FnSpec::Sum { terms: vec![FnSpec::poly(&[1.0]), FnSpec::scale(c(0.5, 0.0), FnSpec::coord(0))] }, &b).unwrap();
        assert_eq!(check_kolmogorov_ps(&h, 2.0, &b, 0.01, &Engine::default(), false).unwrap().verdict, Verdict::Pass);
    }

    #[test]
    fn ps_agrees_on_disc() {
        let d = ModelDomain::disc();
        let f = TestFunction::build(FnSpec::poly(&[1.0, 0.5, 0.2]), &d).unwrap();
        let t: f64 = 0.05;
        let a = check_kolmogorov(&f, 1.5, &d, &d.dilation((-t).exp()).unwrap(), &Engine::default()).unwrap();
        let b = check_kolmogorov_ps(&f, 1.5, &d, t, &Engine::default(), false).unwrap();
        assert!((a.lhs - b.lhs).abs() <= 1e-6 * a.lhs);
        assert_eq!(a.bound, b.bound);
    }

    #[test]
    fn positivity_enforced() {
        let d = ModelDomain::disc();
        let f = TestFunction::build(FnSpec::poly(&[0.2, 1.0]), &d).unwrap();
        let level = d.dilation(0.9).unwrap();
        let err = check_kolmogorov(&f, 2.0, &d, &level, &Engine::default()).unwrap_err();
        assert!(matches!(err, crate::error::LabError::Hypothesis { .. }));
    }
}
