use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::{engine_json, inputs, level_params, normalized, CheckReport, Criterion};
use crate::error::{invalid, Result};
use crate::functions::{FnSpec, Sign, TestFunction};
use crate::geometry::{ExhaustionLevel, ModelDomain};
use crate::hardy::{hardy_norm, ps_hardy_norm, NormEstimate};
use crate::measure::Engine;

fn ln_binom(n: u64, k: u64) -> f64 {
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `ln C_p^p` from squaring `f`: with `q = p/2` and `A = q 2^q / (q - 1)`, the
/// Young split weight is chosen so the `|f|^p` coefficient is 1/2, giving
/// `C_p^p = 2^q (1 + 2^{q-2} A^2)`.
fn ln_squaring_constant(p: f64) -> f64 {
    let q = p / 2.0;
    let ln_a = q.ln() + q * std::f64::consts::LN_2 - (q - 1.0).ln();
    let ln_tail = (q - 2.0) * std::f64::consts::LN_2 + 2.0 * ln_a;
    q * std::f64::consts::LN_2 + log_sum_exp(&[0.0, ln_tail])
}

/// `ln C_p^p` from the odd power `f^{p'}`, `p'` the largest odd integer below `p`.
fn ln_odd_power_constant(p: f64) -> f64 {
    let mut odd = p.ceil() as u64 - 1;
    if odd % 2 == 0 {
        odd -= 1;
    }
    let q = p / odd as f64;
    let terms = (odd + 1) / 2;
    let ln_pref = (q / (q - 1.0)).ln() + (q - 1.0) * (terms as f64).ln();
    let ks: Vec<(f64, f64)> = (1..terms).map(|k| (q * ln_binom(odd, 2 * k), 2.0 * k as f64 / odd as f64)).collect();
    // ln of the |f|^p coefficient as a function of ln eps; increasing
    let ln_coeff = |le: f64| {
        let xs: Vec<f64> = ks.iter().map(|(lb, a)| lb + a.ln() + le / a).collect();
        ln_pref + log_sum_exp(&xs)
    };
    let target = 0.5f64.ln();
    let (mut lo, mut hi) = (-1.0, 1.0);
    while ln_coeff(lo) > target {
        lo *= 2.0;
    }
    while ln_coeff(hi) < target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ln_coeff(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let le = 0.5 * (lo + hi);
    let mut xs = vec![0.0];
    xs.extend(ks.iter().map(|(lb, a)| lb + (1.0 - a).ln() - le / (1.0 - a)));
    std::f64::consts::LN_2 + ln_pref + log_sum_exp(&xs)
}

/// Constructive constant `C_p` with `||f||_p <= C_p ||u||_p`, and which
/// construction produced it.
pub fn riesz_constant_with_source(p: f64) -> Result<(f64, &'static str)> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid(format!("the Riesz constant needs 1 < p < inf (got {p})")));
    }
    if p <= 2.0 {
        return Ok(((p / (p - 1.0)).powf(1.0 / p), "p/(p-1)"));
    }
    let squaring = (ln_squaring_constant(p) / p).exp();
    if p <= 3.0 {
        return Ok((squaring, "squaring"));
    }
    let odd = (ln_odd_power_constant(p) / p).exp();
    if p > 4.0 {
        return Ok((odd, "odd_power"));
    }
    Ok(if squaring <= odd { (squaring, "min(squaring, odd_power): squaring") } else { (odd, "min(squaring, odd_power): odd_power") })
}

pub fn riesz_constant(p: f64) -> Result<f64> {
    riesz_constant_with_source(p).map(|(c, _)| c)
}

fn norm_pair_report(
    check: &str,
    f: &TestFunction,
    domain: &ModelDomain,
    p: f64,
    shift: f64,
    lhs: NormEstimate,
    rhs: NormEstimate,
    extra: serde_json::Value,
) -> Result<CheckReport> {
    let (c, source) = riesz_constant_with_source(p)?;
    let error = lhs.sup_error() + c * rhs.sup_error();
    let ratios: Vec<f64> = lhs.levels.iter().zip(&rhs.levels).map(|(a, b)| a.value / b.value).collect();
    let converged = lhs.converged && rhs.converged;
    Ok(CheckReport::new(check, inputs(Some(f), domain, extra), lhs.sup, c * rhs.sup, error, Criterion::Inequality)
        .detail("constant", c)
        .detail("constant_source", source)
        .detail("norm_f", &lhs)
        .detail("norm_u", &rhs)
        .detail("level_ratios", ratios)
        .detail("conjugate_shift", shift)
        .detail("sup_is_lower_bound", true)
        .require_converged(converged))
}

/// `||f||_{p,z0} <= C_p ||u||_{p,z0}` over the given exhaustion levels, with
/// `z0` the domain's base point.
pub fn check_riesz(
    f: &TestFunction,
    p: f64,
    domain: &ModelDomain,
    levels: &[ExhaustionLevel],
    engine: &Engine,
    renormalize: bool,
) -> Result<CheckReport> {
    riesz_constant(p)?;
    let (g, shift) = normalized("riesz", f, domain.z0(), renormalize)?;
    let lhs = hardy_norm(&|z: &[Complex64]| g.eval(z).norm(), p, domain, levels, engine)?;
    let rhs = hardy_norm(&|z: &[Complex64]| g.u(z), p, domain, levels, engine)?;
    let extra = json!({"p": p, "levels": level_params(levels), "engine": engine_json(engine)});
    norm_pair_report("riesz", f, domain, p, shift, lhs, rhs, extra)
}

/// The same inequality for the pluriharmonic-measure norms.
pub fn check_riesz_ps(
    f: &TestFunction,
    p: f64,
    domain: &ModelDomain,
    ts: &[f64],
    engine: &Engine,
    renormalize: bool,
) -> Result<CheckReport> {
    riesz_constant(p)?;
    let (g, shift) = normalized("riesz_ps", f, domain.z0(), renormalize)?;
    let lhs = ps_hardy_norm(&|z: &[Complex64]| g.eval(z).norm(), p, domain, ts, engine)?;
    let rhs = ps_hardy_norm(&|z: &[Complex64]| g.u(z), p, domain, ts, engine)?;
    let extra = json!({"p": p, "levels": ts, "engine": engine_json(engine)});
    norm_pair_report("riesz_ps", f, domain, p, shift, lhs, rhs, extra)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub p: f64,
    pub max_ratio: f64,
    pub argmax: String,
    pub bound: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub label: String,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "p,max_ratio,argmax,bound,converged")?;
        for r in &self.rows {
            writeln!(out, "{},{},{},{},{}", r.p, r.max_ratio, csv_field(&r.argmax), r.bound, r.converged)?;
        }
        Ok(())
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Twelve test functions: monomials, affine combinations, and bounded
/// compositions with `moebius_log` and `strip_exp`. Only the monomials have
/// `Re f(0) = 0`.
pub fn riesz_battery() -> Vec<FnSpec> {
    let c = Complex64::new;
    vec![
        FnSpec::poly(&[0.0, 1.0]),
        FnSpec::poly(&[0.0, 0.0, 1.0]),
        FnSpec::poly(&[0.0, 0.0, 0.0, 1.0]),
        FnSpec::poly(&[1.0, 1.0]),
        FnSpec::poly(&[0.5, -1.0, 0.3]),
        FnSpec::poly(&[2.0, 0.0, 0.0, 1.0]),
        FnSpec::power(2, FnSpec::poly(&[0.3, 1.0])),
        FnSpec::scale(c(0.0, 0.5), FnSpec::coord(0)).plus(c(1.0, 0.0)),
        FnSpec::moebius_log().affine_arg(c(0.8, 0.0), c(0.1, 0.1)),
        FnSpec::moebius_log().affine_arg(c(0.0, 0.5), c(0.1, 0.2)),
        FnSpec::strip_exp(Sign::Plus, FnSpec::moebius_log().affine_arg(c(0.7, 0.0), c(0.0, 0.0))),
        FnSpec::power(2, FnSpec::moebius_log().affine_arg(c(0.6, 0.0), c(0.1, 0.0))).plus(c(1.0, 0.0)),
    ]
}

/// Minimum battery size for a sweep.
pub const SWEEP_MIN_BATTERY: usize = 10;

/// Largest observed `||f||_p / ||u||_p` over a battery for each `p`: an
/// empirical lower bound on the best constant.
pub fn sweep_best_constant(
    p_grid: &[f64],
    battery: &[TestFunction],
    domain: &ModelDomain,
    levels: &[ExhaustionLevel],
    engine: &Engine,
) -> Result<SweepTable> {
    if battery.len() < SWEEP_MIN_BATTERY {
        return Err(invalid(format!("the sweep battery needs at least {SWEEP_MIN_BATTERY} functions")));
    }
    let z0 = domain.z0();
    let normalized: Vec<TestFunction> = battery.iter().map(|f| f.renormalized(z0).0).collect();
    let rows = p_grid
        .iter()
        .map(|&p| {
            let bound = riesz_constant(p)?;
            let ratios = normalized
                .par_iter()
                .map(|g| {
                    let a = hardy_norm(&|z: &[Complex64]| g.eval(z).norm(), p, domain, levels, engine)?;
                    let b = hardy_norm(&|z: &[Complex64]| g.u(z), p, domain, levels, engine)?;
                    Ok((a.sup / b.sup, a.converged && b.converged))
                })
                .collect::<Result<Vec<(f64, bool)>>>()?;
            let (best, _) = ratios
                .iter()
                .enumerate()
                .filter(|(_, (r, _))| r.is_finite())
                .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
                .ok_or_else(|| invalid("no finite ratio in the battery"))?;
            Ok(SweepRow {
                p,
                max_ratio: ratios[best].0,
                argmax: battery[best].tag(),
                bound,
                converged: ratios.iter().all(|(_, c)| *c),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable { label: "empirical lower bound on best constant".into(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Scheme;
    use crate::verify::Verdict;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constants() {
        assert!((riesz_constant(2.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!((riesz_constant(1.5).unwrap() - 3f64.powf(2.0 / 3.0)).abs() < 1e-12);
        // regression value of the squaring construction at p = 3
        let c3 = riesz_constant(3.0).unwrap();
        let q: f64 = 1.5;
        let a = q * 2f64.powf(q) / (q - 1.0);
        let want = (2f64.powf(q) * (1.0 + 2f64.powf(q - 2.0) * a * a)).powf(1.0 / 3.0);
        assert!((c3 - want).abs() < 1e-12);
        assert!((c3 - 5.2756).abs() < 1e-3, "{c3}");
        assert!(riesz_constant(1.0).is_err());
        assert!(riesz_constant(0.5).is_err());
        assert!(riesz_constant(f64::INFINITY).is_err());
        for p in [1.01, 1.1, 2.0001, 2.5, 3.0001, 3.5, 4.0, 4.5, 5.0, 7.3, 12.0, 40.0, 101.0] {
            let c = riesz_constant(p).unwrap();
            assert!(c.is_finite() && c > 1.0, "p = {p}: {c}");
        }
    }

    #[test]
    fn odd_power_constant_solves_its_balance() {
        // p' = 3 gives a single Young term; check the closed form directly
        let p: f64 = 3.5;
        let q = p / 3.0;
        let qq = q / (q - 1.0);
        let k = 2f64.powf(q - 1.0);
        let b = 3f64.powf(q);
        let a = 2.0 / 3.0;
        let eps = (0.5 / (qq * k * b * a)).powf(a);
        let want = 2.0 * qq * k * (1.0 + b * (1.0 - a) * eps.powf(-1.0 / (1.0 - a)));
        assert!((ln_odd_power_constant(p) - want.ln()).abs() < 1e-10);
        let (_, source) = riesz_constant_with_source(3.5).unwrap();
        assert!(source.starts_with("min"));
    }

    #[test]
    fn extremal_pair_is_tight() {
        let d = ModelDomain::disc();
        let f = TestFunction::build(FnSpec::poly(&[0.0, 1.0]), &d).unwrap();
        let levels = d.levels(Scheme::Dilation, Scheme::Dilation.default_params()).unwrap();
        let r = check_riesz(&f, 2.0, &d, &levels, &Engine::default(), true).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-4 && (r.bound - 1.0).abs() < 1e-4);
        assert_eq!(r.verdict, Verdict::Inconclusive);
        let g = TestFunction::build(FnSpec::poly(&[1.0, 1.0]), &d).unwrap();
        let r = check_riesz(&g, 1.5, &d, &levels, &Engine::default(), true).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.margin > 0.1);
    }

    #[test]
    fn moebius_log_at_p4_and_scaling() {
        let d = ModelDomain::disc();
        let levels = d.levels(Scheme::Dilation, &[0.5, 0.9, 0.99]).unwrap();
        let f = TestFunction::build(FnSpec::moebius_log().affine_arg(c(0.8, 0.0), c(0.1, 0.1)), &d).unwrap();
        let r = check_riesz(&f, 4.0, &d, &levels, &Engine::default(), true).unwrap();
        assert!(r.margin > r.error);
        assert!(r.details["conjugate_shift"].as_f64().unwrap().abs() > 0.0);
        for s in [0.1, 10.0] {
            let rs = check_riesz(&f.scaled(s), 4.0, &d, &levels, &Engine::default(), true).unwrap();
            assert!((rs.lhs - s * r.lhs).abs() <= 1e-9 * rs.lhs);
            assert!((rs.bound - s * r.bound).abs() <= 1e-9 * rs.bound);
        }
    }

    #[test]
    fn hypothesis_enforced_without_renormalization() {
        let d = ModelDomain::disc();
        let levels = d.levels(Scheme::Dilation, &[0.5, 0.9, 0.99]).unwrap();
        let f = TestFunction::build(FnSpec::poly(&[0.0, 1.0]).plus(c(0.0, 0.5)), &d).unwrap();
        let err = check_riesz(&f, 2.0, &d, &levels, &Engine::default(), false).unwrap_err();
        assert!(matches!(err, crate::error::LabError::Hypothesis { .. }));
        assert!(check_riesz(&f, 2.0, &d, &levels, &Engine::default(), true).is_ok());
    }

    #[test]
    fn ps_version_matches_on_disc_and_ball() {
        let d = ModelDomain::disc();
        let f = TestFunction::build(FnSpec::poly(&[0.0, 1.0]), &d).unwrap();
        let ts = [0.7, 0.1, 0.01, 1e-3, 1e-4];
        let rs: Vec<f64> = ts.iter().map(|t: &f64| (-t).exp()).collect();
        let ps = check_riesz_ps(&f, 2.0, &d, &ts, &Engine::default(), true).unwrap();
        let cl = check_riesz(&f, 2.0, &d, &d.levels(Scheme::Dilation, &rs).unwrap(), &Engine::default(), true).unwrap();
        assert!((ps.lhs / ps.bound - cl.lhs / cl.bound).abs() < 1e-9);
        let b = ModelDomain::ball(2);
        let z1 = TestFunction::build(FnSpec::coord(0), &b).unwrap();
        // u(z0) = 0 is the equality case at p = 2
        assert_eq!(check_riesz_ps(&z1, 2.0, &b, &ts, &Engine::default(), true).unwrap().verdict, Verdict::Inconclusive);
        assert_eq!(check_riesz_ps(&z1, 3.0, &b, &ts, &Engine::default(), true).unwrap().verdict, Verdict::Pass);
        let k = TestFunction::build(FnSpec::poly(&[0.7]), &b).unwrap();
        let r = check_riesz_ps(&k, 3.0, &b, &ts, &Engine::default(), true).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!((r.lhs * r.details["constant"].as_f64().unwrap() - r.bound).abs() < 1e-9);
    }

    #[test]
    fn sweep_rows() {
        let d = ModelDomain::disc();
        let levels = d.levels(Scheme::Dilation, &[0.5, 0.9, 0.99, 0.999]).unwrap();
        let mut battery: Vec<TestFunction> = vec![
            FnSpec::poly(&[0.0, 1.0]),
            FnSpec::poly(&[1.0, 1.0]),
            FnSpec::poly(&[0.0, 0.0, 1.0]),
            FnSpec::poly(&[0.5, -1.0, 0.3]),
            FnSpec::moebius_log().affine_arg(c(0.8, 0.0), c(0.0, 0.1)),
            FnSpec::strip_exp(Sign::Plus, FnSpec::scale(c(0.9, 0.0), FnSpec::moebius_log())),
            FnSpec::power(2, FnSpec::poly(&[0.3, 1.0])),
            FnSpec::poly(&[2.0, 0.0, 0.0, 1.0]),
            FnSpec::poly(&[0.0, 1.0, 0.5]),
        ]
        .into_iter()
        .map(|s| TestFunction::build(s, &d).unwrap())
        .collect();
        assert!(sweep_best_constant(&[2.0], &battery, &d, &levels, &Engine::default()).is_err());
        battery.push(TestFunction::build(FnSpec::poly(&[-0.2, 0.7, 0.1]), &d).unwrap());
        let t = sweep_best_constant(&[2.0, 2.5, 3.0], &battery, &d, &levels, &Engine::default()).unwrap();
        assert!(t.rows[0].max_ratio >= 2f64.sqrt() - 1e-3);
        for r in &t.rows {
            assert!(r.max_ratio <= r.bound + 1e-6, "{r:?}");
        }
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 4);
    }
}
