//! Hardy-type norms as suprema over exhaustion levels.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, LabError, Result};
use crate::geometry::{ExhaustionLevel, ModelDomain};
use crate::measure::{harmonic_integrals, integrate_refined, Engine, IntegralResult, PointFn, ADAPTIVE_REL_TOL};
use crate::point::Point;
use crate::potential::pluriharmonic_measure;

/// Minimum number of levels for a norm estimate.
pub const MIN_LEVELS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelValue {
    pub t: f64,
    pub value: f64,
    #[serde(skip)]
    pub error: f64,
    #[serde(skip)]
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormEstimate {
    pub p: f64,
    pub z0: Point,
    pub levels: Vec<LevelValue>,
    /// Largest level value: a lower bound for the supremum over the family.
    pub sup: f64,
    pub converged: bool,
    /// Levels dropped because the integrand overflowed, with the reason.
    #[serde(skip)]
    pub aborted: Vec<(f64, String)>,
}

impl NormEstimate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("norm estimates serialize")
    }

    /// Error of the largest level value.
    pub fn sup_error(&self) -> f64 {
        self.levels
            .iter()
            .max_by(|a, b| a.value.total_cmp(&b.value))
            .map_or(f64::INFINITY, |l| l.error)
    }

    pub fn nondecreasing(&self, slack: f64) -> bool {
        self.levels.windows(2).all(|w| w[1].value >= w[0].value - slack - w[0].error - w[1].error)
    }
}

/// Per-level seed for randomized engines.
pub fn level_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Integrals of `fs` against the harmonic measure of `level` at `z0`.
pub fn level_integrals(
    level: &ExhaustionLevel,
    z0: &[Complex64],
    fs: &[PointFn<'_>],
    engine: &Engine,
    index: usize,
) -> Result<Vec<IntegralResult>> {
    let engine = Engine { seed: level_seed(engine.seed, index), ..engine.clone() };
    harmonic_integrals(&level.shape, z0, fs, &engine)
}

/// Integrals of `fs` against the pluriharmonic measure `mu_{z0,t}`.
pub fn ps_level_integrals(
    domain: &ModelDomain,
    z0: &[Complex64],
    t: f64,
    fs: &[PointFn<'_>],
    engine: &Engine,
) -> Result<Vec<IntegralResult>> {
    let build = |n: usize| pluriharmonic_measure(domain, z0, t, n);
    integrate_refined(&build, fs, engine.nodes, engine.adaptive)
}

fn is_overflow(e: &LabError) -> bool {
    matches!(e, LabError::IntegrandOverflow { .. } | LabError::IntegrandNaN)
}

fn assemble(p: f64, z0: &[Complex64], per_level: Vec<(f64, Result<IntegralResult>)>) -> Result<NormEstimate> {
    let mut levels = Vec::new();
    let mut aborted = Vec::new();
    for (t, r) in per_level {
        match r {
            Ok(r) => {
                let i = r.value.max(0.0);
                let value = i.powf(1.0 / p);
                let error = if i > 0.0 { value / (p * i) * r.std_error } else { r.std_error.powf(1.0 / p) };
                levels.push(LevelValue { t, value, error, converged: r.converged });
            }
            Err(e) if is_overflow(&e) => aborted.push((t, e.to_string())),
            Err(e) => return Err(e),
        }
    }
    let sup = levels.iter().map(|l| l.value).fold(f64::NEG_INFINITY, f64::max);
    let settled = match levels.as_slice() {
        [.., a, b] => (b.value - a.value).abs() <= ADAPTIVE_REL_TOL * b.value.abs().max(f64::MIN_POSITIVE),
        _ => false,
    };
    let converged = settled && aborted.is_empty() && levels.iter().all(|l| l.converged);
    Ok(NormEstimate { p, z0: z0.to_vec(), levels, sup, converged, aborted })
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(invalid(format!("p must be at least 1 (got {p})")));
    }
    Ok(())
}

/// `sup_t [ int_{dOmega_t} |g|^p d omega_{z0,t} ]^{1/p}` over the given levels,
/// with `z0` the domain's base point.
pub fn hardy_norm(
    g: PointFn<'_>,
    p: f64,
    domain: &ModelDomain,
    levels: &[ExhaustionLevel],
    engine: &Engine,
) -> Result<NormEstimate> {
    check_p(p)?;
    if levels.len() < MIN_LEVELS {
        return Err(invalid(format!("need at least {MIN_LEVELS} exhaustion levels")));
    }
    if levels.windows(2).any(|w| w[1].depth() <= w[0].depth()) {
        return Err(invalid("levels must be nested and approach the boundary"));
    }
    let z0 = domain.z0();
    let integrand = move |z: &[Complex64]| g(z).abs().powf(p);
    let per_level: Vec<(f64, Result<IntegralResult>)> = levels
        .par_iter()
        .enumerate()
        .map(|(i, level)| (level.t, level_integrals(level, z0, &[&integrand], engine, i).map(|mut v| v.remove(0))))
        .collect();
    assemble(p, z0, per_level)
}

/// `sup_t [ int |g|^p d mu_{z0,t} ]^{1/p}` with `t` decreasing to 0.
pub fn ps_hardy_norm(g: PointFn<'_>, p: f64, domain: &ModelDomain, ts: &[f64], engine: &Engine) -> Result<NormEstimate> {
    check_p(p)?;
    if !domain.is_hyperconvex_model() {
        return Err(LabError::Unsupported(format!("{} has no pluriharmonic measure model", domain.name())));
    }
    if ts.len() < MIN_LEVELS {
        return Err(invalid(format!("need at least {MIN_LEVELS} exhaustion levels")));
    }
    if ts.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("sublevel parameters must decrease toward 0"));
    }
    let z0 = domain.z0();
    let integrand = move |z: &[Complex64]| g(z).abs().powf(p);
    let per_level: Vec<(f64, Result<IntegralResult>)> = ts
        .par_iter()
        .map(|&t| (t, ps_level_integrals(domain, z0, t, &[&integrand], engine).map(|mut v| v.remove(0))))
        .collect();
    assemble(p, z0, per_level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{FnSpec, TestFunction};
    use crate::geometry::Scheme;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn dil(d: &ModelDomain, rs: &[f64]) -> Vec<ExhaustionLevel> {
        d.levels(Scheme::Dilation, rs).unwrap()
    }

    #[test]
    fn re_z_on_disc() {
        let d = ModelDomain::disc();
        let levels = dil(&d, &[0.5, 0.9, 0.99, 0.999]);
        let est = hardy_norm(&|z: &[Complex64]| z[0].re, 2.0, &d, &levels, &Engine::default()).unwrap();
        for (l, r) in est.levels.iter().zip([0.5, 0.9, 0.99, 0.999]) {
            assert!((l.value - r / 2f64.sqrt()).abs() < 1e-10);
        }
        assert!((est.sup - 0.999 / 2f64.sqrt()).abs() < 1e-10);
        assert!(!est.converged);
        assert!(est.nondecreasing(0.0));
        let all = dil(&d, Scheme::Dilation.default_params());
        assert!(hardy_norm(&|z: &[Complex64]| z[0].re, 2.0, &d, &all, &Engine::default()).unwrap().converged);
    }

    #[test]
    fn constants_and_modulus() {
        let d = ModelDomain::disc();
        let levels = dil(&d, &Scheme::Dilation.default_params()[..4]);
        for p in [1.0, 1.5, 3.0] {
            let est = hardy_norm(&|_: &[Complex64]| 1.0, p, &d, &levels, &Engine::default()).unwrap();
            assert!((est.sup - 1.0).abs() < 1e-12);
        }
        let est = hardy_norm(&|z: &[Complex64]| z[0].norm(), 2.0, &d, &dil(&d, Scheme::Dilation.default_params()), &Engine::default())
            .unwrap();
        assert!((est.sup - 1.0).abs() < 1e-4);
    }

    #[test]
    fn ps_constant_and_moment() {
        let d = ModelDomain::ball(2);
        let ts = [1.0, 0.5, 0.1, 0.01];
        for p in [1.0, 2.0, 4.0] {
            let est = ps_hardy_norm(&|_: &[Complex64]| 1.0, p, &d, &ts, &Engine::default()).unwrap();
            assert!((est.sup - (2.0 * PI).powf(2.0 / p)).abs() < 1e-9);
        }
        let est = ps_hardy_norm(&|z: &[Complex64]| z[0].re, 2.0, &d, &ts, &Engine::default()).unwrap();
        for l in &est.levels {
            // mean of x_1^2 over S^3 is 1/4
            let want = (4.0 * PI * PI * (-2.0 * l.t).exp() / 4.0).sqrt();
            assert!((l.value - want).abs() < 1e-9);
        }
    }

    #[test]
    fn ps_matches_hardy_on_disc() {
        let d = ModelDomain::disc();
        let f = TestFunction::build(FnSpec::poly(&[0.3, 1.0, -0.4, 0.2]), &d).unwrap();
        let g = |z: &[Complex64]| f.u(z);
        let ts = [0.7, 0.1, 0.01];
        let rs: Vec<f64> = ts.iter().map(|t: &f64| (-t).exp()).collect();
        for p in [1.5, 2.0, 3.0] {
            let ps = ps_hardy_norm(&g, p, &d, &ts, &Engine::default()).unwrap();
            let h = hardy_norm(&g, p, &d, &dil(&d, &rs), &Engine::default()).unwrap();
            for (a, b) in ps.levels.iter().zip(&h.levels) {
                assert!((a.value - (2.0 * PI).powf(1.0 / p) * b.value).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn norm_axioms() {
        let d = ModelDomain::disc().with_z0(vec![c(0.2, -0.1)]).unwrap();
        let levels = dil(&d, &[0.5, 0.9, 0.99]);
        let fs: Vec<TestFunction> = [
            FnSpec::poly(&[0.0, 1.0]),
            FnSpec::poly(&[1.0, -2.0, 0.5]),
            FnSpec::moebius_log(),
            FnSpec::power(2, FnSpec::poly(&[0.2, 1.0])),
            FnSpec::scale(c(0.8, 0.0), FnSpec::moebius_log()).affine_arg(c(0.9, 0.0), c(0.0, 0.05)),
            FnSpec::poly(&[-0.5, 0.3, 0.0, 0.7]),
        ]
        .into_iter()
        .map(|s| TestFunction::build(s, &d).unwrap())
        .collect();
        let e = Engine::default();
        let norm = |g: PointFn<'_>, p: f64| hardy_norm(g, p, &d, &levels, &e).unwrap();
        for f in &fs {
            let a = norm(&|z: &[Complex64]| f.u(z), 2.0);
            let b = norm(&|z: &[Complex64]| -3.5 * f.u(z), 2.0);
            assert!((b.sup - 3.5 * a.sup).abs() <= 1e-8 * (1.0 + b.sup));
            assert!(a.nondecreasing(1e-12));
            let mut last = 0.0;
            for p in [1.0, 1.5, 2.0, 3.0] {
                let n = norm(&|z: &[Complex64]| f.u(z), p).sup;
                assert!(n >= last - 1e-12);
                last = n;
            }
        }
        for w in fs.windows(2) {
            let (f, g) = (&w[0], &w[1]);
            let s = norm(&|z: &[Complex64]| f.u(z) + g.u(z), 1.5);
            let a = norm(&|z: &[Complex64]| f.u(z), 1.5);
            let b = norm(&|z: &[Complex64]| g.u(z), 1.5);
            for ((x, y), z) in s.levels.iter().zip(&a.levels).zip(&b.levels) {
                assert!(x.value <= y.value + z.value + 1e-12);
            }
        }
    }

    #[test]
    fn overflow_aborts_level() {
        let d = ModelDomain::disc();
        let levels = dil(&d, &[0.5, 0.9, 0.999999]);
        let g = |z: &[Complex64]| 1.0 / (1.0 - z[0].re).powi(3);
        let est = hardy_norm(&g, 2.0, &d, &levels, &Engine::exact(256)).unwrap();
        assert!(!est.converged);
        assert_eq!(est.aborted.len(), 1);
        assert_eq!(est.levels.len(), 2);
    }

    #[test]
    fn preconditions_and_json() {
        let d = ModelDomain::disc();
        let g = |z: &[Complex64]| z[0].re;
        assert!(hardy_norm(&g, 0.5, &d, &dil(&d, &[0.5, 0.9, 0.99]), &Engine::default()).is_err());
        assert!(hardy_norm(&g, 2.0, &d, &dil(&d, &[0.5, 0.9]), &Engine::default()).is_err());
        assert!(hardy_norm(&g, 2.0, &d, &dil(&d, &[0.9, 0.5, 0.99]), &Engine::default()).is_err());
        let ann = ModelDomain::new(crate::geometry::DomainKind::Annulus { r_inner: 0.5 }, vec![c(0.7, 0.0)]).unwrap();
        assert!(matches!(ps_hardy_norm(&g, 2.0, &ann, &[1.0, 0.5, 0.1], &Engine::default()), Err(LabError::Unsupported(_))));
        let est = hardy_norm(&g, 2.0, &d, &dil(&d, &[0.5, 0.9, 0.99]), &Engine::default()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&est.to_json()).unwrap();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["converged", "levels", "p", "sup", "z0"]);
        assert_eq!(v["levels"][0].as_object().unwrap().len(), 2);
    }

    #[test]
    fn wos_engine_on_polydisc() {
        let d = ModelDomain::polydisc(2);
        let levels = dil(&d, &[0.5, 0.7, 0.9]);
        let est = hardy_norm(&|_: &[Complex64]| 1.0, 2.0, &d, &levels, &Engine::wos(2000, 3)).unwrap();
        assert!((est.sup - 1.0).abs() < 1e-12);
        assert!(matches!(
            hardy_norm(&|_: &[Complex64]| 1.0, 2.0, &d, &levels, &Engine::default()),
            Err(LabError::Unsupported(_))
        ));
    }
}
