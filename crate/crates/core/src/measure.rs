//! Harmonic-measure engines and the integration operation used by every
//! checker: exact Poisson quadrature on balls and discs, and walk-on-spheres
//! Monte Carlo on any region with a distance oracle.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, unsupported, LabError, Result};
use crate::geometry::Shape;
use crate::point::{self, Point};
use crate::potential::{BoundaryQuadrature, QUADRATURE_FLOOR};
use crate::rules::{sphere_rule, SphereResolution};

/// Integrand magnitude above which a node is treated as a blow-up.
pub const OVERFLOW_THRESHOLD: f64 = 1e12;
/// Walks longer than this are rejected and resampled.
pub const WOS_STEP_CAP: usize = 100_000;
/// Largest rejected fraction tolerated before the estimator errors out.
pub const WOS_MAX_REJECTED_FRACTION: f64 = 0.01;
/// Relative change that stops adaptive node doubling.
pub const ADAPTIVE_REL_TOL: f64 = 1e-3;
/// Node cap for adaptive doubling.
pub const ADAPTIVE_NODE_CAP: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralResult {
    pub value: f64,
    /// Sample standard error (Monte Carlo) or refinement delta (quadrature).
    pub std_error: f64,
    pub n_points: usize,
    /// False when adaptive refinement hit its node cap.
    pub converged: bool,
}

/// Walk-on-spheres realization of a harmonic measure: absorption points, each
/// of weight `1/N`.
#[derive(Debug, Clone)]
pub struct EmpiricalMeasure {
    pub samples: Vec<Point>,
    pub walk_count: usize,
    pub eps_shell: f64,
    pub seed: u64,
    pub rejected: usize,
}

impl EmpiricalMeasure {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let n = self.samples.first().map_or(0, |z| z.len());
        let header: Vec<String> = (0..n).flat_map(|j| [format!("re_z{j}"), format!("im_z{j}")]).collect();
        writeln!(out, "{}", header.join(","))?;
        for z in &self.samples {
            let row: Vec<String> = point::to_real(z).iter().map(|v| format!("{v:.17e}")).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn checked(v: f64) -> Result<f64> {
    if v.is_nan() {
        Err(LabError::IntegrandNaN)
    } else if v.abs() > OVERFLOW_THRESHOLD {
        Err(LabError::IntegrandOverflow { value: v })
    } else {
        Ok(v)
    }
}

/// Something that integrates point functions.
pub trait Measure {
    fn integrate(&self, f: &dyn Fn(&[Complex64]) -> f64) -> Result<IntegralResult>;
}

impl Measure for BoundaryQuadrature {
    fn integrate(&self, f: &dyn Fn(&[Complex64]) -> f64) -> Result<IntegralResult> {
        let weighted = |q: &BoundaryQuadrature| -> Result<(f64, f64)> {
            let mut sum = 0.0;
            let mut abs = 0.0;
            for (z, w) in q.nodes.iter().zip(&q.weights) {
                let v = checked(f(z))?;
                sum += w * v;
                abs += w * v.abs();
            }
            Ok((sum, abs))
        };
        let (value, abs) = weighted(self)?;
        let mut err = QUADRATURE_FLOOR * abs;
        if let Some(coarse) = &self.coarse {
            let (v2, _) = weighted(coarse)?;
            err = err.max((value - v2).abs());
        }
        // mass defect of the rule itself
        err = err.max(abs * (self.mass() - self.target_mass).abs() / self.target_mass);
        Ok(IntegralResult { value, std_error: err, n_points: self.len(), converged: true })
    }
}

impl Measure for EmpiricalMeasure {
    fn integrate(&self, f: &dyn Fn(&[Complex64]) -> f64) -> Result<IntegralResult> {
        let n = self.samples.len();
        if n == 0 {
            return Err(invalid("empty empirical measure"));
        }
        let vals = self.samples.iter().map(|z| checked(f(z))).collect::<Result<Vec<f64>>>()?;
        let mean = vals.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Ok(IntegralResult {
            value: mean,
            std_error: (var / n as f64).sqrt(),
            n_points: n,
            converged: true,
        })
    }
}

/// Harmonic measure of a ball or disc relative to an interior point: uniform
/// sphere nodes weighted by the Poisson kernel times the surface element.
pub fn harmonic_measure_exact(shape: &Shape, z0: &[Complex64], n_nodes: usize) -> Result<BoundaryQuadrature> {
    if n_nodes < 8 {
        return Err(invalid("at least 8 nodes are required"));
    }
    let (center, radius) = match shape {
        Shape::Ball { center, radius } => (center, *radius),
        other => return Err(unsupported(format!("no closed-form Poisson kernel for {other:?}"))),
    };
    if z0.len() != center.len() {
        return Err(LabError::DimensionMismatch { expected: center.len(), got: z0.len() });
    }
    if !shape.contains(z0) {
        return Err(LabError::OutsideDomain);
    }
    let n = center.len();
    let m = 2 * n;
    let rho2 = point::dist(z0, center).powi(2);
    let build = |res: SphereResolution| -> BoundaryQuadrature {
        let rule = sphere_rule(n, res);
        let mut nodes = Vec::with_capacity(rule.nodes.len());
        let mut weights = Vec::with_capacity(rule.nodes.len());
        for (u, w) in rule.nodes.iter().zip(&rule.weights) {
            let b = point::add(center, &point::scale(u, radius));
            // P(z0, b) dS = w R^{m-2} (R^2 - rho^2) / |z0 - b|^m
            let d = point::dist(z0, &b);
            weights.push(w * radius.powi(m as i32 - 2) * (radius * radius - rho2) / d.powi(m as i32));
            nodes.push(b);
        }
        BoundaryQuadrature { nodes, weights, target_mass: 1.0, error_estimate: 0.0, coarse: None }
    };
    let res = SphereResolution::for_nodes(n, n_nodes);
    let mut q = build(res);
    q.coarse = Some(Box::new(build(res.coarsen())));
    Ok(q.finish_error(false))
}

/// Walk-on-spheres estimate of the harmonic measure of `shape` at `z0`.
///
/// Walk `i` draws from its own ChaCha stream, so the output does not depend on
/// how walks are scheduled across threads.
pub fn harmonic_measure_wos(shape: &Shape, z0: &[Complex64], walks: usize, eps_shell: f64, seed: u64) -> Result<EmpiricalMeasure> {
    if !(eps_shell > 0.0) {
        return Err(invalid("eps_shell must be positive"));
    }
    if walks == 0 {
        return Err(invalid("at least one walk is required"));
    }
    shape.boundary_distance(z0)?;
    let max_attempts = 8u64;
    let results: Vec<Result<(Point, usize)>> = (0..walks as u64)
        .into_par_iter()
        .map(|i| {
            let mut rejected = 0;
            for attempt in 0..max_attempts {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i | (attempt << 48));
                if let Some(p) = single_walk(shape, z0, eps_shell, &mut rng)? {
                    return Ok((p, rejected));
                }
                rejected += 1;
            }
            Err(LabError::TooManyRejections { rejected: walks, walks, cap: WOS_STEP_CAP })
        })
        .collect();
    let mut samples = Vec::with_capacity(walks);
    let mut rejected = 0;
    for r in results {
        let (p, k) = r?;
        samples.push(p);
        rejected += k;
    }
    if rejected as f64 > WOS_MAX_REJECTED_FRACTION * walks as f64 {
        return Err(LabError::TooManyRejections { rejected, walks, cap: WOS_STEP_CAP });
    }
    Ok(EmpiricalMeasure { samples, walk_count: walks, eps_shell, seed, rejected })
}

fn single_walk(shape: &Shape, z0: &[Complex64], eps: f64, rng: &mut ChaCha8Rng) -> Result<Option<Point>> {
    let m = 2 * z0.len();
    let mut x = point::to_real(z0);
    let mut dir = vec![0.0; m];
    for _ in 0..WOS_STEP_CAP {
        let z = point::from_real(&x);
        let d = match shape.boundary_distance(&z) {
            Ok(d) => d,
            Err(LabError::OutsideDomain) => 0.0,
            Err(e) => return Err(e),
        };
        if d < eps {
            return shape.project(&z).map(Some);
        }
        let mut len2: f64 = 0.0;
        for v in dir.iter_mut() {
            *v = rng.sample(StandardNormal);
            len2 += *v * *v;
        }
        let s = d / len2.sqrt();
        for (xi, v) in x.iter_mut().zip(&dir) {
            *xi += s * v;
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    Exact,
    Wos,
}

/// How boundary integrals over an exhaustion level are computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Engine {
    pub kind: EngineKind,
    /// Starting quadrature size for the exact engine.
    pub nodes: usize,
    /// Double the node count until the integral stabilizes.
    pub adaptive: bool,
    pub walks: usize,
    /// Absorption shell relative to the level's size.
    pub eps_shell: f64,
    pub seed: u64,
}

impl Default for Engine {
    fn default() -> Self {
        Self { kind: EngineKind::Exact, nodes: 4096, adaptive: true, walks: 100_000, eps_shell: 1e-6, seed: 0 }
    }
}

impl Engine {
    pub fn exact(nodes: usize) -> Self {
        Self { nodes, ..Self::default() }
    }

    pub fn wos(walks: usize, seed: u64) -> Self {
        Self { kind: EngineKind::Wos, walks, seed, ..Self::default() }
    }
}

pub type PointFn<'a> = &'a (dyn Fn(&[Complex64]) -> f64 + Sync);

/// Integrate several functions against quadratures produced by `build(nodes)`,
/// doubling `nodes` while any integral moves by more than [`ADAPTIVE_REL_TOL`].
pub fn integrate_refined(
    build: &dyn Fn(usize) -> Result<BoundaryQuadrature>,
    fs: &[PointFn<'_>],
    start_nodes: usize,
    adaptive: bool,
) -> Result<Vec<IntegralResult>> {
    let mut nodes = start_nodes;
    loop {
        let q = build(nodes)?;
        let results = fs.iter().map(|f| q.integrate(f)).collect::<Result<Vec<_>>>()?;
        let settled = results
            .iter()
            .all(|r| r.std_error <= ADAPTIVE_REL_TOL * r.value.abs() || r.std_error <= 1e-12);
        if !adaptive || settled {
            return Ok(results);
        }
        if nodes * 2 > ADAPTIVE_NODE_CAP {
            return Ok(results.into_iter().map(|r| IntegralResult { converged: false, ..r }).collect());
        }
        nodes *= 2;
    }
}

/// Integrals of `fs` against the harmonic measure of `shape` at `z0`.
pub fn harmonic_integrals(shape: &Shape, z0: &[Complex64], fs: &[PointFn<'_>], engine: &Engine) -> Result<Vec<IntegralResult>> {
    match engine.kind {
        EngineKind::Exact => {
            let build = |n: usize| harmonic_measure_exact(shape, z0, n);
            integrate_refined(&build, fs, engine.nodes, engine.adaptive)
        }
        EngineKind::Wos => {
            let em = harmonic_measure_wos(shape, z0, engine.walks, engine.eps_shell * shape.scale(), engine.seed)?;
            fs.iter().map(|f| em.integrate(f)).collect()
        }
    }
}

/// Mean of a periodic function over `[0, 2 pi)` by the trapezoid rule with node
/// doubling. Returns `(value, last change, nodes, converged)`.
pub fn adaptive_circle_mean(
    f: &(dyn Fn(f64) -> f64 + Sync),
    start: usize,
    rel_tol: f64,
    cap: usize,
) -> Result<(f64, f64, usize, bool)> {
    let mut n = start.max(8);
    let eval = |k: usize, n: usize| checked(f(2.0 * PI * k as f64 / n as f64));
    let mut sum = (0..n).into_par_iter().map(|k| eval(k, n)).collect::<Result<Vec<_>>>()?.iter().sum::<f64>();
    let mut value = sum / n as f64;
    loop {
        if 2 * n > cap {
            return Ok((value, f64::INFINITY, n, false));
        }
        // odd nodes of the doubled grid
        let extra: f64 = (0..n)
            .into_par_iter()
            .map(|k| eval(2 * k + 1, 2 * n))
            .collect::<Result<Vec<_>>>()?
            .iter()
            .sum();
        sum += extra;
        n *= 2;
        let next = sum / n as f64;
        let change = (next - value).abs();
        value = next;
        if change <= rel_tol * value.abs() {
            return Ok((value, change, n, true));
        }
    }
}
