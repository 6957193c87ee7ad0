use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;

use super::{engine_json, inputs, CheckReport, Criterion};
use crate::error::{hypothesis, invalid, unsupported, Result};
use crate::functions::{complex_hessian, hermitian_min_eigenvalue, sample_interior_points};
use crate::geometry::{DomainKind, ExhaustionLevel, ModelDomain, Shape};
use crate::hardy::{level_integrals, ps_level_integrals};
use crate::measure::{Engine, PointFn};
use crate::point::{self, Point};
use crate::potential::{green_ball, pluriharmonic_mass, DDC};
use crate::rules::{gauss_legendre_unit, sphere_rule, SphereResolution};

/// Radius of the ball around the pole left out of the Poisson-Jensen volume integral.
pub const PJ_EXCLUSION_RADIUS: f64 = 1e-3;
/// The same for the Lelong-Jensen volume side, where `phi` is only
/// differentiated away from the logarithmic pole.
const LJ_EXCLUSION_RADIUS: f64 = 1e-7;
/// Finite-difference step for Laplacians and complex Hessians.
const FD_STEP: f64 = 1e-4;
/// Ratio of consecutive radial panels and Gauss-Legendre order per panel.
const PANEL_RATIO: f64 = 4.0;
const PANEL_ORDER: usize = 12;
/// Sample points used to screen plurisubharmonicity.
const PSH_SAMPLES: usize = 64;

/// Gauss-Legendre on geometrically graded panels of `[a, b]`.
fn graded_rule(a: f64, b: f64, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre_unit(order);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut lo = a;
    while lo < b {
        let hi = (lo * PANEL_RATIO).min(b);
        let hi = if b - hi < 0.25 * (hi - lo) { b } else { hi };
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(lo + (hi - lo) * xi);
            weights.push((hi - lo) * wi);
        }
        lo = hi;
    }
    (nodes, weights)
}

/// `int_{B} F` over the ball `|x - c| < R` in C^n minus a small ball around
/// `z0`, in polar coordinates about `z0`. Returns (fine, coarse, excluded bound).
fn polar_volume(
    center: &[Complex64],
    radius: f64,
    z0: &[Complex64],
    n_points: usize,
    exclusion: f64,
    f: &(dyn Fn(&[Complex64]) -> f64 + Sync),
) -> (f64, f64, f64) {
    let n = z0.len();
    let m = 2 * n;
    let area = point::unit_sphere_area(m);
    let d = point::sub(z0, center);
    let d2 = point::norm_sqr(&d);
    let delta = exclusion.min(0.5 * (radius - d2.sqrt()));
    let integrate = |dirs: usize, order: usize| -> f64 {
        let rule = sphere_rule(n, SphereResolution::for_nodes(n, dirs));
        rule.nodes
            .par_iter()
            .zip(&rule.weights)
            .map(|(u, w)| {
                let b = point::inner(&d, u).re;
                let len = -b + (b * b - (d2 - radius * radius)).sqrt();
                let (rs, ws) = graded_rule(delta, len, order);
                let s: f64 = rs
                    .iter()
                    .zip(&ws)
                    .map(|(r, wr)| {
                        let x = point::add(z0, &point::scale(u, *r));
                        wr * r.powi(m as i32 - 1) * f(&x)
                    })
                    .sum();
                w * area * s
            })
            .collect::<Vec<f64>>()
            .iter()
            .sum()
    };
    let radial_per_dir = 6 * PANEL_ORDER;
    let dirs = (n_points / radial_per_dir).max(16);
    let fine = integrate(dirs, PANEL_ORDER);
    let coarse = integrate((dirs / 2).max(8), PANEL_ORDER / 2);
    // |F| r^{m-1} behaves at worst like r |log r| near the pole
    let probe = sphere_rule(n, SphereResolution::for_nodes(n, 64));
    let edge = probe
        .nodes
        .iter()
        .map(|u| (f(&point::add(z0, &point::scale(u, delta))) * delta.powi(m as i32 - 1)).abs())
        .fold(0.0, f64::max);
    (fine, coarse, 2.0 * area * delta * edge)
}

fn laplacian(phi: PointFn<'_>, z: &[Complex64], h: f64) -> f64 {
    let c = phi(z);
    let mut s = 0.0;
    for j in 0..z.len() {
        for dir in [Complex64::new(h, 0.0), Complex64::new(0.0, h)] {
            let mut p = z.to_vec();
            let mut q = z.to_vec();
            p[j] += dir;
            q[j] -= dir;
            s += phi(&p) - 2.0 * c + phi(&q);
        }
    }
    s / (h * h)
}

/// Poisson-Jensen identity on a ball level:
/// `int phi d omega = phi(z0) - int G Laplacian(phi)`, with `G` the Green
/// function of the level with pole `z0`.
pub fn check_poisson_jensen(
    phi: PointFn<'_>,
    domain: &ModelDomain,
    level: &ExhaustionLevel,
    n_interior: usize,
    engine: &Engine,
) -> Result<CheckReport> {
    let (center, radius) = match &level.shape {
        Shape::Ball { center, radius } => (center.clone(), *radius),
        other => return Err(unsupported(format!("Poisson-Jensen needs a ball level, got {other:?}"))),
    };
    let z0 = domain.z0();
    if !level.contains(z0) {
        return Err(crate::error::LabError::OutsideDomain);
    }
    let boundary = level_integrals(level, z0, &[phi], engine, 0)?.remove(0);
    let c_real = point::to_real(&center);
    let pole: Vec<f64> = point::to_real(z0).iter().zip(&c_real).map(|(a, b)| a - b).collect();
    let volume_integrand = |x: &[Complex64]| {
        let rel: Vec<f64> = point::to_real(x).iter().zip(&c_real).map(|(a, b)| a - b).collect();
        let g = green_ball(&pole, radius, &rel).unwrap_or(0.0);
        g * laplacian(phi, x, FD_STEP * radius)
    };
    let (vol, vol_coarse, excluded) = polar_volume(&center, radius, z0, n_interior, PJ_EXCLUSION_RADIUS, &volume_integrand);
    // rounding in the second differences: 4n evaluations at relative error eps over h^2
    let h = FD_STEP * radius;
    let noise = |x: &[Complex64]| {
        let rel: Vec<f64> = point::to_real(x).iter().zip(&c_real).map(|(a, b)| a - b).collect();
        let g = green_ball(&pole, radius, &rel).unwrap_or(0.0);
        g.abs() * 16.0 * x.len() as f64 * f64::EPSILON * (1.0 + phi(x).abs()) / (h * h)
    };
    let (rounding, _, _) = polar_volume(&center, radius, z0, n_interior / 8, PJ_EXCLUSION_RADIUS, &noise);
    let phi0 = phi(z0);
    let bound = phi0 - vol;
    let error = boundary.std_error + (vol - vol_coarse).abs() + excluded + rounding + 1e-12 * (1.0 + phi0.abs());
    let extra = json!({"t": level.t, "n_interior": n_interior, "engine": engine_json(engine)});
    Ok(CheckReport::new("poisson_jensen", inputs(None, domain, extra), boundary.value, bound, error, Criterion::Identity)
        .detail("boundary_integral", boundary.value)
        .detail("phi_z0", phi0)
        .detail("green_laplacian_integral", vol)
        .detail("residual", (boundary.value - bound).abs())
        .detail("excluded_radius", PJ_EXCLUSION_RADIUS)
        .detail("excluded_bound", excluded)
        .detail("rounding_bound", rounding)
        .require_converged(boundary.converged))
}

/// Density of `dd^c phi ^ (dd^c log|z|)^{n-1}` against Lebesgue measure for
/// `n = 1, 2`, from the complex Hessian of `phi`.
fn mixed_density(phi: PointFn<'_>, z: &[Complex64]) -> f64 {
    let a = complex_hessian(phi, z, FD_STEP);
    match z.len() {
        1 => DDC.hessian_to_density * a[0][0].re,
        _ => {
            // complex Hessian of log|z|: (I / |z|^2 - conj(z) z^T / |z|^4) / 2
            let r2 = point::norm_sqr(z);
            let b = |j: usize, k: usize| {
                let delta = if j == k { 1.0 / r2 } else { 0.0 };
                (Complex64::new(delta, 0.0) - z[j].conj() * z[k] / (r2 * r2)) * 0.5
            };
            let det = a[0][0] * b(1, 1) + a[1][1] * b(0, 0) - a[0][1] * b(1, 0) - a[1][0] * b(0, 1);
            DDC.hessian_to_density * DDC.hessian_to_density * det.re
        }
    }
}

/// Lelong-Jensen identity
/// `int phi d mu_{z0,t} - (2 pi)^n phi(z0) = int_{Omega_t} (-t - g) dd^c phi ^ (dd^c g)^{n-1}`.
///
/// The right side is 0 for pluriharmonic `phi`; otherwise it is computed by
/// volume quadrature, which needs a centered pole on the disc or on Ball(2).
pub fn check_lelong_jensen(
    phi: PointFn<'_>,
    domain: &ModelDomain,
    t: f64,
    n_interior: usize,
    engine: &Engine,
) -> Result<CheckReport> {
    if !domain.is_hyperconvex_model() {
        return Err(unsupported(format!("{} has no pluricomplex Green function model", domain.name())));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid(format!("t must be positive (got {t})")));
    }
    let n = domain.dim();
    let z0 = domain.z0();
    let samples = sample_interior_points(domain, PSH_SAMPLES, 2.0 * FD_STEP, 0x4c4a)?;
    let tol = 1e3 * FD_STEP * FD_STEP;
    let mut pluriharmonic = true;
    for z in &samples {
        let h = complex_hessian(phi, z, FD_STEP);
        let min = hermitian_min_eigenvalue(&h);
        if min < -tol {
            return Err(hypothesis("lelong_jensen", format!("phi psh (Levi eigenvalue {min:e} at {z:?})")));
        }
        let scale = 1.0 + phi(z).abs();
        pluriharmonic &= h.iter().flatten().all(|x| x.norm() <= tol * scale);
    }
    let mass = pluriharmonic_mass(n);
    let boundary = ps_level_integrals(domain, z0, t, &[phi], engine)?.remove(0);
    let phi0 = phi(z0);
    let lhs = boundary.value - mass * phi0;
    let (rhs, rhs_error, method) = if pluriharmonic {
        (0.0, 0.0, "pluriharmonic")
    } else {
        let supported = matches!(domain.kind(), DomainKind::UnitDisc | DomainKind::Ball { .. } | DomainKind::Polydisc { n: 1 });
        if !domain.is_centered() || !supported || n > 2 {
            return Err(unsupported("the volume side needs a centered pole on the disc or Ball(2)"));
        }
        let s = (-t).exp();
        let integrand = |z: &[Complex64]| (-t - point::norm(z).ln()) * mixed_density(phi, z);
        let origin: Point = point::origin(n);
        let (fine, coarse, excluded) = polar_volume(&origin, s, &origin, n_interior, LJ_EXCLUSION_RADIUS, &integrand);
        (fine, (fine - coarse).abs() + excluded, "volume_quadrature")
    };
    let error = boundary.std_error + mass * 1e-12 * (1.0 + phi0.abs()) + rhs_error;
    let extra = json!({"t": t, "n_interior": n_interior, "engine": engine_json(engine)});
    Ok(CheckReport::new("lelong_jensen", inputs(None, domain, extra), lhs, rhs, error, Criterion::Identity)
        .detail("mu_integral", boundary.value)
        .detail("phi_z0", phi0)
        .detail("rhs_method", method)
        .detail("relative_residual", (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE))
        .require_converged(boundary.converged))
}
