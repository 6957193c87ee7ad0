//! Closed-form kernels: Euclidean Green functions and Poisson kernels of balls,
//! pluricomplex Green functions of the disc, ball and polydisc, and the
//! pluriharmonic measures `(dd^c g_{z0,t})^n`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use crate::error::{invalid, unsupported, LabError, Result};
use crate::geometry::{DomainKind, ModelDomain};
use crate::point::{self, unit_sphere_area, Point};
use crate::rules::{sphere_rule, torus_rule, Rule, SphereResolution};

/// Relative floor applied to quadrature error estimates (accumulated rounding).
pub const QUADRATURE_FLOOR: f64 = 1e-12;

/// Normalization of the real operator `d^c`.
///
/// `d^c = i (dbar - d)`, so `dd^c = 2i d dbar`. For one complex variable
/// `dd^c u = (Laplacian u) dA`, which gives `dd^c log|z - z0|` a point mass of
/// `2 pi`, and `(dd^c g)^n` total mass `(2 pi)^n` for a pluricomplex Green
/// function `g`.
#[derive(Debug, Clone, Copy)]
pub struct DdcConvention {
    /// Mass of `dd^c log|z|` at the origin in C.
    pub log_pole_mass: f64,
    /// Multiplier from the complex Hessian `d^2 u / dz dzbar` to the density of
    /// `dd^c u` against Lebesgue measure in C (the Laplacian is 4 u_{z zbar}).
    pub hessian_to_density: f64,
}

pub const DDC: DdcConvention = DdcConvention { log_pole_mass: 2.0 * PI, hessian_to_density: 4.0 };

pub fn dd_c_convention() -> DdcConvention {
    DDC
}

/// Total mass of the pluriharmonic measure in C^n.
pub fn pluriharmonic_mass(n: usize) -> f64 {
    (2.0 * PI).powi(n as i32)
}

/// Green function of the ball `|x| < radius` in R^m with `Laplacian G = delta_pole`,
/// negative inside and zero on the boundary.
///
/// Returns `-inf` at the pole and 0 on the boundary.
pub fn green_ball(pole: &[f64], radius: f64, z: &[f64]) -> Result<f64> {
    let m = z.len();
    if m < 2 || pole.len() != m {
        return Err(invalid("green_ball needs matching points of dimension m >= 2"));
    }
    if radius <= 0.0 {
        return Err(invalid("radius must be positive"));
    }
    let r2 = radius * radius;
    let z2: f64 = z.iter().map(|v| v * v).sum();
    let y2: f64 = pole.iter().map(|v| v * v).sum();
    if y2 >= r2 {
        return Err(LabError::OutsideDomain);
    }
    if z2 > r2 * (1.0 + 1e-14) {
        return Err(LabError::OutsideDomain);
    }
    let d: f64 = z.iter().zip(pole).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    if d == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    // |y| |x - y*| / R with y* = R^2 y / |y|^2, which tends to R as y -> 0
    let dot: f64 = z.iter().zip(pole).map(|(a, b)| a * b).sum();
    let reflected = ((z2 * y2 - 2.0 * r2 * dot + r2 * r2) / r2).max(0.0).sqrt();
    let g = if m == 2 {
        (d.ln() - reflected.ln()) / (2.0 * PI)
    } else {
        let c = 1.0 / ((m as f64 - 2.0) * unit_sphere_area(m));
        let e = 2.0 - m as f64;
        -c * (d.powf(e) - reflected.powf(e))
    };
    Ok(g.min(0.0))
}

/// Poisson kernel of the ball `|x - center| < radius` in R^m against surface
/// measure.
pub fn poisson_kernel(center: &[f64], radius: f64, x0: &[f64], b: &[f64]) -> Result<f64> {
    let m = center.len();
    if x0.len() != m || b.len() != m || m < 2 {
        return Err(invalid("poisson_kernel needs points of a common dimension m >= 2"));
    }
    let rho2: f64 = x0.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
    if rho2 >= radius * radius {
        return Err(LabError::OutsideDomain);
    }
    let d2: f64 = x0.iter().zip(b).map(|(a, c)| (a - c) * (a - c)).sum();
    Ok((radius * radius - rho2) / (unit_sphere_area(m) * radius * d2.powf(m as f64 / 2.0)))
}

/// Disc automorphism exchanging `a` and 0: `(a - z) / (1 - conj(a) z)`.
pub fn moebius_disc(a: Complex64, z: Complex64) -> Complex64 {
    (a - z) / (1.0 - a.conj() * z)
}

/// Involutive automorphism of the unit ball exchanging `a` and 0.
pub fn moebius_ball(a: &[Complex64], z: &[Complex64]) -> Point {
    let a2 = point::norm_sqr(a);
    if a2 == 0.0 {
        return z.iter().map(|w| -w).collect();
    }
    let za = point::inner(z, a);
    let sa = (1.0 - a2).sqrt();
    let den = 1.0 - za;
    a.iter()
        .zip(z)
        .map(|(aj, zj)| {
            let proj = aj * (za / a2);
            (aj - proj - (zj - proj) * sa) / den
        })
        .collect()
}

/// `log |phi_a(z)|` for the ball automorphism, computed without cancellation.
pub(crate) fn ball_green(a: &[Complex64], z: &[Complex64]) -> f64 {
    let za = point::inner(z, a);
    let den = (1.0 - za).norm_sqr();
    let num = point::dist(z, a).powi(2) - (point::norm_sqr(a) * point::norm_sqr(z) - za.norm_sqr());
    0.5 * (num.max(0.0) / den).ln()
}

/// Pluricomplex Green function `g_Omega(z, z0)` of the disc, ball or polydisc.
pub fn pluri_green(domain: &ModelDomain, z0: &[Complex64], z: &[Complex64]) -> Result<f64> {
    let n = domain.dim();
    if z.len() != n || z0.len() != n {
        return Err(LabError::DimensionMismatch { expected: n, got: z.len().min(z0.len()) });
    }
    if !domain.contains(z)? || !domain.contains(z0)? {
        return Err(LabError::OutsideDomain);
    }
    match domain.kind() {
        DomainKind::UnitDisc | DomainKind::Ball { .. } => {
            if z == z0 {
                return Ok(f64::NEG_INFINITY);
            }
            Ok(ball_green(z0, z))
        }
        DomainKind::Polydisc { .. } => Ok(z
            .iter()
            .zip(z0)
            .map(|(w, a)| moebius_disc(*a, *w).norm().ln())
            .fold(f64::NEG_INFINITY, f64::max)),
        _ => Err(unsupported(format!("no pluricomplex Green function for {}", domain.name()))),
    }
}

/// Nodes on a boundary with nonnegative weights.
#[derive(Debug, Clone)]
pub struct BoundaryQuadrature {
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
    /// 1 for harmonic measure, `(2 pi)^n` for pluriharmonic measure.
    pub target_mass: f64,
    pub error_estimate: f64,
    /// The same construction at roughly half resolution, used for refinement
    /// error estimates.
    pub coarse: Option<Box<BoundaryQuadrature>>,
}

impl BoundaryQuadrature {
    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub(crate) fn sum(&self, f: impl Fn(&[Complex64]) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(z, w)| w * f(z)).sum()
    }

    /// Set `error_estimate` from the mass defect and from the change of a fixed
    /// probe integral (`|z|^2`) between this rule and its coarse version.
    pub(crate) fn finish_error(mut self, probe: bool) -> Self {
        let mut err = (self.mass() - self.target_mass).abs();
        if let Some(coarse) = &self.coarse {
            err = err.max((coarse.mass() - self.mass()).abs());
            if probe {
                let fine = self.sum(point::norm_sqr);
                let crude = coarse.sum(point::norm_sqr);
                err = err.max((fine - crude).abs());
            }
        }
        self.error_estimate = err.max(QUADRATURE_FLOOR * self.target_mass);
        self
    }

    /// CSV dump: one row per node with the real coordinates and the weight.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let n = self.nodes.first().map_or(0, |z| z.len());
        let mut header: Vec<String> = (0..n).flat_map(|j| [format!("re_z{j}"), format!("im_z{j}")]).collect();
        header.push("weight".into());
        writeln!(out, "{}", header.join(","))?;
        for (z, w) in self.nodes.iter().zip(&self.weights) {
            let mut row: Vec<String> = point::to_real(z).iter().map(|v| format!("{v:.17e}")).collect();
            row.push(format!("{w:.17e}"));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Pluriharmonic measure `mu_{z0,t} = (dd^c max(-t, g(., z0)))^n` of the disc,
/// ball or polydisc, supported on `{g = -t}` with mass `(2 pi)^n`.
///
/// Centered poles give the uniform measure on the sphere (ball) or torus
/// (polydisc) of radius `e^{-t}`; off-center poles push that measure forward
/// under the automorphism exchanging 0 and `z0`.
pub fn pluriharmonic_measure(domain: &ModelDomain, z0: &[Complex64], t: f64, n_nodes: usize) -> Result<BoundaryQuadrature> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid(format!("pluriharmonic measure needs t > 0, got {t}")));
    }
    if n_nodes < 8 {
        return Err(invalid("at least 8 nodes are required"));
    }
    if !domain.contains(z0)? {
        return Err(LabError::OutsideDomain);
    }
    let n = domain.dim();
    let build = |rule: Rule, torus: bool| -> BoundaryQuadrature {
        let s = (-t).exp();
        let mass = pluriharmonic_mass(n);
        let centered = z0.iter().all(|c| c.norm() == 0.0);
        let nodes = rule
            .nodes
            .into_iter()
            .map(|w| {
                let w = point::scale(&w, s);
                if centered {
                    w
                } else if torus || n == 1 {
                    w.iter().zip(z0).map(|(wj, aj)| moebius_disc(*aj, *wj)).collect()
                } else {
                    moebius_ball(z0, &w)
                }
            })
            .collect();
        BoundaryQuadrature {
            nodes,
            weights: rule.weights.iter().map(|w| w * mass).collect(),
            target_mass: mass,
            error_estimate: 0.0,
            coarse: None,
        }
    };
    let q = match domain.kind() {
        DomainKind::UnitDisc | DomainKind::Ball { .. } => {
            let res = SphereResolution::for_nodes(n, n_nodes);
            let mut q = build(sphere_rule(n, res), false);
            q.coarse = Some(Box::new(build(sphere_rule(n, res.coarsen()), false)));
            q
        }
        DomainKind::Polydisc { .. } => {
            let m = ((n_nodes as f64).powf(1.0 / n as f64).round() as usize).max(4);
            let mut q = build(torus_rule(n, m), true);
            q.coarse = Some(Box::new(build(torus_rule(n, (m / 2).max(2)), true)));
            q
        }
        _ => return Err(unsupported(format!("no pluriharmonic measure for {}", domain.name()))),
    };
    Ok(q.finish_error(true))
}
