//! Sampled plurisubharmonicity certificates from finite-difference complex Hessians.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::TestFunction;
use crate::error::{invalid, LabError, Result};
use crate::geometry::{DomainKind, ModelDomain};
use crate::point::Point;

/// Tolerance factor: an eigenvalue passes when it is at least `-TOL_FACTOR h^2`.
const TOL_FACTOR: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub p: f64,
    pub tau: f64,
    /// Multiplier of `(u^2 + tau)^{p/2}` in the comparison function.
    pub coefficient: f64,
    pub h: f64,
    pub tolerance: f64,
    pub points: Vec<Point>,
    pub min_eigenvalues: Vec<f64>,
    pub pass: bool,
}

impl CertificateReport {
    pub fn failures(&self) -> usize {
        self.min_eigenvalues.iter().filter(|l| **l < -self.tolerance).count()
    }

    pub fn fail_fraction(&self) -> f64 {
        if self.min_eigenvalues.is_empty() {
            return 0.0;
        }
        self.failures() as f64 / self.min_eigenvalues.len() as f64
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// One row per point: real coordinates then the minimum eigenvalue.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let n = self.points.first().map_or(0, |p| p.len());
        let mut head: Vec<String> = (0..n).flat_map(|j| [format!("x{j}"), format!("y{j}")]).collect();
        head.push("min_eigenvalue".into());
        writeln!(out, "{}", head.join(","))?;
        for (p, l) in self.points.iter().zip(&self.min_eigenvalues) {
            let mut row: Vec<String> = p.iter().flat_map(|z| [z.re.to_string(), z.im.to_string()]).collect();
            row.push(l.to_string());
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Complex Hessian `(d^2 phi / dz_j dzbar_k)` by central differences in the
/// real coordinates.
pub fn complex_hessian(phi: &dyn Fn(&[Complex64]) -> f64, z: &[Complex64], h: f64) -> Vec<Vec<Complex64>> {
    let n = z.len();
    let m = 2 * n;
    let at = |steps: &[(usize, f64)]| {
        let mut w = z.to_vec();
        for (a, s) in steps {
            let d = if a % 2 == 0 { Complex64::new(*s, 0.0) } else { Complex64::new(0.0, *s) };
            w[a / 2] += d;
        }
        phi(&w)
    };
    let c = phi(z);
    let mut r = vec![vec![0.0; m]; m];
    for a in 0..m {
        r[a][a] = (at(&[(a, h)]) - 2.0 * c + at(&[(a, -h)])) / (h * h);
        for b in 0..a {
            let v = (at(&[(a, h), (b, h)]) - at(&[(a, h), (b, -h)]) - at(&[(a, -h), (b, h)]) + at(&[(a, -h), (b, -h)]))
                / (4.0 * h * h);
            r[a][b] = v;
            r[b][a] = v;
        }
    }
    (0..n)
        .map(|j| {
            (0..n)
                .map(|k| {
                    let (xj, yj, xk, yk) = (2 * j, 2 * j + 1, 2 * k, 2 * k + 1);
                    Complex64::new(r[xj][xk] + r[yj][yk], r[xj][yk] - r[yj][xk]) / 4.0
                })
                .collect()
        })
        .collect()
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn hermitian_min_eigenvalue(hm: &[Vec<Complex64>]) -> f64 {
    match hm.len() {
        0 => 0.0,
        1 => hm[0][0].re,
        2 => {
            let (a, d) = (hm[0][0].re, hm[1][1].re);
            let b = 0.5 * (hm[0][1] + hm[1][0].conj());
            0.5 * (a + d) - (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt()
        }
        n => {
            // real embedding [[A, -B], [B, A]] of A + iB doubles each eigenvalue
            let emb = DMatrix::from_fn(2 * n, 2 * n, |r, c| {
                let (i, j) = (r % n, c % n);
                let h = 0.5 * (hm[i][j] + hm[j][i].conj());
                match (r < n, c < n) {
                    (true, true) | (false, false) => h.re,
                    (true, false) => -h.im,
                    (false, true) => h.im,
                }
            });
            emb.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
        }
    }
}

/// Smallest eigenvalue of the Levi form of `phi` at `z`.
pub fn levi_min_eigenvalue(phi: &dyn Fn(&[Complex64]) -> f64, z: &[Complex64], h: f64) -> f64 {
    hermitian_min_eigenvalue(&complex_hessian(phi, z, h))
}

/// Certificate that `(p/(p-1)) (u^2 + tau)^{p/2} - (|f|^2 + tau)^{p/2}` is psh at
/// the sample points.
pub fn psh_certificate(
    f: &TestFunction,
    domain: &ModelDomain,
    p: f64,
    tau: f64,
    points: &[Point],
    h: f64,
) -> Result<CertificateReport> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(LabError::Hypothesis { check: "psh_certificate".into(), hypothesis: format!("1 < p <= 2 (got {p})") });
    }
    psh_certificate_with_coefficient(f, domain, p, tau, p / (p - 1.0), points, h)
}

/// [`psh_certificate`] with an arbitrary multiplier in place of `p/(p-1)`.
pub fn psh_certificate_with_coefficient(
    f: &TestFunction,
    domain: &ModelDomain,
    p: f64,
    tau: f64,
    coefficient: f64,
    points: &[Point],
    h: f64,
) -> Result<CertificateReport> {
    if !(p > 1.0) {
        return Err(invalid(format!("p must exceed 1 (got {p})")));
    }
    if !(tau > 0.0) {
        return Err(LabError::Hypothesis { check: "psh_certificate".into(), hypothesis: format!("tau > 0 (got {tau})") });
    }
    if !(h > 0.0) {
        return Err(invalid("finite-difference step must be positive"));
    }
    for z in points {
        if z.len() != domain.dim() {
            return Err(LabError::DimensionMismatch { expected: domain.dim(), got: z.len() });
        }
        if !domain.contains(z)? || domain.boundary_distance(z)? < 2.0 * h {
            return Err(invalid("certificate points need a boundary margin of at least 2h"));
        }
    }
    let phi = |z: &[Complex64]| {
        let w = f.eval(z);
        coefficient * (w.re * w.re + tau).powf(p / 2.0) - (w.norm_sqr() + tau).powf(p / 2.0)
    };
    let min_eigenvalues: Vec<f64> = points.par_iter().map(|z| levi_min_eigenvalue(&phi, z, h)).collect();
    let tolerance = TOL_FACTOR * h * h;
    let pass = min_eigenvalues.iter().all(|l| *l >= -tolerance);
    Ok(CertificateReport { p, tau, coefficient, h, tolerance, points: points.to_vec(), min_eigenvalues, pass })
}

/// Uniform interior points with `boundary_distance >= margin`, by rejection from
/// a bounding box.
pub fn sample_interior_points(domain: &ModelDomain, count: usize, margin: f64, seed: u64) -> Result<Vec<Point>> {
    let n = domain.dim();
    let half = match domain.kind() {
        DomainKind::GeneralSdf(_) => 4.0,
        _ => 1.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let max_attempts = 10_000 * count.max(1) + 100_000;
    for _ in 0..max_attempts {
        if out.len() == count {
            break;
        }
        let z: Point = (0..n)
            .map(|_| Complex64::new(rng.random_range(-half..half), rng.random_range(-half..half)))
            .collect();
        if domain.contains(&z)? && (margin <= 0.0 || domain.boundary_distance(&z)? >= margin) {
            out.push(z);
        }
    }
    if out.len() < count {
        return Err(invalid(format!("could only sample {} of {count} interior points", out.len())));
    }
    Ok(out)
}
