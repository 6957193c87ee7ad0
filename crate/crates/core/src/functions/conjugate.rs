//! Harmonic conjugates: on the disc from Fourier data, in several variables by
//! integrating `d^c u` along a path.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{CValue, FnSpec, TestFunction};
use crate::error::{invalid, LabError, Result};
use crate::geometry::ModelDomain;
use crate::point::{self, Point};
use crate::rules::gauss_legendre_unit;

/// Tolerance on the Hermitian symmetry `c_{-k} = conj(c_k)` of real data.
const SYMMETRY_TOL: f64 = 1e-12;

/// Holomorphic `f` with `Re f = u` on the circle, for
/// `u(theta) = sum_{|k| <= K} coeffs[k + K] e^{i k theta}`.
/// The result is `c_0 + 2 sum_{k >= 1} c_k z^k`, so `Im f(0) = 0`.
pub fn conjugate_disc(coeffs: &[Complex64]) -> Result<TestFunction> {
    if coeffs.len() % 2 != 1 {
        return Err(invalid("coefficient vector must have odd length 2K + 1"));
    }
    let k = coeffs.len() / 2;
    let scale = coeffs.iter().map(|c| c.norm()).fold(1.0, f64::max);
    for j in 0..=k {
        let (neg, pos) = (coeffs[k - j], coeffs[k + j]);
        if (neg - pos.conj()).norm() > SYMMETRY_TOL * scale {
            return Err(invalid(format!("coefficients are not Hermitian at k = {j}: u is not real")));
        }
    }
    let mut poly = vec![CValue::Real(coeffs[k].re)];
    poly.extend((1..=k).map(|j| CValue::from_complex(coeffs[k + j] * 2.0)));
    Ok(TestFunction::unchecked(FnSpec::Poly { coeffs: poly, var: 0 }, 1))
}

/// Same as [`conjugate_disc`] for `u = a_0 + sum_k (a_k cos k theta + b_k sin k theta)`,
/// with `a = [a_0, a_1, ..]` and `b = [b_1, b_2, ..]`.
pub fn conjugate_disc_trig(a: &[f64], b: &[f64]) -> Result<TestFunction> {
    if a.is_empty() {
        return Err(invalid("need at least the constant term a_0"));
    }
    let k = (a.len() - 1).max(b.len());
    let mut c = vec![Complex64::new(0.0, 0.0); 2 * k + 1];
    c[k] = Complex64::new(a[0], 0.0);
    for j in 1..=k {
        let aj = a.get(j).copied().unwrap_or(0.0);
        let bj = b.get(j - 1).copied().unwrap_or(0.0);
        c[k + j] = Complex64::new(aj, -bj) / 2.0;
        c[k - j] = Complex64::new(aj, bj) / 2.0;
    }
    conjugate_disc(&c)
}

/// Fourier coefficients `c_{-K..=K}` of a real periodic function from `samples`
/// equispaced values, by FFT.
pub fn fourier_coefficients(g: &dyn Fn(f64) -> f64, k: usize, samples: usize) -> Result<Vec<Complex64>> {
    if samples < 2 * k + 1 {
        return Err(invalid("need at least 2K + 1 samples"));
    }
    let mut buf: Vec<Complex64> =
        (0..samples).map(|j| Complex64::new(g(2.0 * PI * j as f64 / samples as f64), 0.0)).collect();
    FftPlanner::new().plan_fft_forward(samples).process(&mut buf);
    let m = samples as f64;
    let mut out = Vec::with_capacity(2 * k + 1);
    for j in (1..=k).rev() {
        out.push(buf[samples - j] / m);
    }
    out.extend(buf[..=k].iter().map(|c| c / m));
    Ok(out)
}

/// Gauss-Legendre order and subdivisions per path segment.
const PATH_ORDER: usize = 16;
const PATH_PIECES: usize = 8;
/// Membership probes per segment.
const PATH_PROBES: usize = 256;

/// Conjugate `v` of a pluriharmonic `u` with `v(z0) = 0`, by integrating
/// `d^c u = sum_j (-u_{y_j} dx_j + u_{x_j} dy_j)` along the polygon
/// `z0 -> via.. -> z`. `grad_u` returns the real gradient in
/// `[x_0, y_0, x_1, y_1, ..]` order. The domain must be simply connected and
/// the polygon must stay inside it.
pub fn pluriharmonic_conjugate(
    grad_u: &dyn Fn(&[Complex64]) -> Vec<f64>,
    domain: &ModelDomain,
    z: &[Complex64],
    via: &[Point],
) -> Result<f64> {
    let n = domain.dim();
    if !domain.is_simply_connected() {
        return Err(LabError::Unsupported(format!(
            "{} is not simply connected: the conjugate may be multivalued",
            domain.name()
        )));
    }
    if z.len() != n || via.iter().any(|p| p.len() != n) {
        return Err(LabError::DimensionMismatch { expected: n, got: z.len() });
    }
    let mut path: Vec<&[Complex64]> = vec![domain.z0()];
    path.extend(via.iter().map(|p| p.as_slice()));
    path.push(z);
    for seg in path.windows(2) {
        for k in 0..=PATH_PROBES {
            let p = point::lerp(seg[0], seg[1], k as f64 / PATH_PROBES as f64);
            if !domain.contains(&p)? {
                return Err(LabError::OutsideDomain);
            }
        }
    }
    let (x, w) = gauss_legendre_unit(PATH_ORDER);
    let mut v = 0.0;
    for seg in path.windows(2) {
        let d = point::sub(seg[1], seg[0]);
        for piece in 0..PATH_PIECES {
            for (xi, wi) in x.iter().zip(&w) {
                let s = (piece as f64 + xi) / PATH_PIECES as f64;
                let g = grad_u(&point::lerp(seg[0], seg[1], s));
                let dv: f64 = d.iter().enumerate().map(|(j, dz)| -g[2 * j + 1] * dz.re + g[2 * j] * dz.im).sum();
                v += wi / PATH_PIECES as f64 * dv;
            }
        }
    }
    Ok(v)
}
