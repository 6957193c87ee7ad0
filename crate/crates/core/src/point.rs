//! Points of C^n stored as complex coordinates, with the real embedding into
//! R^{2n} used by the real potential theory (`[re_0, im_0, re_1, im_1, ...]`).

use num_complex::Complex64;

pub type Point = Vec<Complex64>;

pub fn origin(n: usize) -> Point {
    vec![Complex64::new(0.0, 0.0); n]
}

pub fn to_real(z: &[Complex64]) -> Vec<f64> {
    z.iter().flat_map(|c| [c.re, c.im]).collect()
}

pub fn from_real(x: &[f64]) -> Point {
    x.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect()
}

pub fn norm_sqr(z: &[Complex64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum()
}

pub fn norm(z: &[Complex64]) -> f64 {
    norm_sqr(z).sqrt()
}

pub fn dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian inner product `<z, w> = sum z_j conj(w_j)`.
pub fn inner(z: &[Complex64], w: &[Complex64]) -> Complex64 {
    z.iter().zip(w).map(|(a, b)| a * b.conj()).sum()
}

pub fn sub(a: &[Complex64], b: &[Complex64]) -> Point {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[Complex64], b: &[Complex64]) -> Point {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[Complex64], s: f64) -> Point {
    a.iter().map(|x| x * s).collect()
}

/// `a + s (b - a)`.
pub fn lerp(a: &[Complex64], b: &[Complex64], s: f64) -> Point {
    a.iter().zip(b).map(|(x, y)| x + (y - x) * s).collect()
}

/// Pairs `[re, im]` for JSON output.
pub fn to_pairs(z: &[Complex64]) -> Vec<[f64; 2]> {
    z.iter().map(|c| [c.re, c.im]).collect()
}

pub fn from_pairs(p: &[[f64; 2]]) -> Point {
    p.iter().map(|c| Complex64::new(c[0], c[1])).collect()
}

/// Surface area of the unit (m-1)-sphere in R^m, `2 pi^{m/2} / Gamma(m/2)`.
pub fn unit_sphere_area(m: usize) -> f64 {
    use std::f64::consts::PI;
    // Gamma(m/2) by recursion from Gamma(1) = 1, Gamma(1/2) = sqrt(pi).
    let mut gamma = if m % 2 == 0 { 1.0 } else { PI.sqrt() };
    let mut k = if m % 2 == 0 { 1.0 } else { 0.5 };
    while k < m as f64 / 2.0 - 1e-12 {
        gamma *= k;
        k += 1.0;
    }
    2.0 * PI.powf(m as f64 / 2.0) / gamma
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sphere_areas() {
        assert!((unit_sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((unit_sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((unit_sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((unit_sphere_area(6) - PI.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn real_embedding_round_trip() {
        let z = vec![Complex64::new(0.1, -0.2), Complex64::new(0.3, 0.4)];
        assert_eq!(from_real(&to_real(&z)), z);
        assert_eq!(to_real(&z), vec![0.1, -0.2, 0.3, 0.4]);
    }
}
