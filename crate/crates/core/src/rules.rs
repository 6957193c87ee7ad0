//! Fixed quadrature rules: Gauss-Legendre on [0, 1] and probability rules on the
//! unit sphere S^{2n-1} and the unit torus of C^n.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::point::Point;

/// Gauss-Legendre nodes and weights on [0, 1]. Weights sum to 1.
pub fn gauss_legendre_unit(m: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(m);
    (
        x.iter().map(|t| 0.5 * (t + 1.0)).collect(),
        w.iter().map(|v| 0.5 * v).collect(),
    )
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on P_m.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1);
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut t = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(m, t);
            dp = d;
            let dt = p / d;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(m, t);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - t * t) * dp * dp);
        x[i] = -t;
        x[m - 1 - i] = t;
        w[i] = wi;
        w[m - 1 - i] = wi;
    }
    (x, w)
}

fn legendre(m: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    for k in 2..=m {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if m == 0 {
        return (1.0, 0.0);
    }
    let d = m as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}

/// A probability rule: `sum w_i h(x_i)` approximates the average of `h`.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
}

/// Resolution of a sphere rule in C^n: `angular` equispaced angles per
/// coordinate and `radial` Gauss-Legendre points per simplex direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SphereResolution {
    pub angular: usize,
    pub radial: usize,
}

impl SphereResolution {
    /// Pick a resolution with roughly `n_nodes` nodes on S^{2n-1}.
    pub fn for_nodes(n: usize, n_nodes: usize) -> Self {
        if n == 1 {
            return Self { angular: n_nodes, radial: 1 };
        }
        // angular^n * (angular / 2)^(n-1) ~ n_nodes
        let dim = (2 * n - 1) as f64;
        let a = ((n_nodes as f64) * 2f64.powi(n as i32 - 1)).powf(1.0 / dim).round() as usize;
        let angular = a.max(8);
        Self { angular, radial: (angular / 2).max(4) }
    }

    pub fn coarsen(self) -> Self {
        Self {
            angular: (self.angular / 2).max(4),
            radial: (self.radial / 2).max(1),
        }
    }
}

/// Uniform probability rule on the unit sphere of C^n.
///
/// Uses the fact that `(|z_1|^2, ..., |z_n|^2)` is uniform on the simplex and the
/// phases are independent and uniform. Phases are integrated by the trapezoid
/// rule, the simplex by a collapsed Gauss-Legendre product.
pub fn sphere_rule(n: usize, res: SphereResolution) -> Rule {
    assert!(n >= 1);
    let phases = equispaced_phases(res.angular);
    if n == 1 {
        let w = 1.0 / res.angular as f64;
        return Rule {
            nodes: phases.iter().map(|e| vec![*e]).collect(),
            weights: vec![w; res.angular],
        };
    }
    let simplex = simplex_rule(n, res.radial);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let phase_w = (res.angular as f64).powi(-(n as i32));
    for (moduli_sq, ws) in &simplex {
        for_each_multi_index(n, res.angular, |idx| {
            let z: Point = idx
                .iter()
                .zip(moduli_sq)
                .map(|(&k, &m2)| phases[k] * m2.sqrt())
                .collect();
            nodes.push(z);
            weights.push(ws * phase_w);
        });
    }
    Rule { nodes, weights }
}

/// Uniform probability rule on the unit torus `{|z_j| = 1}` of C^n.
pub fn torus_rule(n: usize, angular: usize) -> Rule {
    let phases = equispaced_phases(angular);
    let mut nodes = Vec::new();
    for_each_multi_index(n, angular, |idx| {
        nodes.push(idx.iter().map(|&k| phases[k]).collect());
    });
    let w = 1.0 / nodes.len() as f64;
    let weights = vec![w; nodes.len()];
    Rule { nodes, weights }
}

fn equispaced_phases(m: usize) -> Vec<Complex64> {
    (0..m)
        .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64))
        .collect()
}

fn for_each_multi_index(n: usize, m: usize, mut f: impl FnMut(&[usize])) {
    let mut idx = vec![0usize; n];
    loop {
        f(&idx);
        let mut j = 0;
        loop {
            if j == n {
                return;
            }
            idx[j] += 1;
            if idx[j] < m {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

/// Probability rule for the uniform distribution on the simplex
/// `{x in R^n_+, sum x = 1}`, through the collapsed (Duffy) map.
fn simplex_rule(n: usize, m: usize) -> Vec<(Vec<f64>, f64)> {
    let (gx, gw) = gauss_legendre_unit(m);
    let dims = n - 1;
    let fact: f64 = (1..n).map(|k| k as f64).product();
    let mut out = Vec::new();
    for_each_multi_index(dims, m, |idx| {
        let mut x = Vec::with_capacity(n);
        let mut rest = 1.0;
        let mut w = fact;
        for (i, &k) in idx.iter().enumerate() {
            let y = gx[k];
            x.push(rest * y);
            w *= gw[k] * (1.0 - y).powi((dims - 1 - i) as i32);
            rest *= 1.0 - y;
        }
        x.push(rest);
        out.push((x, w));
    });
    out
}
