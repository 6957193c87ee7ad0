//! `lambda_beta(t) = exp(t/2 - beta log t)` and the comparison functions built
//! from it.

use std::f64::consts::E;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaValues {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

pub fn lambda_beta(t: f64, beta: f64) -> Result<LambdaValues> {
    if !(t > 0.0) {
        return Err(invalid(format!("lambda_beta needs t > 0 (got {t})")));
    }
    let value = (t / 2.0 - beta * t.ln()).exp();
    let s = 0.5 - beta / t;
    Ok(LambdaValues { value, d1: value * s, d2: value * (s * s + beta / (t * t)) })
}

/// `phi_num = lambda_alpha(log |F|^2)`, `psi = lambda_{alpha-1}(log (Re F)^2)` and
/// `phi_comb = -((alpha+1)/(alpha-1)) psi - phi_num`, evaluated at a value `F`
/// of the shifted function `f + e^{alpha+1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KolmogorovComparison {
    pub alpha: f64,
}

impl KolmogorovComparison {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 1.0) {
            return Err(invalid(format!("alpha must exceed 1 (got {alpha})")));
        }
        Ok(Self { alpha })
    }

    pub fn shift(&self) -> f64 {
        E.powf(self.alpha + 1.0)
    }

    /// `|F| / log^alpha |F|^2`.
    pub fn phi_num(&self, w: Complex64) -> f64 {
        let l = w.norm_sqr().ln();
        w.norm() / l.powf(self.alpha)
    }

    /// `u / log^{alpha-1} u^2` with `u = Re F`.
    pub fn psi(&self, u: f64) -> f64 {
        u / (u * u).ln().powf(self.alpha - 1.0)
    }

    pub fn phi_comb(&self, w: Complex64) -> f64 {
        -(self.alpha + 1.0) / (self.alpha - 1.0) * self.psi(w.re) - self.phi_num(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{levi_min_eigenvalue, FnSpec, TestFunction};
    use crate::geometry::ModelDomain;
    use crate::functions::sample_interior_points;

    #[test]
    fn closed_forms() {
        for beta in [0.0, 0.5, 2.0, 7.0] {
            assert!((lambda_beta(1.0, beta).unwrap().value - 0.5f64.exp()).abs() < 1e-15);
        }
        let alpha = 2.0;
        let t = 2.0 * (alpha + 1.0);
        let l = lambda_beta(t, alpha).unwrap();
        assert!(l.d2 <= l.value * (0.25 + alpha * (alpha + 1.0) / (t * t)) + 1e-12);
        assert!(l.d2 <= l.value / 2.0);
        assert!(lambda_beta(0.0, 1.0).is_err());
        assert!(lambda_beta(-1.0, 1.0).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        for t in [1.0, 5.0, 10.0] {
            for beta in [0.5, 1.5, 3.0] {
                let l = lambda_beta(t, beta).unwrap();
                let p = lambda_beta(t + h, beta).unwrap();
                let m = lambda_beta(t - h, beta).unwrap();
                assert!(((p.value - m.value) / (2.0 * h) - l.d1).abs() <= 1e-6 * (1.0 + l.d1.abs()));
                assert!(((p.d1 - m.d1) / (2.0 * h) - l.d2).abs() <= 1e-6 * (1.0 + l.d2.abs()));
            }
        }
    }

    #[test]
    fn comparison_pieces_agree_with_lambda() {
        let k = KolmogorovComparison::new(2.0).unwrap();
        let w = Complex64::new(30.0, 4.0);
        let l = lambda_beta(w.norm_sqr().ln(), 2.0).unwrap().value;
        assert!((k.phi_num(w) - l).abs() < 1e-12 * l);
        let l1 = lambda_beta((30.0f64 * 30.0).ln(), 1.0).unwrap().value;
        assert!((k.psi(30.0) - l1).abs() < 1e-12 * l1);
        assert!(KolmogorovComparison::new(1.0).is_err());
    }

    #[test]
    fn combined_function_is_psh() {
        for alpha in [1.5, 2.0, 3.0] {
            let k = KolmogorovComparison::new(alpha).unwrap();
            let d = ModelDomain::ball(2);
            let spec = FnSpec::Sum {
                terms: vec![FnSpec::constant(Complex64::new(1.0 + k.shift(), 0.0)), FnSpec::coord(0), FnSpec::coord(1)],
            };
            let f = TestFunction::build(spec, &d).unwrap();
            for z in sample_interior_points(&d, 20, 1e-2, 4).unwrap() {
                let l = levi_min_eigenvalue(&|w| k.phi_comb(f.eval(w)), &z, 1e-3);
                assert!(l >= -1e-6, "alpha {alpha}: {l}");
            }
        }
    }
}
