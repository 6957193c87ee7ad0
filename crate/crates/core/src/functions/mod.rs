//! Test functions: holomorphic builders with exact gradients, conjugation,
//! plurisubharmonicity certificates, and the `lambda_beta` calculus.

mod certificate;
mod conjugate;
mod lambda;

pub use certificate::{
    complex_hessian, hermitian_min_eigenvalue, levi_min_eigenvalue, psh_certificate, psh_certificate_with_coefficient,
    sample_interior_points, CertificateReport,
};
pub use conjugate::{conjugate_disc, conjugate_disc_trig, fourier_coefficients, pluriharmonic_conjugate};
pub use lambda::{lambda_beta, KolmogorovComparison, LambdaValues};

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::geometry::{DomainKind, ModelDomain};

/// A complex constant in configs: either a real number or `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CValue {
    Real(f64),
    Pair([f64; 2]),
}

impl CValue {
    pub fn to_complex(self) -> Complex64 {
        match self {
            CValue::Real(r) => Complex64::new(r, 0.0),
            CValue::Pair([re, im]) => Complex64::new(re, im),
        }
    }

    pub fn from_complex(c: Complex64) -> Self {
        if c.im == 0.0 {
            CValue::Real(c.re)
        } else {
            CValue::Pair([c.re, c.im])
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Constructor lineage of a holomorphic test function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FnSpec {
    Const {
        value: CValue,
    },
    Coord {
        index: usize,
    },
    /// `sum_k coeffs[k] z_var^k`.
    Poly {
        coeffs: Vec<CValue>,
        #[serde(default)]
        var: usize,
    },
    /// `coeff * prod_j z_j^{exps[j]}`.
    Monomial {
        coeff: CValue,
        exps: Vec<u32>,
    },
    /// `(2 / (pi i)) log((1 + w) / (1 - w))` with `w = z_var`; maps the disc onto
    /// the strip `|Re| < 1`.
    MoebiusLog {
        #[serde(default)]
        var: usize,
    },
    /// `exp(+-(pi i / 2) inner)`: the strip `|Re| < 1` onto the right half-plane.
    StripExp {
        sign: Sign,
        inner: Box<FnSpec>,
    },
    Power {
        exp: u32,
        inner: Box<FnSpec>,
    },
    Scale {
        factor: CValue,
        inner: Box<FnSpec>,
    },
    Sum {
        terms: Vec<FnSpec>,
    },
    Product {
        factors: Vec<FnSpec>,
    },
    /// `outer(inner(z))` with `outer` a function of one variable.
    Compose {
        outer: Box<FnSpec>,
        inner: Box<FnSpec>,
    },
}

impl FnSpec {
    pub fn poly(coeffs: &[f64]) -> Self {
        FnSpec::Poly { coeffs: coeffs.iter().map(|c| CValue::Real(*c)).collect(), var: 0 }
    }

    pub fn coord(index: usize) -> Self {
        FnSpec::Coord { index }
    }

    pub fn constant(c: Complex64) -> Self {
        FnSpec::Const { value: CValue::from_complex(c) }
    }

    pub fn moebius_log() -> Self {
        FnSpec::MoebiusLog { var: 0 }
    }

    pub fn strip_exp(sign: Sign, inner: FnSpec) -> Self {
        FnSpec::StripExp { sign, inner: Box::new(inner) }
    }

    pub fn scale(factor: Complex64, inner: FnSpec) -> Self {
        FnSpec::Scale { factor: CValue::from_complex(factor), inner: Box::new(inner) }
    }

    pub fn power(exp: u32, inner: FnSpec) -> Self {
        FnSpec::Power { exp, inner: Box::new(inner) }
    }

    pub fn plus(self, c: Complex64) -> Self {
        FnSpec::Sum { terms: vec![FnSpec::constant(c), self] }
    }

    /// `self(a z_0 + b)` for a function of one variable.
    pub fn affine_arg(self, a: Complex64, b: Complex64) -> Self {
        let inner = FnSpec::Poly { coeffs: vec![CValue::from_complex(b), CValue::from_complex(a)], var: 0 };
        FnSpec::Compose { outer: Box::new(self), inner: Box::new(inner) }
    }

    /// Largest coordinate index referenced outside of composed outer functions.
    fn max_var(&self) -> Option<usize> {
        match self {
            FnSpec::Const { .. } => None,
            FnSpec::Coord { index } => Some(*index),
            FnSpec::Poly { var, coeffs } => (coeffs.len() > 1).then_some(*var),
            FnSpec::MoebiusLog { var } => Some(*var),
            FnSpec::Monomial { exps, .. } => exps.iter().rposition(|e| *e > 0),
            FnSpec::StripExp { inner, .. } | FnSpec::Power { inner, .. } | FnSpec::Scale { inner, .. } => inner.max_var(),
            FnSpec::Sum { terms: v } | FnSpec::Product { factors: v } => v.iter().filter_map(|s| s.max_var()).max(),
            FnSpec::Compose { inner, .. } => inner.max_var(),
        }
    }

    /// Value and complex gradient `(df/dz_j)_j`.
    fn eval(&self, z: &[Complex64]) -> (Complex64, Vec<Complex64>) {
        let n = z.len();
        let zero = Complex64::new(0.0, 0.0);
        let unit = |j: usize, v: Complex64| {
            let mut g = vec![zero; n];
            g[j] = v;
            g
        };
        match self {
            FnSpec::Const { value } => (value.to_complex(), vec![zero; n]),
            FnSpec::Coord { index } => (z[*index], unit(*index, Complex64::new(1.0, 0.0))),
            FnSpec::Poly { coeffs, var } => {
                let w = z[*var];
                let mut p = zero;
                let mut dp = zero;
                for c in coeffs.iter().rev() {
                    dp = dp * w + p;
                    p = p * w + c.to_complex();
                }
                (p, unit(*var, dp))
            }
            FnSpec::Monomial { coeff, exps } => {
                let c = coeff.to_complex();
                let val = exps.iter().zip(z).fold(c, |acc, (e, w)| acc * w.powu(*e));
                let grad = (0..n)
                    .map(|j| {
                        let e = exps.get(j).copied().unwrap_or(0);
                        if e == 0 {
                            return zero;
                        }
                        let rest = exps
                            .iter()
                            .zip(z)
                            .enumerate()
                            .fold(c, |acc, (k, (ek, w))| if k == j { acc * w.powu(ek - 1) * (*ek as f64) } else { acc * w.powu(*ek) });
                        rest
                    })
                    .collect();
                (val, grad)
            }
            FnSpec::MoebiusLog { var } => {
                let w = z[*var];
                let k = Complex64::new(0.0, -2.0 / PI); // 2 / (pi i)
                let one = Complex64::new(1.0, 0.0);
                let val = k * ((one + w) / (one - w)).ln();
                let d = k * 2.0 / (one - w * w);
                (val, unit(*var, d))
            }
            FnSpec::StripExp { sign, inner } => {
                let (g, dg) = inner.eval(z);
                let k = Complex64::new(0.0, sign.value() * PI / 2.0);
                let val = (k * g).exp();
                (val, dg.iter().map(|d| val * k * d).collect())
            }
            FnSpec::Power { exp, inner } => {
                let (g, dg) = inner.eval(z);
                if *exp == 0 {
                    return (Complex64::new(1.0, 0.0), vec![zero; n]);
                }
                let d = g.powu(exp - 1) * (*exp as f64);
                (g.powu(*exp), dg.iter().map(|x| d * x).collect())
            }
            FnSpec::Scale { factor, inner } => {
                let c = factor.to_complex();
                let (g, dg) = inner.eval(z);
                (c * g, dg.iter().map(|x| c * x).collect())
            }
            FnSpec::Sum { terms } => terms.iter().fold((zero, vec![zero; n]), |(v, g), t| {
                let (tv, tg) = t.eval(z);
                (v + tv, g.iter().zip(&tg).map(|(a, b)| a + b).collect())
            }),
            FnSpec::Product { factors } => factors.iter().fold((Complex64::new(1.0, 0.0), vec![zero; n]), |(v, g), t| {
                let (tv, tg) = t.eval(z);
                (v * tv, g.iter().zip(&tg).map(|(a, b)| a * tv + v * b).collect())
            }),
            FnSpec::Compose { outer, inner } => {
                let (g, dg) = inner.eval(z);
                let (h, dh) = outer.eval(&[g]);
                (h, dg.iter().map(|x| dh[0] * x).collect())
            }
        }
    }

    /// Visit every (argument -> check) constraint in the expression at `z`.
    fn collect_constraints(&self, z: &[Complex64], out: &mut Vec<Constraint>) {
        match self {
            FnSpec::MoebiusLog { var } => out.push(Constraint::UnitDisc(z[*var])),
            FnSpec::StripExp { inner, .. } => {
                out.push(Constraint::Strip(inner.eval(z).0));
                inner.collect_constraints(z, out);
            }
            FnSpec::Power { inner, .. } | FnSpec::Scale { inner, .. } => inner.collect_constraints(z, out),
            FnSpec::Sum { terms: v } | FnSpec::Product { factors: v } => {
                v.iter().for_each(|s| s.collect_constraints(z, out))
            }
            FnSpec::Compose { outer, inner } => {
                inner.collect_constraints(z, out);
                outer.collect_constraints(&[inner.eval(z).0], out);
            }
            _ => {}
        }
    }
}

enum Constraint {
    /// argument of a logarithm of `(1+w)/(1-w)` must satisfy `|w| < 1`
    UnitDisc(Complex64),
    /// argument of a strip exponential must satisfy `|Re| <= 1`
    Strip(Complex64),
}

impl fmt::Display for FnSpec {
    /// The flag mini-language where it applies, JSON otherwise.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let real = |c: &CValue| match c {
            CValue::Real(r) => Some(*r),
            CValue::Pair([re, im]) if *im == 0.0 => Some(*re),
            _ => None,
        };
        match self {
            FnSpec::Poly { coeffs, var: 0 } if coeffs.iter().all(|c| real(c).is_some()) => {
                let cs: Vec<String> = coeffs.iter().map(|c| real(c).unwrap().to_string()).collect();
                write!(f, "poly:{}", cs.join(","))
            }
            FnSpec::MoebiusLog { var: 0 } => write!(f, "moebius_log"),
            FnSpec::MoebiusLog { var } => write!(f, "moebius_log:{var}"),
            FnSpec::Coord { index } => write!(f, "coord:{index}"),
            FnSpec::Const { value } => {
                let c = value.to_complex();
                write!(f, "const:{},{}", c.re, c.im)
            }
            FnSpec::StripExp { sign, inner } => {
                write!(f, "strip_exp:{},{inner}", if *sign == Sign::Plus { "+" } else { "-" })
            }
            FnSpec::Power { exp, inner } => write!(f, "pow:{exp},{inner}"),
            FnSpec::Scale { factor, inner } => {
                let c = factor.to_complex();
                if c.im == 0.0 {
                    write!(f, "scale:{},{inner}", c.re)
                } else {
                    write!(f, "{}", serde_json::to_string(self).map_err(|_| fmt::Error)?)
                }
            }
            FnSpec::Sum { terms } if terms.len() == 2 && matches!(terms[0], FnSpec::Const { .. }) => {
                let FnSpec::Const { value } = &terms[0] else { unreachable!() };
                let c = value.to_complex();
                write!(f, "add:{},{},{}", c.re, c.im, terms[1])
            }
            FnSpec::Compose { outer, inner } => match inner.as_ref() {
                FnSpec::Poly { coeffs, var: 0 } if coeffs.len() == 2 => {
                    let (b, a) = (coeffs[0].to_complex(), coeffs[1].to_complex());
                    write!(f, "affine:{},{},{},{},{outer}", a.re, a.im, b.re, b.im)
                }
                _ => write!(f, "{}", serde_json::to_string(self).map_err(|_| fmt::Error)?),
            },
            _ => write!(f, "{}", serde_json::to_string(self).map_err(|_| fmt::Error)?),
        }
    }
}

impl FromStr for FnSpec {
    type Err = LabError;

    /// Parse the flag mini-language (`poly:0,1`, `moebius_log`,
    /// `strip_exp:+,moebius_log`, `scale:0.9,moebius_log`, `pow:2,poly:1,1`,
    /// `add:re,im,<fn>`, `affine:a_re,a_im,b_re,b_im,<fn>`, `mono:c,e0,e1`,
    /// `coord:j`, `const:re,im`) or a JSON object.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            return serde_json::from_str(s).map_err(|e| LabError::Config(format!("bad function JSON: {e}")));
        }
        let (head, rest) = match s.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (s, None),
        };
        let cfg = |m: String| LabError::Config(m);
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| cfg(format!("bad number {t:?} in {s:?}")));
        // split off `k` leading scalar arguments, returning them and the tail spec
        let split = |k: usize| -> Result<(Vec<f64>, FnSpec)> {
            let rest = rest.ok_or_else(|| cfg(format!("{head} needs arguments")))?;
            let parts: Vec<&str> = rest.splitn(k + 1, ',').collect();
            if parts.len() != k + 1 {
                return Err(cfg(format!("{head} needs {k} numbers and a function")));
            }
            let nums = parts[..k].iter().map(|t| num(t)).collect::<Result<Vec<f64>>>()?;
            Ok((nums, parts[k].parse()?))
        };
        match head {
            "poly" => {
                let rest = rest.ok_or_else(|| cfg("poly needs coefficients".into()))?;
                let cs = rest.split(',').map(num).collect::<Result<Vec<f64>>>()?;
                Ok(FnSpec::poly(&cs))
            }
            "moebius_log" => Ok(FnSpec::MoebiusLog { var: rest.map(|r| r.trim().parse().map_err(|_| cfg(format!("bad index in {s:?}")))).transpose()?.unwrap_or(0) }),
            "coord" => Ok(FnSpec::coord(
                rest.ok_or_else(|| cfg("coord needs an index".into()))?.trim().parse().map_err(|_| cfg(format!("bad index in {s:?}")))?,
            )),
            "const" => {
                let rest = rest.ok_or_else(|| cfg("const needs a value".into()))?;
                let v = rest.split(',').map(num).collect::<Result<Vec<f64>>>()?;
                match v.as_slice() {
                    [re] => Ok(FnSpec::constant(Complex64::new(*re, 0.0))),
                    [re, im] => Ok(FnSpec::constant(Complex64::new(*re, *im))),
                    _ => Err(cfg(format!("const takes one or two numbers: {s:?}"))),
                }
            }
            "mono" => {
                let rest = rest.ok_or_else(|| cfg("mono needs a coefficient and exponents".into()))?;
                let v: Vec<&str> = rest.split(',').collect();
                let coeff = num(v[0])?;
                let exps = v[1..]
                    .iter()
                    .map(|t| t.trim().parse::<u32>().map_err(|_| cfg(format!("bad exponent {t:?}"))))
                    .collect::<Result<Vec<_>>>()?;
                Ok(FnSpec::Monomial { coeff: CValue::Real(coeff), exps })
            }
            "strip_exp" => {
                let rest = rest.ok_or_else(|| cfg("strip_exp needs a sign and a function".into()))?;
                let (sign, inner) = rest.split_once(',').ok_or_else(|| cfg("strip_exp:<+|->,<fn>".into()))?;
                let sign = match sign.trim() {
                    "+" => Sign::Plus,
                    "-" => Sign::Minus,
                    other => return Err(cfg(format!("strip_exp sign must be + or -, got {other:?}"))),
                };
                Ok(FnSpec::strip_exp(sign, inner.parse()?))
            }
            "scale" => {
                let (v, inner) = split(1)?;
                Ok(FnSpec::scale(Complex64::new(v[0], 0.0), inner))
            }
            "pow" => {
                let (v, inner) = split(1)?;
                if v[0] < 0.0 || v[0].fract() != 0.0 {
                    return Err(invalid("power exponent must be a nonnegative integer"));
                }
                Ok(FnSpec::power(v[0] as u32, inner))
            }
            "add" => {
                let (v, inner) = split(2)?;
                Ok(inner.plus(Complex64::new(v[0], v[1])))
            }
            "affine" => {
                let (v, inner) = split(4)?;
                Ok(inner.affine_arg(Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3])))
            }
            other => Err(cfg(format!("unknown function kind {other:?}"))),
        }
    }
}

/// An evaluable holomorphic function on C^n with its complex gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    spec: FnSpec,
    n: usize,
}

/// Samples used when validating a function against a domain.
const VALIDATION_SAMPLES: usize = 2000;

impl TestFunction {
    /// Build and validate on `domain`: coordinates must exist and, at sampled
    /// interior points, logarithm arguments stay in the unit disc and strip
    /// exponential arguments in `|Re| <= 1`.
    pub fn build(spec: FnSpec, domain: &ModelDomain) -> Result<Self> {
        let n = domain.dim();
        if let Some(v) = spec.max_var() {
            if v >= n {
                return Err(invalid(format!("{spec} uses coordinate {v} on a {n}-dimensional domain")));
            }
        }
        if let DomainKind::GeneralSdf(_) = domain.kind() {
            return Ok(Self { spec, n });
        }
        let f = Self { spec, n };
        let mut pts = sample_interior_points(domain, VALIDATION_SAMPLES, 0.0, 0x5eed)?;
        pts.push(domain.z0().to_vec());
        let mut cons = Vec::new();
        for z in &pts {
            cons.clear();
            f.spec.collect_constraints(z, &mut cons);
            for c in &cons {
                match c {
                    Constraint::UnitDisc(w) if w.norm() >= 1.0 => {
                        return Err(invalid(format!("{}: log branch argument leaves the unit disc ({w})", f.spec)));
                    }
                    Constraint::Strip(w) if w.re.abs() > 1.0 + 1e-12 => {
                        return Err(invalid(format!("{}: strip_exp argument has |Re| > 1 ({w})", f.spec)));
                    }
                    _ => {}
                }
            }
        }
        Ok(f)
    }

    /// Build without domain validation.
    pub fn unchecked(spec: FnSpec, n: usize) -> Self {
        Self { spec, n }
    }

    pub fn spec(&self) -> &FnSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn tag(&self) -> String {
        self.spec.to_string()
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        self.spec.eval(z).0
    }

    /// `(df/dz_j)_j`.
    pub fn gradient(&self, z: &[Complex64]) -> Vec<Complex64> {
        self.spec.eval(z).1
    }

    pub fn u(&self, z: &[Complex64]) -> f64 {
        self.eval(z).re
    }

    pub fn v(&self, z: &[Complex64]) -> f64 {
        self.eval(z).im
    }

    /// Real gradient of `u = Re f` in the `[x_0, y_0, x_1, y_1, ...]` ordering:
    /// `du/dx_j = Re f_j`, `du/dy_j = -Im f_j`.
    pub fn u_real_gradient(&self, z: &[Complex64]) -> Vec<f64> {
        self.gradient(z).iter().flat_map(|g| [g.re, -g.im]).collect()
    }

    /// `f - i Im f(z0)`, so that the conjugate vanishes at `z0`.
    pub fn renormalized(&self, z0: &[Complex64]) -> (Self, f64) {
        let shift = self.v(z0);
        if shift == 0.0 {
            return (self.clone(), 0.0);
        }
        let spec = self.spec.clone().plus(Complex64::new(0.0, -shift));
        (Self { spec, n: self.n }, shift)
    }

    pub fn scaled(&self, r: f64) -> Self {
        Self { spec: FnSpec::scale(Complex64::new(r, 0.0), self.spec.clone()), n: self.n }
    }
}
