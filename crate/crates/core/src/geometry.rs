//! Model domains, membership and distance queries, and exhaustion families.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, unsupported, LabError, Result};
use crate::point::{self, Point};

/// Signed distance oracle on R^{2n}: negative inside, positive outside, and
/// `|sdf|` a lower bound on the Euclidean distance to the boundary.
pub type SdfFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct SdfDomain {
    /// Complex dimension; the oracle takes points of R^{2n}.
    pub n: usize,
    pub sdf: SdfFn,
    /// Caller's assertion that the domain is star-shaped about the basepoint.
    pub star_shaped: bool,
}

impl fmt::Debug for SdfDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SdfDomain")
            .field("n", &self.n)
            .field("star_shaped", &self.star_shaped)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum DomainKind {
    UnitDisc,
    Annulus { r_inner: f64 },
    Ball { n: usize },
    Polydisc { n: usize },
    GeneralSdf(SdfDomain),
}

impl DomainKind {
    pub fn name(&self) -> String {
        match self {
            DomainKind::UnitDisc => "disc".into(),
            DomainKind::Annulus { r_inner } => format!("annulus({r_inner})"),
            DomainKind::Ball { n } => format!("ball({n})"),
            DomainKind::Polydisc { n } => format!("polydisc({n})"),
            DomainKind::GeneralSdf(s) => format!("sdf({})", s.n),
        }
    }
}

/// A domain together with its basepoint `z0`.
#[derive(Debug, Clone)]
pub struct ModelDomain {
    kind: DomainKind,
    z0: Point,
}

impl ModelDomain {
    pub fn new(kind: DomainKind, z0: Point) -> Result<Self> {
        match &kind {
            DomainKind::Annulus { r_inner } if !(*r_inner > 0.0 && *r_inner < 1.0) => {
                return Err(invalid(format!("annulus requires 0 < r_inner < 1, got {r_inner}")));
            }
            DomainKind::Ball { n } | DomainKind::Polydisc { n } if *n == 0 => {
                return Err(invalid("dimension must be positive"));
            }
            DomainKind::GeneralSdf(s) if s.n == 0 => return Err(invalid("dimension must be positive")),
            _ => {}
        }
        let d = Self { kind, z0: Vec::new() };
        if z0.len() != d.dim() {
            return Err(LabError::DimensionMismatch { expected: d.dim(), got: z0.len() });
        }
        if d.boundary_distance_unchecked(&z0) <= 0.0 {
            return Err(invalid("basepoint z0 must lie strictly inside the domain"));
        }
        Ok(Self { z0, ..d })
    }

    pub fn disc() -> Self {
        Self::new(DomainKind::UnitDisc, point::origin(1)).expect("origin is interior")
    }

    pub fn ball(n: usize) -> Self {
        Self::new(DomainKind::Ball { n }, point::origin(n)).expect("origin is interior")
    }

    pub fn polydisc(n: usize) -> Self {
        Self::new(DomainKind::Polydisc { n }, point::origin(n)).expect("origin is interior")
    }

    pub fn with_z0(&self, z0: Point) -> Result<Self> {
        Self::new(self.kind.clone(), z0)
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn z0(&self) -> &[Complex64] {
        &self.z0
    }

    /// Complex dimension n.
    pub fn dim(&self) -> usize {
        match &self.kind {
            DomainKind::UnitDisc | DomainKind::Annulus { .. } => 1,
            DomainKind::Ball { n } | DomainKind::Polydisc { n } => *n,
            DomainKind::GeneralSdf(s) => s.n,
        }
    }

    pub fn name(&self) -> String {
        self.kind.name()
    }

    /// Disc, ball or polydisc: the domains with closed-form pluricomplex Green functions.
    pub fn is_hyperconvex_model(&self) -> bool {
        matches!(self.kind, DomainKind::UnitDisc | DomainKind::Ball { .. } | DomainKind::Polydisc { .. })
    }

    pub fn is_centered(&self) -> bool {
        self.is_hyperconvex_model() && self.z0.iter().all(|c| c.norm() == 0.0)
    }

    pub fn is_simply_connected(&self) -> bool {
        match &self.kind {
            DomainKind::Annulus { .. } => false,
            DomainKind::GeneralSdf(s) => s.star_shaped,
            _ => true,
        }
    }

    /// The domain itself as a realized region.
    pub fn shape(&self) -> Shape {
        let n = self.dim();
        match &self.kind {
            DomainKind::UnitDisc | DomainKind::Ball { .. } => Shape::Ball { center: point::origin(n), radius: 1.0 },
            DomainKind::Polydisc { n } => Shape::Polydisc { center: point::origin(*n), radii: vec![1.0; *n] },
            DomainKind::Annulus { r_inner } => Shape::Annulus { r_inner: *r_inner, r_outer: 1.0 },
            DomainKind::GeneralSdf(s) => Shape::Sdf { domain: s.clone(), anchor: self.z0.clone(), factor: 1.0 },
        }
    }

    fn check_dim(&self, z: &[Complex64]) -> Result<()> {
        if z.len() != self.dim() {
            return Err(LabError::DimensionMismatch { expected: self.dim(), got: z.len() });
        }
        Ok(())
    }

    pub fn contains(&self, z: &[Complex64]) -> Result<bool> {
        self.check_dim(z)?;
        Ok(self.boundary_distance_unchecked(z) > 0.0)
    }

    /// Lower bound on the Euclidean distance to the boundary; exact for the
    /// disc, ball, polydisc and annulus.
    pub fn boundary_distance(&self, z: &[Complex64]) -> Result<f64> {
        self.check_dim(z)?;
        let d = self.boundary_distance_unchecked(z);
        if d > 0.0 {
            Ok(d)
        } else {
            Err(LabError::OutsideDomain)
        }
    }

    fn boundary_distance_unchecked(&self, z: &[Complex64]) -> f64 {
        match &self.kind {
            DomainKind::UnitDisc | DomainKind::Ball { .. } => 1.0 - point::norm(z),
            DomainKind::Polydisc { .. } => z.iter().map(|c| 1.0 - c.norm()).fold(f64::INFINITY, f64::min),
            DomainKind::Annulus { r_inner } => {
                let r = z[0].norm();
                (r - r_inner).min(1.0 - r)
            }
            DomainKind::GeneralSdf(s) => -(s.sdf)(&point::to_real(z)),
        }
    }

    /// Dilation of the domain about `z0`: `z0 + r (Omega - z0)`.
    pub fn dilation(&self, r: f64) -> Result<ExhaustionLevel> {
        if !(r > 0.0 && r < 1.0) {
            return Err(invalid(format!("dilation factor must lie in (0, 1), got {r}")));
        }
        let shape = match self.shape() {
            Shape::Ball { center, radius } => Shape::Ball {
                center: point::lerp(&self.z0, &center, r),
                radius: radius * r,
            },
            Shape::Polydisc { center, radii } => Shape::Polydisc {
                center: point::lerp(&self.z0, &center, r),
                radii: radii.iter().map(|q| q * r).collect(),
            },
            Shape::Sdf { domain, anchor, .. } => {
                if !domain.star_shaped {
                    return Err(unsupported("dilation exhaustion needs a domain star-shaped about z0"));
                }
                Shape::Sdf { domain, anchor, factor: r }
            }
            _ => return Err(unsupported(format!("{} is not star-shaped; no dilation exhaustion", self.name()))),
        };
        Ok(ExhaustionLevel { t: r, realization: Realization::Dilation { r }, shape })
    }

    /// Sublevel set `{g(., z0) < -t}` of the pluricomplex Green function.
    pub fn green_sublevel(&self, t: f64) -> Result<ExhaustionLevel> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(invalid(format!("sublevel parameter must be positive, got {t}")));
        }
        let s = (-t).exp();
        let a = &self.z0;
        let shape = match &self.kind {
            DomainKind::UnitDisc | DomainKind::Ball { n: 1 } => {
                let (c, rad) = disc_sublevel(a[0], s);
                Shape::Ball { center: vec![c], radius: rad }
            }
            DomainKind::Polydisc { .. } => {
                let (center, radii) = a.iter().map(|aj| disc_sublevel(*aj, s)).unzip();
                Shape::Polydisc { center, radii }
            }
            DomainKind::Ball { n } => {
                if self.is_centered() {
                    Shape::Ball { center: point::origin(*n), radius: s }
                } else {
                    Shape::MoebiusBall { pole: a.clone(), level: s }
                }
            }
            _ => return Err(unsupported(format!("{} has no pluricomplex Green function", self.name()))),
        };
        Ok(ExhaustionLevel { t, realization: Realization::GreenSublevel { t }, shape })
    }

    /// The cheapest valid exhaustion level for this domain kind at parameter
    /// `t > 0`: Green sublevels on the model hyperconvex domains, dilation by
    /// `e^{-t}` on star-shaped general domains.
    pub fn exhaustion(&self, t: f64) -> Result<ExhaustionLevel> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(invalid(format!("exhaustion parameter must be positive, got {t}")));
        }
        if self.is_hyperconvex_model() {
            self.green_sublevel(t)
        } else {
            let mut level = self.dilation((-t).exp())?;
            level.t = t;
            Ok(level)
        }
    }

    pub fn levels(&self, scheme: Scheme, params: &[f64]) -> Result<Vec<ExhaustionLevel>> {
        params
            .iter()
            .map(|&p| match scheme {
                Scheme::Dilation => self.dilation(p),
                Scheme::GreenSublevel => self.green_sublevel(p),
            })
            .collect()
    }
}

/// Euclidean disc `{|phi_a(z)| < s}`: returns (center, radius).
fn disc_sublevel(a: Complex64, s: f64) -> (Complex64, f64) {
    let a2 = a.norm_sqr();
    let den = 1.0 - s * s * a2;
    (a * ((1.0 - s * s) / den), s * (1.0 - a2) / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Dilation,
    GreenSublevel,
}

/// Default dilation schedule, approaching the boundary.
pub const DEFAULT_DILATIONS: [f64; 6] = [0.5, 0.9, 0.99, 0.999, 0.9999, 0.99999];
/// Default Green-sublevel schedule, `t` decreasing to 0.
pub const DEFAULT_SUBLEVELS: [f64; 6] = [std::f64::consts::LN_2, 0.1, 0.01, 0.001, 1e-4, 1e-5];

impl Scheme {
    pub fn default_params(self) -> &'static [f64] {
        match self {
            Scheme::Dilation => &DEFAULT_DILATIONS,
            Scheme::GreenSublevel => &DEFAULT_SUBLEVELS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Realization {
    Dilation { r: f64 },
    GreenSublevel { t: f64 },
}

/// One member `Omega_t` of an exhaustion.
#[derive(Debug, Clone)]
pub struct ExhaustionLevel {
    pub t: f64,
    pub realization: Realization,
    pub shape: Shape,
}

impl ExhaustionLevel {
    pub fn contains(&self, z: &[Complex64]) -> bool {
        self.shape.contains(z)
    }

    /// Position along the family: grows to infinity as the level reaches the
    /// boundary of the domain.
    pub fn depth(&self) -> f64 {
        match self.realization {
            Realization::Dilation { r } => -(1.0 - r).ln(),
            Realization::GreenSublevel { t } => -t.ln(),
        }
    }
}

/// A realized region of C^n.
#[derive(Debug, Clone)]
pub enum Shape {
    /// Euclidean ball (a disc when n = 1).
    Ball { center: Point, radius: f64 },
    Polydisc { center: Point, radii: Vec<f64> },
    Annulus { r_inner: f64, r_outer: f64 },
    /// `{z in B : |phi_pole(z)| < level}` for the ball automorphism `phi_pole`.
    MoebiusBall { pole: Point, level: f64 },
    /// `anchor + factor (D - anchor)` for a signed-distance domain D.
    Sdf { domain: SdfDomain, anchor: Point, factor: f64 },
}

impl Shape {
    pub fn dim(&self) -> usize {
        match self {
            Shape::Ball { center, .. } | Shape::Polydisc { center, .. } => center.len(),
            Shape::Annulus { .. } => 1,
            Shape::MoebiusBall { pole, .. } => pole.len(),
            Shape::Sdf { domain, .. } => domain.n,
        }
    }

    pub fn contains(&self, z: &[Complex64]) -> bool {
        if z.len() != self.dim() {
            return false;
        }
        match self {
            Shape::MoebiusBall { pole, level } => {
                point::norm(z) < 1.0 && crate::potential::ball_green(pole, z) < level.ln()
            }
            _ => self.signed_gap(z) > 0.0,
        }
    }

    fn signed_gap(&self, z: &[Complex64]) -> f64 {
        match self {
            Shape::Ball { center, radius } => radius - point::dist(z, center),
            Shape::Polydisc { center, radii } => z
                .iter()
                .zip(center)
                .zip(radii)
                .map(|((w, c), r)| r - (w - c).norm())
                .fold(f64::INFINITY, f64::min),
            Shape::Annulus { r_inner, r_outer } => {
                let r = z[0].norm();
                (r - r_inner).min(r_outer - r)
            }
            Shape::Sdf { domain, anchor, factor } => {
                let base = point::add(anchor, &point::scale(&point::sub(z, anchor), 1.0 / factor));
                -factor * (domain.sdf)(&point::to_real(&base))
            }
            Shape::MoebiusBall { .. } => f64::NAN,
        }
    }

    pub fn boundary_distance(&self, z: &[Complex64]) -> Result<f64> {
        if z.len() != self.dim() {
            return Err(LabError::DimensionMismatch { expected: self.dim(), got: z.len() });
        }
        if let Shape::MoebiusBall { .. } = self {
            return Err(unsupported("no distance oracle for off-center Green sublevels of the ball"));
        }
        let d = self.signed_gap(z);
        if d > 0.0 {
            Ok(d)
        } else {
            Err(LabError::OutsideDomain)
        }
    }

    /// Nearest boundary point (exact for round shapes, first-order for SDFs).
    pub fn project(&self, z: &[Complex64]) -> Result<Point> {
        let radial = |w: Complex64, c: Complex64, r: f64| {
            let d = w - c;
            if d.norm() == 0.0 {
                c + r
            } else {
                c + d * (r / d.norm())
            }
        };
        match self {
            Shape::Ball { center, radius } => {
                let d = point::sub(z, center);
                let len = point::norm(&d);
                if len == 0.0 {
                    let mut p = center.clone();
                    p[0] += radius;
                    return Ok(p);
                }
                Ok(point::add(center, &point::scale(&d, radius / len)))
            }
            Shape::Polydisc { center, radii } => {
                let j = (0..z.len())
                    .min_by(|&i, &k| {
                        let gi = radii[i] - (z[i] - center[i]).norm();
                        let gk = radii[k] - (z[k] - center[k]).norm();
                        gi.total_cmp(&gk)
                    })
                    .unwrap_or(0);
                let mut p = z.to_vec();
                p[j] = radial(z[j], center[j], radii[j]);
                Ok(p)
            }
            Shape::Annulus { r_inner, r_outer } => {
                let r = z[0].norm();
                let target = if r - r_inner < r_outer - r { *r_inner } else { *r_outer };
                Ok(vec![radial(z[0], Complex64::new(0.0, 0.0), target)])
            }
            Shape::Sdf { domain, anchor, factor } => {
                let base = point::add(anchor, &point::scale(&point::sub(z, anchor), 1.0 / factor));
                let x = point::to_real(&base);
                let s = (domain.sdf)(&x);
                let g = sdf_gradient(&domain.sdf, &x);
                let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
                let y: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - s * gi / gn).collect();
                let b = point::from_real(&y);
                Ok(point::add(anchor, &point::scale(&point::sub(&b, anchor), *factor)))
            }
            Shape::MoebiusBall { .. } => Err(unsupported("no projection for off-center Green sublevels of the ball")),
        }
    }

    /// Characteristic size used to scale absorption shells.
    pub fn scale(&self) -> f64 {
        match self {
            Shape::Ball { radius, .. } => *radius,
            Shape::Polydisc { radii, .. } => radii.iter().cloned().fold(f64::INFINITY, f64::min),
            Shape::Annulus { r_outer, .. } => *r_outer,
            Shape::MoebiusBall { level, .. } => *level,
            Shape::Sdf { factor, .. } => *factor,
        }
    }
}

fn sdf_gradient(sdf: &SdfFn, x: &[f64]) -> Vec<f64> {
    let h = 1e-7;
    let mut y = x.to_vec();
    (0..x.len())
        .map(|i| {
            y[i] = x[i] + h;
            let fp = sdf(&y);
            y[i] = x[i] - h;
            let fm = sdf(&y);
            y[i] = x[i];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// JSON domain description, e.g. `{"kind": "ball", "n": 2, "z0": [[0,0],[0,0]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_inner: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z0: Option<Vec<[f64; 2]>>,
}

impl DomainConfig {
    pub fn build(&self) -> Result<ModelDomain> {
        let kind = match self.kind.as_str() {
            "disc" | "unit_disc" => DomainKind::UnitDisc,
            "annulus" => DomainKind::Annulus {
                r_inner: self.r_inner.ok_or_else(|| LabError::Config("annulus needs r_inner".into()))?,
            },
            "ball" => DomainKind::Ball { n: self.n.unwrap_or(1) },
            "polydisc" => DomainKind::Polydisc { n: self.n.unwrap_or(1) },
            other => return Err(LabError::Config(format!("unknown domain kind {other:?}"))),
        };
        let dim = match kind {
            DomainKind::Ball { n } | DomainKind::Polydisc { n } => n,
            _ => 1,
        };
        let z0 = match &self.z0 {
            Some(p) => point::from_pairs(p),
            None => point::origin(dim),
        };
        ModelDomain::new(kind, z0)
    }

    pub fn from_domain(d: &ModelDomain) -> Result<Self> {
        let (kind, n, r_inner) = match d.kind() {
            DomainKind::UnitDisc => ("disc", None, None),
            DomainKind::Annulus { r_inner } => ("annulus", None, Some(*r_inner)),
            DomainKind::Ball { n } => ("ball", Some(*n), None),
            DomainKind::Polydisc { n } => ("polydisc", Some(*n), None),
            DomainKind::GeneralSdf(_) => return Err(unsupported("signed-distance domains have no JSON form")),
        };
        Ok(Self { kind: kind.into(), n, r_inner, z0: Some(point::to_pairs(d.z0())) })
    }
}
